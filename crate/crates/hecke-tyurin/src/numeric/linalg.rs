//! Dense complex matrices, determinants and inverses generic over
//! [`Scalar`], and numerical kernels through nalgebra's SVD.

use super::jet::Scalar;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub entries: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> CMatrix {
        CMatrix { rows, cols, entries: vec![C64::default(); rows * cols] }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> CMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        CMatrix { rows: r, cols: c, entries: rows.concat() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> CMatrix {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        CMatrix { rows, cols, entries }
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, o.rows);
        CMatrix::from_fn(self.rows, o.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * o[(k, j)]).sum())
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn det(&self) -> C64 {
        det_lu(self)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        assert_eq!(self.rows, self.cols);
        let inv = invert(&self.to_rows(), 0.0)?;
        Ok(CMatrix::from_rows(&inv))
    }

    fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = self.to_na().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// 2-norm condition number (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        let s = self.singular_values();
        match (s.first(), s.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}
impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Determinant by LU with partial pivoting. Returns 0 for singular input.
pub fn det_lu(m: &CMatrix) -> C64 {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    det_generic(m.to_rows())
}

/// Determinant over any [`Scalar`]. Pivots on the constant term, so for
/// jets the result is exact Taylor data as long as the constant-term
/// matrix is nonsingular.
pub fn det_generic<T: Scalar>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    if n == 0 {
        panic!("determinant of an empty matrix has no scalar space");
    }
    let mut det = a[0][0].one_like();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].lead().norm().partial_cmp(&a[y][col].lead().norm()).unwrap())
            .unwrap();
        if a[piv][col].lead().norm() == 0.0 {
            return det.zero_like();
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        let (top, bottom) = a.split_at_mut(col + 1);
        let prow = &top[col];
        for row in bottom.iter_mut() {
            let f = row[col].clone() / p.clone();
            for k in col + 1..n {
                row[k] = row[k].clone() - f.clone() * prow[k].clone();
            }
        }
    }
    det
}

/// Gauss-Jordan inverse over any [`Scalar`]. Fails when a pivot's constant
/// term falls below `eps`.
pub fn invert<T: Scalar>(a: &[Vec<T>], eps: f64) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let one = a[0][0].one_like();
    let zero = one.zero_like();
    let mut w: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { one.clone() } else { zero.clone() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| w[x][col].lead().norm().partial_cmp(&w[y][col].lead().norm()).unwrap())
            .unwrap();
        let pn = w[piv][col].lead().norm();
        if pn <= eps || pn == 0.0 {
            return Err(Error::DivisionByZeroJet(pn));
        }
        w.swap(piv, col);
        let inv = one.clone() / w[col][col].clone();
        for k in 0..2 * n {
            w[col][k] = w[col][k].clone() * inv.clone();
        }
        let prow = w[col].clone();
        for (r, row) in w.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let f = row[col].clone();
            for k in 0..2 * n {
                row[k] = row[k].clone() - f.clone() * prow[k].clone();
            }
        }
    }
    Ok(w.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solve a square complex system.
pub fn solve(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let inv = a.inverse()?;
    Ok(inv.matvec(b))
}

/// Orthonormal basis of the numerical null space plus the smallest
/// singular value. Singular values below `tol * sigma_max` count as zero.
#[derive(Clone, Debug)]
pub struct KernelInfo {
    pub basis: Vec<Vec<C64>>,
    pub smallest_singular_value: f64,
    pub singular_values: Vec<f64>,
}

impl KernelInfo {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn kernel_basis(m: &CMatrix, tol: f64) -> KernelInfo {
    let n = m.cols;
    // Pad wide matrices with zero rows so the thin SVD exposes all of V.
    let rows = m.rows.max(n);
    let mut padded = DMatrix::<C64>::zeros(rows, n);
    for i in 0..m.rows {
        for j in 0..n {
            padded[(i, j)] = m[(i, j)];
        }
    }
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let thresh = tol * smax;
    let mut basis = Vec::new();
    for (k, &s) in sv.iter().enumerate() {
        if smax == 0.0 || s < thresh {
            basis.push((0..n).map(|j| v_t[(k, j)].conj()).collect());
        }
    }
    let mut sorted = sv.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    KernelInfo { basis, smallest_singular_value: sorted.last().copied().unwrap_or(0.0), singular_values: sorted }
}

/// Orthogonal projection of `v` onto the null space of `m`.
pub fn project_onto_kernel(m: &CMatrix, v: &[C64], tol: f64) -> Vec<C64> {
    let k = kernel_basis(m, tol);
    let mut out = vec![C64::default(); v.len()];
    for b in &k.basis {
        let c: C64 = b.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}
