//! Laurent coefficients c_{-2..2} from samples on a circle.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_SAMPLES: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentWindow {
    /// x-coordinate of the center; the local coordinate is x - center.
    pub center: C64,
    pub radius: f64,
    /// c_{-2}, c_{-1}, c_0, c_1, c_2.
    pub coefficients: [C64; 5],
    pub error_estimate: f64,
}

impl LaurentWindow {
    pub fn c(&self, n: i32) -> C64 {
        assert!((-2..=2).contains(&n), "window stores c_-2..c_2");
        self.coefficients[(n + 2) as usize]
    }

    /// Largest |c_{-1}|, |c_{-2}|.
    pub fn singular_size(&self) -> f64 {
        self.c(-1).norm().max(self.c(-2).norm())
    }
}

/// Sample points x_m = center + r e^{2 pi i m / n}.
pub fn circle_points(center: C64, radius: f64, n: usize) -> Vec<C64> {
    (0..n).map(|m| center + C64::from_polar(radius, 2.0 * PI * m as f64 / n as f64)).collect()
}

/// DFT fit of c_{-2..2} from samples at `circle_points(center, r, n)`.
pub fn fit(samples: &[C64], radius: f64) -> [C64; 5] {
    let n = samples.len();
    let mut out = [C64::default(); 5];
    for (slot, k) in (-2i32..=2).enumerate() {
        let mut acc = C64::default();
        for (m, v) in samples.iter().enumerate() {
            acc += v * C64::from_polar(1.0, -2.0 * PI * (k as f64) * m as f64 / n as f64);
        }
        out[slot] = acc / n as f64 / radius.powi(k);
    }
    out
}

/// Probe several outputs of `f` at once. The two fits use radius r and r/2;
/// the error estimate is the largest coefficient discrepancy, each
/// coefficient weighted by r^n so that all orders are compared on the
/// scale of the function values.
pub fn probe_many(
    f: &dyn Fn(C64) -> Result<Vec<C64>>,
    center: C64,
    radius: f64,
    n: usize,
) -> Result<Vec<LaurentWindow>> {
    assert!(n >= 32, "need at least 32 samples");
    let eval = |r: f64| -> Result<Vec<Vec<C64>>> {
        circle_points(center, r, n).into_iter().map(f).collect()
    };
    let s1 = eval(radius)?;
    let s2 = eval(radius / 2.0)?;
    let outputs = s1.first().map_or(0, |v| v.len());
    let mut res = Vec::with_capacity(outputs);
    for o in 0..outputs {
        let a: Vec<C64> = s1.iter().map(|v| v[o]).collect();
        let b: Vec<C64> = s2.iter().map(|v| v[o]).collect();
        let ca = fit(&a, radius);
        let cb = fit(&b, radius / 2.0);
        let mut err = 0.0f64;
        for (slot, k) in (-2i32..=2).enumerate() {
            err = err.max((ca[slot] - cb[slot]).norm() * radius.powi(k));
        }
        res.push(LaurentWindow { center, radius, coefficients: ca, error_estimate: err });
    }
    Ok(res)
}

pub fn probe(f: &dyn Fn(C64) -> Result<C64>, center: C64, radius: f64, n: usize) -> Result<LaurentWindow> {
    Ok(probe_many(&|x| Ok(vec![f(x)?]), center, radius, n)?.remove(0))
}

/// Like [`probe`], failing with `InconsistentFit` when the two radii
/// disagree by more than 10 tol.
pub fn probe_checked(
    f: &dyn Fn(C64) -> Result<C64>,
    center: C64,
    radius: f64,
    n: usize,
    tol: f64,
) -> Result<LaurentWindow> {
    let w = probe(f, center, radius, n)?;
    if w.error_estimate > 10.0 * tol {
        return Err(Error::InconsistentFit(w.error_estimate));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_pole() {
        let x0 = C64::new(0.4, -0.1);
        let w = probe(&|x| Ok(1.0 / ((x - x0) * (x - x0))), x0, 0.1, 48).unwrap();
        assert!((w.c(-2) - 1.0).norm() < 1e-10);
        for n in [-1, 0, 1, 2] {
            assert!(w.c(n).norm() < 1e-10);
        }
    }

    #[test]
    fn exponential() {
        let w = probe(&|x: C64| Ok(x.exp()), C64::default(), 0.2, 48).unwrap();
        assert!((w.c(0) - 1.0).norm() < 1e-12);
        assert!((w.c(1) - 1.0).norm() < 1e-12);
        assert!((w.c(2) - 0.5).norm() < 1e-10);
        assert!(w.singular_size() < 1e-10);
    }

    #[test]
    fn nearby_pole_is_inconsistent() {
        let r = probe_checked(&|x: C64| Ok(1.0 / (x - 0.12)), C64::default(), 0.1, 32, 1e-10);
        assert!(matches!(r, Err(Error::InconsistentFit(_))));
    }
}
