//! Truncated multivariate Taylor series ("jets").
//!
//! A jet of order `p` in `n` variables stores every coefficient of total
//! degree at most `p`, densely. Products truncate at `p`, so arithmetic is
//! exact on polynomials of degree at most `p`. Six variables at order four
//! is 210 coefficients, small enough that sparsity buys nothing.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

/// Index tables for jets of a given (nvars, order).
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monos: Vec<Vec<u8>>,
    degree: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    // (a, b, a+b) over all pairs with deg a + deg b <= order
    products: Vec<(u32, u32, u32)>,
    // derivative[v][k] = Some((index of mono_k - e_v, exponent)) when exponent > 0
    shifts: Vec<Vec<Option<(u32, u8)>>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(nvars={}, order={})", self.nvars, self.order)
    }
}

fn monomials(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for d in 0..=order {
        let mut cur = vec![0u8; nvars];
        fill(&mut out, &mut cur, 0, d);
    }
    out
}

fn fill(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        fill(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

impl JetSpace {
    fn build(nvars: usize, order: usize) -> JetSpace {
        let monos = monomials(nvars, order);
        let degree: Vec<usize> = monos.iter().map(|m| m.iter().map(|&e| e as usize).sum()).collect();
        let lookup: HashMap<Vec<u8>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut products = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate() {
                if degree[a] + degree[b] > order {
                    continue;
                }
                let s: Vec<u8> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                products.push((a as u32, b as u32, lookup[&s] as u32));
            }
        }
        let shifts = (0..nvars)
            .map(|v| {
                monos
                    .iter()
                    .map(|m| {
                        if m[v] == 0 {
                            None
                        } else {
                            let mut s = m.clone();
                            s[v] -= 1;
                            Some((lookup[&s] as u32, m[v]))
                        }
                    })
                    .collect()
            })
            .collect();
        JetSpace { nvars, order, monos, degree, lookup, products, shifts }
    }

    /// Shared tables for (nvars, order); built once per process.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn len(&self) -> usize {
        self.monos.len()
    }
    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }
    pub fn monomial(&self, k: usize) -> &[u8] {
        &self.monos[k]
    }
    /// Total degree of monomial k.
    pub fn degree(&self, k: usize) -> usize {
        self.degree[k]
    }
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.lookup.get(exps).copied()
    }
}

/// Number of multi-indices of total degree <= order in nvars variables.
pub fn jet_len(nvars: usize, order: usize) -> usize {
    // C(nvars + order, order)
    let mut r = 1usize;
    for i in 1..=order {
        r = r * (nvars + i) / i;
    }
    r
}

#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<C64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet({:?}, value={})", self.space, self.c[0])
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: C64) -> Jet {
        let mut c = vec![C64::new(0.0, 0.0); space.len()];
        c[0] = v;
        Jet { space: space.clone(), c }
    }

    /// The coordinate function `x_var` expanded at `at`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, at: C64) -> Jet {
        assert!(var < space.nvars, "variable index out of range");
        let mut j = Jet::constant(space, at);
        if space.order >= 1 {
            let mut e = vec![0u8; space.nvars];
            e[var] = 1;
            j.c[space.lookup[&e]] = C64::new(1.0, 0.0);
        }
        j
    }

    /// All coordinate functions at the point.
    pub fn variables(space: &Arc<JetSpace>, point: &[C64]) -> Vec<Jet> {
        assert_eq!(point.len(), space.nvars);
        point.iter().enumerate().map(|(i, &p)| Jet::variable(space, i, p)).collect()
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, c: Vec<C64>) -> Jet {
        assert_eq!(c.len(), space.len());
        Jet { space: space.clone(), c }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }
    pub fn order(&self) -> usize {
        self.space.order
    }
    pub fn nvars(&self) -> usize {
        self.space.nvars
    }
    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }
    pub fn value(&self) -> C64 {
        self.c[0]
    }

    /// Taylor coefficient of the monomial with exponents `exps`.
    pub fn coeff(&self, exps: &[u8]) -> C64 {
        self.space.index_of(exps).map(|k| self.c[k]).unwrap_or_default()
    }

    /// Partial derivative value d^|e| f / dx^e at the expansion point.
    pub fn partial(&self, exps: &[u8]) -> C64 {
        let fact: f64 = exps.iter().map(|&e| (1..=e as u32).product::<u32>() as f64).product();
        self.coeff(exps) * fact
    }

    pub fn gradient(&self) -> Vec<C64> {
        let n = self.nvars();
        (0..n)
            .map(|v| {
                let mut e = vec![0u8; n];
                e[v] = 1;
                self.coeff(&e)
            })
            .collect()
    }

    /// Second derivatives d^2 f / dx_i dx_j.
    pub fn hessian(&self) -> Vec<Vec<C64>> {
        let n = self.nvars();
        let mut h = vec![vec![C64::default(); n]; n];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[j] += 1;
                *slot = self.partial(&e);
            }
        }
        h
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Drop all terms above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order());
        let space = JetSpace::get(self.nvars(), order);
        let c = (0..space.len()).map(|k| self.coeff(space.monomial(k))).collect();
        Jet { space, c }
    }

    /// Derivative in `var`; the result is exact to one order less.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        let order = self.order();
        if order == 0 {
            return Err(Error::JetOrderTooLow { have: 0, need: 1 });
        }
        let space = JetSpace::get(self.nvars(), order - 1);
        let mut c = vec![C64::default(); space.len()];
        for (k, s) in self.space.shifts[var].iter().enumerate() {
            if let Some((lower, e)) = s {
                if let Some(t) = space.index_of(self.space.monomial(*lower as usize)) {
                    c[t] += self.c[k] * (*e as f64);
                }
            }
        }
        Ok(Jet { space, c })
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().map(|z| z * s).collect() }
    }

    pub fn add_const(&self, s: C64) -> Jet {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    fn mul_into(&self, other: &Jet, out: &mut [C64]) {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space) || self.space.len() == other.space.len());
        for &(a, b, s) in &self.space.products {
            out[s as usize] += self.c[a as usize] * other.c[b as usize];
        }
    }

    /// Apply a power series g(u) = sum_k coef[k] u^k to the nilpotent part.
    fn compose_nilpotent(&self, coef: &[C64]) -> Jet {
        let mut u = self.clone();
        u.c[0] = C64::default();
        let mut out = Jet::constant(&self.space, coef[0]);
        let mut pw = Jet::constant(&self.space, C64::new(1.0, 0.0));
        for ck in coef.iter().skip(1) {
            pw = &pw * &u;
            for (o, p) in out.c.iter_mut().zip(&pw.c) {
                *o += ck * p;
            }
        }
        out
    }

    pub fn try_recip(&self, eps: f64) -> Result<Jet> {
        let a = self.c[0];
        if a.norm() < eps {
            return Err(Error::DivisionByZeroJet(a.norm()));
        }
        Ok(self.recip())
    }

    /// 1/f; no check on the constant term (use `try_recip` for that).
    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let inv = C64::new(1.0, 0.0) / a;
        // 1/(a+u) = (1/a) sum (-u/a)^k
        let coef: Vec<C64> = (0..=self.order()).map(|k| inv * (-inv).powu(k as u32)).collect();
        self.compose_nilpotent(&coef)
    }

    pub fn exp(&self) -> Jet {
        let a = self.c[0].exp();
        let mut coef = vec![a];
        let mut f = 1.0;
        for k in 1..=self.order() {
            f *= k as f64;
            coef.push(a / f);
        }
        self.compose_nilpotent(&coef)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = self.c[0];
        if a.norm() == 0.0 {
            return Err(Error::DivisionByZeroJet(0.0));
        }
        // ln(a+u) = ln a + sum (-1)^{k+1} (u/a)^k / k
        let inv = C64::new(1.0, 0.0) / a;
        let mut coef = vec![a.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            coef.push(inv.powu(k as u32) * (sign / k as f64));
        }
        Ok(self.compose_nilpotent(&coef))
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut r = Jet::constant(&self.space, C64::new(1.0, 0.0));
        for _ in 0..n {
            r = &r * self;
        }
        r
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}
impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let mut c = vec![C64::default(); self.c.len()];
        self.mul_into(o, &mut c);
        Jet { space: self.space.clone(), c }
    }
}
impl Div for &Jet {
    type Output = Jet;
    fn div(self, o: &Jet) -> Jet {
        self * &o.recip()
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().map(|a| -a).collect() }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet { (&self).$m(&o) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet { (&self).$m(o) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet { self.$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, o: &Jet) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
    }
}
impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, o: &Jet) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
    }
}
impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self += &o;
    }
}
impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, o: Jet) {
        *self -= &o;
    }
}

/// Arithmetic shared by plain complex numbers and jets, so that the same
/// determinant and field formulas produce values or Taylor data.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    /// A constant in the same space as `self`.
    fn lift(&self, v: C64) -> Self;
    fn scaled(&self, s: C64) -> Self;
    /// Constant term.
    fn lead(&self) -> C64;
    fn zero_like(&self) -> Self {
        self.lift(C64::new(0.0, 0.0))
    }
    fn one_like(&self) -> Self {
        self.lift(C64::new(1.0, 0.0))
    }
}

impl Scalar for C64 {
    fn lift(&self, v: C64) -> Self {
        v
    }
    fn scaled(&self, s: C64) -> Self {
        self * s
    }
    fn lead(&self) -> C64 {
        *self
    }
}

impl Scalar for Jet {
    fn lift(&self, v: C64) -> Self {
        Jet::constant(&self.space, v)
    }
    fn scaled(&self, s: C64) -> Self {
        self.scale(s)
    }
    fn lead(&self) -> C64 {
        self.c[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn lengths_match_binomials() {
        for n in 1..7 {
            for p in 0..5 {
                assert_eq!(JetSpace::get(n, p).len(), jet_len(n, p));
            }
        }
        assert_eq!(jet_len(6, 4), 210);
    }

    #[test]
    fn product_of_coordinates() {
        let s = JetSpace::get(2, 2);
        let v = Jet::variables(&s, &[c(2.0), c(3.0)]);
        let f = &v[0] * &v[1];
        assert_eq!(f.value(), c(6.0));
        assert_eq!(f.gradient(), vec![c(3.0), c(2.0)]);
        let h = f.hessian();
        assert_eq!(h[0][1], c(1.0));
        assert_eq!(h[0][0], c(0.0));
        assert_eq!(h[1][1], c(0.0));
    }

    #[test]
    fn reciprocal_series() {
        let s = JetSpace::get(1, 2);
        let x = Jet::variable(&s, 0, c(2.0));
        let r = x.recip();
        assert!((r.coeffs()[0] - c(0.5)).norm() < 1e-15);
        assert!((r.coeffs()[1] - c(-0.25)).norm() < 1e-15);
        assert!((r.coeffs()[2] - c(0.125)).norm() < 1e-15);
        assert!((r.partial(&[2]) - c(0.25)).norm() < 1e-15);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let s = JetSpace::get(3, 4);
        let v = Jet::variables(&s, &[C64::new(0.3, 0.2), c(-0.7), C64::new(1.1, -0.4)]);
        let f = &(&v[0] * &v[1]) + &v[2];
        let g = f.exp().ln().unwrap();
        for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_drops_order() {
        let s = JetSpace::get(2, 3);
        let v = Jet::variables(&s, &[c(1.0), c(2.0)]);
        let f = &(&v[0] * &v[0]) * &v[1];
        let d = f.derivative(0).unwrap();
        assert_eq!(d.order(), 2);
        // d/dx (x^2 y) = 2xy
        assert!((d.value() - c(4.0)).norm() < 1e-14);
        assert!((d.gradient()[1] - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_division_is_reported() {
        let s = JetSpace::get(1, 1);
        let x = Jet::variable(&s, 0, c(0.0));
        assert!(matches!(x.try_recip(1e-14), Err(Error::DivisionByZeroJet(_))));
    }
}
