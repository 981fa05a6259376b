//! Quantized operators in the Hecke coordinates ℓ.
//!
//! ℓ^diff(z) = Σ_i μ_i(ℓ,z)∂_{ℓ_i} − k·ν(ℓ,z) is sl₂-valued and first order;
//! T^diff(z) = Σ_α ℓ^diff_{x_α}ℓ^diff_{y_α} + Σ_α a_{x_α}ℓ^diff_{y_α} + s with
//! Σ_α x_α⊗y_α = e⊗f + f⊗e + ½h⊗h. With the pairing of [`crate::hitchin`]
//! this is Σ over (x, y, w) ∈ {(f,e,1), (e,f,1), (h,h,2)} of w·L^x L^y.
//!
//! Coefficients are jets in ℓ, so operator composition is exact
//! differentiation of the coefficient fields.

use crate::curve::Site;
use crate::error::{Error, Result};
use crate::hecke::{DenData, HeckeConfig, PointData};
use crate::hitchin::{bracket, residue_direction, Interpolator, SL2Vector};
use crate::numeric::jet::{Jet, JetSpace, Scalar};
use crate::numeric::laurent::{self, LaurentWindow};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// (x, y, weight) over component indices e = 0, h = 1, f = 2.
pub const CASIMIR_PAIRS: [(usize, usize, f64); 3] = [(2, 0, 1.0), (0, 2, 1.0), (1, 1, 2.0)];

/// Principal symbol of T^diff contracted with λ⊗λ equals this constant
/// times tr ρ(A)².
pub const SYMBOL_NORMALIZATION: f64 = 1.0;

/// The coefficient fields μ_i, ν, a, s at one z.
#[derive(Clone, Debug)]
pub struct Fields<T> {
    pub mu: Vec<SL2Vector<T>>,
    pub nu: SL2Vector<T>,
    pub a: SL2Vector<T>,
    pub s: T,
}

pub fn fields<T: Scalar>(cfg: &HeckeConfig, ell: &[T], dd: &DenData<T>, zd: &PointData, k: C64) -> Fields<T> {
    let n = cfg.n();
    let zero = ell[0].zero_like();
    let ratios: Vec<[T; 3]> = (0..n).map(|j| dd.ratios(j, &zd.site.omega)).collect();
    let brackets: Vec<SL2Vector<T>> = ratios.iter().map(bracket).collect();
    let half = C64::new(0.5, 0.0);
    let mut mu = Vec::with_capacity(n);
    let mut nu = SL2Vector::zero_like(&zero);
    for i in 0..n {
        let mut m = residue_direction(&ell[i]).scaled(-zd.gz[i]);
        nu = nu.add(&SL2Vector::new(zero.clone(), zero.lift(half), ell[i].clone()).scaled(-zd.gz[i]));
        for j in (0..n).filter(|&j| j != i) {
            let lij = ell[i].clone() - ell[j].clone();
            m = m.add(&brackets[j].mul(&(lij.clone() * lij.clone())).scaled(-cfg.gp[j][i]));
            nu = nu.add(&brackets[j].mul(&(-lij)).scaled(cfg.gp[j][i]));
        }
        mu.push(m);
    }
    let mut a = SL2Vector::zero_like(&zero);
    let mut s = zero.clone();
    for i in 0..n {
        let [d0, d1, d2] = ratios[i].clone();
        let l = ell[i].clone();
        let ll = l.clone() * l.clone();
        let two = zero.lift(C64::new(2.0, 0.0));
        let br = SL2Vector::new(
            d1.clone() + two.clone() * l.clone() * d2.clone(),
            d0.clone() - ll.clone() * d2.clone(),
            two * l.clone() * d0.clone() + ll.clone() * d1.clone(),
        );
        a = a.add(&br.scaled(-zd.gp[i]));
        s = s + (d0 + l * d1 + ll * d2).scaled(-k * zd.dgp[i]);
    }
    Fields { mu, nu, a, s }
}

fn fields_at(cfg: &HeckeConfig, z: &Site, k: C64) -> Result<Fields<C64>> {
    let dd = cfg.den_data()?;
    Ok(fields(cfg, &cfg.ell, &dd, &cfg.point_data(z)?, k))
}

/// a_P(ℓ, z).
pub fn coeff_a(cfg: &HeckeConfig, z: &Site) -> Result<SL2Vector<C64>> {
    Ok(fields_at(cfg, z, C64::new(0.0, 0.0))?.a)
}

/// s_P(ℓ, z), carrying the factor k.
pub fn coeff_s(cfg: &HeckeConfig, z: &Site, k: C64) -> Result<C64> {
    Ok(fields_at(cfg, z, k)?.s)
}

pub fn coeff_mu(cfg: &HeckeConfig, i: usize, z: &Site) -> Result<SL2Vector<C64>> {
    Ok(fields_at(cfg, z, C64::new(0.0, 0.0))?.mu.swap_remove(i))
}

pub fn coeff_nu(cfg: &HeckeConfig, z: &Site) -> Result<SL2Vector<C64>> {
    Ok(fields_at(cfg, z, C64::new(0.0, 0.0))?.nu)
}

/// Σ_i c1_i ∂_{ℓ_i} + c0, coefficients as jets.
#[derive(Clone, Debug)]
pub struct FirstOrder {
    pub d1: Vec<Jet>,
    pub d0: Jet,
}

impl FirstOrder {
    pub fn apply(&self, f: &Jet) -> Result<Jet> {
        if f.order() < 1 {
            return Err(Error::JetOrderTooLow { have: f.order(), need: 1 });
        }
        let o = (f.order() - 1).min(self.d0.order());
        let mut out = self.d0.truncate(o) * f.truncate(o);
        for (i, c) in self.d1.iter().enumerate() {
            out += c.truncate(o) * f.derivative(i)?.truncate(o);
        }
        Ok(out)
    }
}

/// ℓ^diff as three first-order operators (e, h, f components).
#[derive(Clone, Debug)]
pub struct SL2Operator {
    pub k: C64,
    pub comps: [FirstOrder; 3],
}

impl SL2Operator {
    pub fn component(&self, c: usize) -> &FirstOrder {
        &self.comps[c]
    }
}

/// Σ_{ij} S2_ij ∂_i∂_j + Σ_j S1_j ∂_j + S0.
#[derive(Clone, Debug)]
pub struct DiffOperator {
    pub k: C64,
    pub s2: Vec<Vec<Jet>>,
    pub s1: Vec<Jet>,
    pub s0: Jet,
}

impl DiffOperator {
    pub fn n(&self) -> usize {
        self.s1.len()
    }

    pub fn coefficient_order(&self) -> usize {
        self.s0.order()
    }

    /// ½(S2 + S2ᵀ): the coefficient of ∂²_{ℓ_iℓ_j} as a symmetric form.
    pub fn symbol(&self) -> Vec<Vec<Jet>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| (&self.s2[i][j] + &self.s2[j][i]).scale(C64::new(0.5, 0.0))).collect())
            .collect()
    }

    /// Principal symbol at the base point contracted with λ⊗λ.
    pub fn symbol_on(&self, lam: &[C64]) -> C64 {
        let mut s = C64::default();
        for (i, li) in lam.iter().enumerate() {
            for (j, lj) in lam.iter().enumerate() {
                s += self.s2[i][j].value() * li * lj;
            }
        }
        s
    }

    /// Apply to f; the result has order min(order(f) − 2, coefficient order).
    pub fn apply(&self, f: &Jet) -> Result<Jet> {
        if f.order() < 2 {
            return Err(Error::JetOrderTooLow { have: f.order(), need: 2 });
        }
        let o = (f.order() - 2).min(self.coefficient_order());
        let mut out = self.s0.truncate(o) * f.truncate(o);
        for j in 0..self.n() {
            let dj = f.derivative(j)?;
            out += self.s1[j].truncate(o) * dj.truncate(o);
            for i in 0..self.n() {
                out += self.s2[i][j].truncate(o) * dj.derivative(i)?.truncate(o);
            }
        }
        Ok(out)
    }

    pub fn linear_combination(ops: &[DiffOperator], w: &[C64]) -> DiffOperator {
        let n = ops[0].n();
        let z = ops[0].s0.scale(C64::new(0.0, 0.0));
        let mut s2 = vec![vec![z.clone(); n]; n];
        let mut s1 = vec![z.clone(); n];
        let mut s0 = z;
        for (op, c) in ops.iter().zip(w) {
            for i in 0..n {
                for j in 0..n {
                    s2[i][j] += op.s2[i][j].scale(*c);
                }
                s1[i] += op.s1[i].scale(*c);
            }
            s0 += op.s0.scale(*c);
        }
        DiffOperator { k: ops[0].k, s2, s1, s0 }
    }

    /// All coefficient values at the base point: S2 row-major, S1, S0.
    pub fn values(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.s2.iter().flatten().map(|j| j.value()).collect();
        v.extend(self.s1.iter().map(|j| j.value()));
        v.push(self.s0.value());
        v
    }
}

/// Fields with ℓ as jets of order `order` at the point ℓ of `cfg`.
pub fn jet_fields(cfg: &HeckeConfig, zd: &PointData, k: C64, order: usize) -> Result<Fields<Jet>> {
    cfg.require_den()?;
    let ell = Jet::variables(&JetSpace::get(cfg.n(), order), &cfg.ell);
    let dd = DenData::new(&cfg.omegas(), &ell)?;
    Ok(fields(cfg, &ell, &dd, zd, k))
}

pub fn ell_diff(cfg: &HeckeConfig, z: &Site, k: C64, order: usize) -> Result<SL2Operator> {
    let fl = jet_fields(cfg, &cfg.point_data(z)?, k, order)?;
    Ok(ell_diff_from(&fl, k))
}

fn ell_diff_from(fl: &Fields<Jet>, k: C64) -> SL2Operator {
    let comp = |c: usize| FirstOrder { d1: fl.mu.iter().map(|m| m.get(c).clone()).collect(), d0: fl.nu.get(c).scale(-k) };
    SL2Operator { k, comps: [comp(0), comp(1), comp(2)] }
}

/// T^diff at z from jet fields of order ≥ 1; coefficient jets come out one
/// order lower.
pub fn t_diff_from(fl: &Fields<Jet>, k: C64) -> Result<DiffOperator> {
    let ord = fl.s.order();
    if ord < 1 {
        return Err(Error::JetOrderTooLow { have: ord, need: 1 });
    }
    let o = ord - 1;
    let n = fl.mu.len();
    let mu: Vec<[Jet; 3]> = fl.mu.iter().map(|m| [m.e.truncate(o), m.h.truncate(o), m.f.truncate(o)]).collect();
    let nu = [fl.nu.e.truncate(o), fl.nu.h.truncate(o), fl.nu.f.truncate(o)];
    let a = [fl.a.e.truncate(o), fl.a.h.truncate(o), fl.a.f.truncate(o)];
    let dmu: Vec<Vec<[Jet; 3]>> = (0..n)
        .map(|i| {
            fl.mu
                .iter()
                .map(|m| Ok([m.e.derivative(i)?, m.h.derivative(i)?, m.f.derivative(i)?]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let dnu: Vec<[Jet; 3]> = (0..n)
        .map(|i| Ok([fl.nu.e.derivative(i)?, fl.nu.h.derivative(i)?, fl.nu.f.derivative(i)?]))
        .collect::<Result<_>>()?;
    let zero = fl.s.truncate(o).scale(C64::new(0.0, 0.0));
    let mut s2 = vec![vec![zero.clone(); n]; n];
    let mut s1 = vec![zero.clone(); n];
    let mut s0 = fl.s.truncate(o);
    for &(x, y, w) in &CASIMIR_PAIRS {
        let w = C64::new(w, 0.0);
        for i in 0..n {
            for j in 0..n {
                s2[i][j] += (&mu[i][x] * &mu[j][y]).scale(w);
            }
        }
        for j in 0..n {
            let mut t = (&a[x] * &mu[j][y]) - (&nu[x] * &mu[j][y]).scale(k) - (&mu[j][x] * &nu[y]).scale(k);
            for i in 0..n {
                t += &mu[i][x] * &dmu[i][j][y];
            }
            s1[j] += t.scale(w);
        }
        let mut t = (&nu[x] * &nu[y]).scale(k * k) - (&a[x] * &nu[y]).scale(k);
        for i in 0..n {
            t -= (&mu[i][x] * &dnu[i][y]).scale(k);
        }
        s0 += t.scale(w);
    }
    Ok(DiffOperator { k, s2, s1, s0 })
}

/// T^diff(z) with coefficient jets of the given order.
pub fn t_diff(cfg: &HeckeConfig, z: &Site, k: C64, order: usize) -> Result<DiffOperator> {
    t_diff_at(cfg, &cfg.point_data(z)?, k, order)
}

pub fn t_diff_at(cfg: &HeckeConfig, zd: &PointData, k: C64, order: usize) -> Result<DiffOperator> {
    t_diff_from(&jet_fields(cfg, zd, k, order + 1)?, k)
}

/// Basis of quadratic differentials with at most a double pole at P_0
/// (on its sheet): x^j/y² (j = 0,1,2), (y+b)/((x−a)y²) and
/// (y + b + b'(x−a))/((x−a)²y²), where P_0 = (a, b) and b' = dy/dx there.
pub fn extended_quadratic_basis(cfg: &HeckeConfig, z: &Site) -> Vec<C64> {
    let p0 = &cfg.kernel.p0;
    let (a, b) = (p0.x(), p0.y);
    let bp = b * cfg.pd().model.dlog_y(a);
    let (x, y) = (z.x(), z.y);
    let y2 = y * y;
    let t = x - a;
    vec![C64::new(1.0, 0.0) / y2, x / y2, x * x / y2, (y + b) / (t * y2), (y + b + bp * t) / (t * t * y2)]
}

#[derive(Clone, Debug)]
pub struct TDiffAlpha {
    /// The holomorphic components T_α, α = 0, 1, 2.
    pub ops: Vec<DiffOperator>,
    /// The two components along the P_0-polar basis elements.
    pub polar: Vec<DiffOperator>,
    pub held_out_residual: f64,
    pub interpolator: Interpolator,
}

/// Expand T^diff(z) in the extended basis; g = 2 only.
pub fn t_diff_alpha(cfg: &HeckeConfig, k: C64, order: usize) -> Result<TDiffAlpha> {
    if cfg.genus() != 2 {
        return Err(Error::UnsupportedConfiguration("T_alpha expansion is provided for g = 2".into()));
    }
    let ip = Interpolator::new(cfg, extended_quadratic_basis, 5, 2, 0x7d1f)?;
    let ts: Vec<DiffOperator> = ip.samples.iter().map(|z| t_diff(cfg, z, k, order)).collect::<Result<_>>()?;
    let comps: Vec<DiffOperator> = (0..5)
        .map(|a| {
            let w: Vec<C64> = (0..5).map(|m| ip.winv[(a, m)]).collect();
            DiffOperator::linear_combination(&ts, &w)
        })
        .collect();
    let mut res: f64 = 0.0;
    for z in &ip.held_out {
        let direct = t_diff(cfg, z, k, 0)?.values();
        let b = ip.basis_at(cfg, z);
        let fit = DiffOperator::linear_combination(&comps, &b).values();
        let sc = direct.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        for (d, f) in direct.iter().zip(&fit) {
            res = res.max((d - f).norm() / sc);
        }
    }
    let polar = comps[3..].to_vec();
    let ops = comps[..3].to_vec();
    Ok(TDiffAlpha { ops, polar, held_out_residual: res, interpolator: ip })
}

/// ℓ^m as a jet of the given order.
pub fn monomial(ell: &[C64], exps: &[u32], order: usize) -> Jet {
    let v = Jet::variables(&JetSpace::get(ell.len(), order), ell);
    let mut out = v[0].scale(C64::new(0.0, 0.0)).add_const(C64::new(1.0, 0.0));
    for (x, &e) in v.iter().zip(exps) {
        for _ in 0..e {
            out = &out * x;
        }
    }
    out
}

/// Monomial test functions of total degree ≤ 2 in the first coordinates.
pub fn default_monomials(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut push = |pairs: &[(usize, u32)]| {
        let mut e = vec![0u32; n];
        for &(i, p) in pairs {
            e[i] += p;
        }
        out.push(e);
    };
    push(&[]);
    push(&[(0, 1)]);
    push(&[(1, 1)]);
    push(&[(0, 2)]);
    push(&[(0, 1), (1, 1)]);
    push(&[(2, 1), (4, 1)]);
    out
}

/// Π_{i<j} ℓ_ij^{n_ij} as a jet. The SL₂-invariant (weight k) functions
/// have every row sum Σ_j n_ij equal to k.
pub fn pair_product(ell: &[C64], pairs: &[(usize, usize, i32)], order: usize) -> Jet {
    let v = Jet::variables(&JetSpace::get(ell.len(), order), ell);
    let mut out = v[0].scale(C64::new(0.0, 0.0)).add_const(C64::new(1.0, 0.0));
    for &(i, j, p) in pairs {
        out = &out * &(&v[i] - &v[j]).powi(p);
    }
    out
}

/// Invariant test functions at level −2 (every row sum −2).
pub fn invariant_tests(ell: &[C64]) -> Vec<Jet> {
    vec![
        pair_product(ell, &[(0, 1, -2), (2, 3, -2), (4, 5, -2)], 4),
        pair_product(ell, &[(0, 2, -2), (1, 4, -2), (3, 5, -2)], 4),
        pair_product(ell, &[(0, 1, -1), (1, 2, -1), (2, 0, -1), (3, 4, -1), (4, 5, -1), (5, 3, -1)], 4),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutatorResult {
    pub alpha: usize,
    pub beta: usize,
    pub max_residual: f64,
    pub per_test: Vec<f64>,
}

/// |[T_α, T_β]f| / (|T_αT_βf| + |T_βT_αf| + ε) for each test function
/// (order-4 jets; operators with order-2 coefficients).
pub fn commutator_check(ta: &DiffOperator, tb: &DiffOperator, tests: &[Jet]) -> Result<CommutatorResult> {
    let mut per = Vec::with_capacity(tests.len());
    for f in tests {
        if f.order() < 4 {
            return Err(Error::JetOrderTooLow { have: f.order(), need: 4 });
        }
        if ta.coefficient_order() < 2 || tb.coefficient_order() < 2 {
            return Err(Error::JetOrderTooLow { have: ta.coefficient_order().min(tb.coefficient_order()), need: 2 });
        }
        let ab = ta.apply(&tb.apply(f)?)?.value();
        let ba = tb.apply(&ta.apply(f)?)?.value();
        per.push((ab - ba).norm() / (ab.norm() + ba.norm() + 1e-300));
    }
    let max_residual = per.iter().cloned().fold(0.0, f64::max);
    Ok(CommutatorResult { alpha: 0, beta: 0, max_residual, per_test: per })
}

/// Laurent windows of every T^diff coefficient (order 0) around a site.
pub fn t_diff_laurent(cfg: &HeckeConfig, center: &Site, k: C64, radius: f64) -> Result<Vec<LaurentWindow>> {
    let f = |x: C64| -> Result<Vec<C64>> {
        let zd = cfg.point_data_near(center, x)?;
        Ok(t_diff_at(cfg, &zd, k, 0)?.values())
    };
    laurent::probe_many(&f, center.x(), radius, laurent::DEFAULT_SAMPLES)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoleReport {
    /// c_{−2} of the scalar coefficient.
    pub scalar_c_minus2: C64,
    /// max |c_{−2}|, |c_{−1}| over all coefficients, relative to max |c_0|.
    pub max_singular_relative: f64,
    pub max_c0: f64,
    pub fit_error: f64,
}

pub fn pole_report(cfg: &HeckeConfig, center: &Site, k: C64) -> Result<PoleReport> {
    let w = t_diff_laurent(cfg, center, k, cfg.probe_radius(center.x()))?;
    let max_c0 = w.iter().map(|l| l.c(0).norm()).fold(0.0, f64::max);
    let sing = w.iter().map(|l| l.c(-2).norm().max(l.c(-1).norm())).fold(0.0, f64::max);
    Ok(PoleReport {
        scalar_c_minus2: w.last().map(|l| l.c(-2)).unwrap_or_default(),
        max_singular_relative: sing / max_c0.max(1e-300),
        max_c0,
        fit_error: w.iter().map(|l| l.error_estimate).fold(0.0, f64::max),
    })
}

/// Λ_i: Σ_j c_j(∂_{ℓ_j} − k/ℓ_j) + scalar, plus an sl₂ part acting on the
/// representation.
#[derive(Clone, Debug)]
pub struct LambdaOperator<T> {
    pub i: usize,
    pub k: C64,
    /// The point ℓ the operator was built at.
    pub ell: Vec<C64>,
    pub shifted: Vec<T>,
    pub scalar: T,
    pub sl2: SL2Vector<T>,
}

pub fn lambda_operator_generic<T: Scalar>(cfg: &HeckeConfig, ell: &[T], dd: &DenData<T>, i: usize, k: C64) -> LambdaOperator<T> {
    let n = cfg.n();
    let zero = ell[0].zero_like();
    let pi = &cfg.sites[i].omega;
    // d0[l] = Den|_{ℓ_l = 0, P_l → P_i} / Den
    let d0: Vec<T> = (0..n).map(|l| dd.ratios(l, pi)[0].clone()).collect();
    let inv_li = ell[i].one_like() / ell[i].clone();
    let shifted: Vec<T> = (0..n)
        .map(|j| {
            let mut c = zero.clone();
            if j != i {
                c = (ell[j].clone() - ell[i].clone()) * ell[j].clone() * inv_li.clone();
                c = c.scaled(cfg.r[i][j]);
            }
            for l in (0..n).filter(|&l| l != j) {
                let ljl = ell[j].clone() - ell[l].clone();
                c = c - (ljl.clone() * ljl * inv_li.clone() * d0[l].clone()).scaled(cfg.r[l][j]);
            }
            c
        })
        .collect();
    let mut scalar = zero.clone();
    for j in 0..n {
        for l in (0..n).filter(|&l| l != j) {
            let t = ell[j].clone() * ell[j].clone() * inv_li.clone() / ell[l].clone() * d0[j].clone();
            scalar = scalar - t.scaled(k * cfg.r[j][l]);
        }
    }
    let mut sl2 = SL2Vector::new(inv_li.scaled(k), zero.lift(-0.5 * k), zero.clone());
    for j in 0..n {
        let c = -(ell[j].clone() * inv_li.clone() * d0[j].clone());
        let v = SL2Vector::new(ell[j].one_like() / ell[j].clone(), zero.lift(C64::new(-1.0, 0.0)), -ell[j].clone());
        sl2 = sl2.add(&v.mul(&c).scaled(k));
    }
    LambdaOperator { i, k, ell: ell.iter().map(|l| l.lead()).collect(), shifted, scalar, sl2 }
}

pub fn lambda_operator(cfg: &HeckeConfig, i: usize, k: C64) -> Result<LambdaOperator<C64>> {
    let dd = cfg.den_data()?;
    Ok(lambda_operator_generic(cfg, &cfg.ell, &dd, i, k))
}

pub fn lambda_operator_jet(cfg: &HeckeConfig, i: usize, k: C64, order: usize) -> Result<LambdaOperator<Jet>> {
    cfg.require_den()?;
    let ell = cfg.ell_jets(order);
    let dd = DenData::new(&cfg.omegas(), &ell)?;
    Ok(lambda_operator_generic(cfg, &ell, &dd, i, k))
}

impl LambdaOperator<Jet> {
    /// The scalar (non-sl₂) part applied to f.
    pub fn apply_scalar_part(&self, f: &Jet) -> Result<Jet> {
        if f.order() < 1 {
            return Err(Error::JetOrderTooLow { have: f.order(), need: 1 });
        }
        let o = (f.order() - 1).min(self.scalar.order());
        let ft = f.truncate(o);
        let mut out = self.scalar.truncate(o) * ft.clone();
        let vars = Jet::variables(&JetSpace::get(f.nvars(), o), &self.ell);
        for (j, c) in self.shifted.iter().enumerate() {
            let shift = ft.clone() * vars[j].recip().scale(self.k);
            out += c.truncate(o) * (f.derivative(j)?.truncate(o) - shift);
        }
        Ok(out)
    }

}
