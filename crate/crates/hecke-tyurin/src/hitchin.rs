//! The classical side: phase points (ℓ, λ) on the moment-map zero level,
//! the Higgs field A(ℓ,λ|z), the quadratic differential H = tr A² and its
//! expansion into Hamiltonians H_α.
//!
//! sl₂ vectors are stored in the (e, h, f) basis with the invariant form
//! ⟨e,f⟩ = 1, ⟨h,h⟩ = 2, so tr ρ(x)² = 2x_h² + 2x_e x_f.

use crate::curve::Site;
use crate::error::{Error, Result};
use crate::hecke::{DenData, HeckeConfig, PointData};
use crate::numeric::jet::{Jet, JetSpace, Scalar};
use crate::numeric::linalg::{kernel_basis, CMatrix};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub ell: Vec<C64>,
    pub lam: Vec<C64>,
}

impl PhasePoint {
    /// max_α |Σ λ_i ℓ_i^α| relative to Σ |λ_i ℓ_i^α|.
    pub fn constraint_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in 0..3 {
            let terms: Vec<C64> = self.ell.iter().zip(&self.lam).map(|(l, m)| m * l.powu(p)).collect();
            let s: C64 = terms.iter().sum();
            let sc: f64 = terms.iter().map(|t| t.norm()).sum::<f64>().max(1e-300);
            worst = worst.max(s.norm() / sc);
        }
        worst
    }

    pub fn scaled_lambda(&self, c: f64) -> PhasePoint {
        PhasePoint { ell: self.ell.clone(), lam: self.lam.iter().map(|l| l * c).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SL2Vector<T> {
    pub e: T,
    pub h: T,
    pub f: T,
}

impl<T: Scalar> SL2Vector<T> {
    pub fn new(e: T, h: T, f: T) -> Self {
        SL2Vector { e, h, f }
    }

    pub fn get(&self, c: usize) -> &T {
        match c {
            0 => &self.e,
            1 => &self.h,
            _ => &self.f,
        }
    }

    pub fn zero_like(t: &T) -> Self {
        SL2Vector { e: t.zero_like(), h: t.zero_like(), f: t.zero_like() }
    }

    /// ⟨x, y⟩ = x_e y_f + x_f y_e + 2 x_h y_h.
    pub fn pair(&self, o: &Self) -> T {
        let two = self.h.lift(C64::new(2.0, 0.0));
        self.e.clone() * o.f.clone() + self.f.clone() * o.e.clone() + two * self.h.clone() * o.h.clone()
    }

    pub fn tr_sq(&self) -> T {
        self.pair(self)
    }

    pub fn add(&self, o: &Self) -> Self {
        SL2Vector { e: self.e.clone() + o.e.clone(), h: self.h.clone() + o.h.clone(), f: self.f.clone() + o.f.clone() }
    }

    pub fn mul(&self, s: &T) -> Self {
        SL2Vector { e: self.e.clone() * s.clone(), h: self.h.clone() * s.clone(), f: self.f.clone() * s.clone() }
    }

    pub fn scaled(&self, s: C64) -> Self {
        SL2Vector { e: self.e.scaled(s), h: self.h.scaled(s), f: self.f.scaled(s) }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SL2Vector<U> {
        SL2Vector { e: f(&self.e), h: f(&self.h), f: f(&self.f) }
    }
}

impl SL2Vector<C64> {
    pub fn norm(&self) -> f64 {
        (self.e.norm_sqr() + self.h.norm_sqr() + self.f.norm_sqr()).sqrt()
    }
}

/// X(ℓ) = −e + ℓh + ℓ²f, the residue direction at a point with line ℓ.
pub fn residue_direction<T: Scalar>(l: &T) -> SL2Vector<T> {
    SL2Vector { e: l.lift(C64::new(-1.0, 0.0)), h: l.clone(), f: l.clone() * l.clone() }
}

/// B_j(z)/Den = (D2 e + ½D1 h − D0 f)/Den with the D's taken at row j ← z.
pub fn bracket<T: Scalar>(d: &[T; 3]) -> SL2Vector<T> {
    SL2Vector { e: d[2].clone(), h: d[1].scaled(C64::new(0.5, 0.0)), f: -d[0].clone() }
}

/// The three moment components Σ λ_i ℓ_i^α, α = 0, 1, 2.
pub fn moment_components<T: Scalar>(ell: &[T], lam: &[T]) -> [T; 3] {
    let z = lam[0].zero_like();
    let mut out = [z.clone(), z.clone(), z];
    for (l, m) in ell.iter().zip(lam) {
        out[0] = out[0].clone() + m.clone();
        out[1] = out[1].clone() + m.clone() * l.clone();
        out[2] = out[2].clone() + m.clone() * l.clone() * l.clone();
    }
    out
}

/// Draw λ on the constraint surface for the ℓ of `cfg`.
pub fn sample_phase_point(cfg: &HeckeConfig, seed: u64) -> Result<PhasePoint> {
    let n = cfg.n();
    let m = CMatrix::from_fn(3, n, |p, i| cfg.ell[i].powu(p as u32));
    let k = kernel_basis(&m, 1e-9);
    if k.dim() != n - 3 {
        return Err(Error::DegenerateConstraints(k.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lam = vec![C64::default(); n];
    for v in &k.basis {
        let c = C64::new(crate::hecke::normal(&mut rng), crate::hecke::normal(&mut rng));
        for (l, x) in lam.iter_mut().zip(v) {
            *l += c * x;
        }
    }
    Ok(PhasePoint { ell: cfg.ell.clone(), lam })
}

/// A for any scalar type, split into the two sums: A1 = Σ λ_i X_i ω^{(P_i)}(z)
/// and A2 = (1/Den) Σ_{i≠j} λ_i ℓ_ij² ω^{(P_i)}(P_j) B_j(z).
pub fn higgs_parts<T: Scalar>(
    cfg: &HeckeConfig,
    ell: &[T],
    lam: &[T],
    dd: &DenData<T>,
    zd: &PointData,
) -> (SL2Vector<T>, SL2Vector<T>) {
    let n = cfg.n();
    let mut a1 = SL2Vector::zero_like(&lam[0]);
    for i in 0..n {
        a1 = a1.add(&residue_direction(&ell[i]).mul(&lam[i].scaled(zd.wz[i])));
    }
    let mut a2 = SL2Vector::zero_like(&lam[0]);
    for j in 0..n {
        let mut c = lam[0].zero_like();
        for i in (0..n).filter(|&i| i != j) {
            let lij = ell[i].clone() - ell[j].clone();
            c = c + lam[i].clone() * lij.clone() * lij.scaled(cfg.r[j][i]);
        }
        a2 = a2.add(&bracket(&dd.ratios(j, &zd.site.omega)).mul(&c));
    }
    (a1, a2)
}

pub fn higgs_generic<T: Scalar>(cfg: &HeckeConfig, ell: &[T], lam: &[T], dd: &DenData<T>, zd: &PointData) -> SL2Vector<T> {
    let (a1, a2) = higgs_parts(cfg, ell, lam, dd, zd);
    a1.add(&a2)
}

fn check_ell(cfg: &HeckeConfig, pp: &PhasePoint) -> Result<HeckeConfig> {
    if pp.ell.len() != cfg.n() || pp.lam.len() != cfg.n() {
        return Err(Error::Invalid(format!("phase point must have {} entries", cfg.n())));
    }
    let c = if pp.ell == cfg.ell { cfg.clone() } else { cfg.with_ell(pp.ell.clone()) };
    c.require_den()?;
    Ok(c)
}

pub fn higgs_a(cfg: &HeckeConfig, pp: &PhasePoint, z: &Site) -> Result<SL2Vector<C64>> {
    let c = check_ell(cfg, pp)?;
    let dd = c.den_data()?;
    Ok(higgs_generic(&c, &pp.ell, &pp.lam, &dd, &c.point_data(z)?))
}

/// H(ℓ,λ|z) = tr ρ(A)², coefficient of (dx)².
pub fn hitchin_h(cfg: &HeckeConfig, pp: &PhasePoint, z: &Site) -> Result<C64> {
    Ok(higgs_a(cfg, pp, z)?.tr_sq())
}

/// H from point data already computed (no re-validation).
pub fn hitchin_h_at(cfg: &HeckeConfig, pp: &PhasePoint, dd: &DenData<C64>, zd: &PointData) -> C64 {
    higgs_generic(cfg, &pp.ell, &pp.lam, dd, zd).tr_sq()
}

/// ν_{kj}(z)/Den: row k of M replaced by ℓ_j^α ω_a(z).
pub fn nu_det_ratio(dd: &DenData<C64>, ell: &[C64], k: usize, j: usize, omega_z: &[C64]) -> C64 {
    let d = dd.ratios(k, omega_z);
    d[0] + d[1] * ell[j] + d[2] * ell[j] * ell[j]
}

/// H = tr ρ(A^reg)² + (2/Den) Σ_{k≠i} λ_iλ_j ℓ_ki² ν_kj(z) ω^{(P_i)}(P_k) ω^{(P_j)}(z)
///     − Σ_{i≠j} λ_iλ_j ℓ_ij² ω^{(P_i)}(z) ω^{(P_j)}(z),
/// with A^reg the Den-weighted sum of A.
pub fn hitchin_h_alt(cfg: &HeckeConfig, pp: &PhasePoint, z: &Site) -> Result<C64> {
    let c = check_ell(cfg, pp)?;
    let dd = c.den_data()?;
    let zd = c.point_data(z)?;
    let (l, lam, n) = (&pp.ell, &pp.lam, c.n());
    let (_, a_reg) = higgs_parts(&c, l, lam, &dd, &zd);
    let mut cross = C64::default();
    for k in 0..n {
        for i in (0..n).filter(|&i| i != k) {
            let lki = l[k] - l[i];
            for j in 0..n {
                cross += lam[i] * lam[j] * lki * lki * nu_det_ratio(&dd, l, k, j, &z.omega) * c.r[k][i] * zd.wz[j];
            }
        }
    }
    let mut diag = C64::default();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let lij = l[i] - l[j];
            diag += lam[i] * lam[j] * lij * lij * zd.wz[i] * zd.wz[j];
        }
    }
    Ok(a_reg.tr_sq() + 2.0 * cross - diag)
}

/// Holomorphic quadratic differentials x^j (dx)²/y², j = 0, 1, 2 (g = 2).
pub fn quadratic_basis(z: &Site) -> Vec<C64> {
    let y2 = z.y * z.y;
    (0..3).map(|j| z.x().powu(j) / y2).collect()
}

/// Interpolation data for expanding a quadratic differential in a basis:
/// sample sites, the inverse of the basis matrix, and held-out sites.
#[derive(Clone, Debug)]
pub struct Interpolator {
    pub samples: Vec<Site>,
    pub held_out: Vec<Site>,
    /// c = winv · values.
    pub winv: CMatrix,
    pub condition: f64,
    basis: fn(&HeckeConfig, &Site) -> Vec<C64>,
}

/// Condition number above which a sample set is rejected.
pub const MAX_BASIS_CONDITION: f64 = 1e8;

fn holo_basis(_: &HeckeConfig, z: &Site) -> Vec<C64> {
    quadratic_basis(z)
}

impl Interpolator {
    pub fn new(cfg: &HeckeConfig, basis: fn(&HeckeConfig, &Site) -> Vec<C64>, dim: usize, held: usize, seed: u64) -> Result<Interpolator> {
        let mut last = f64::INFINITY;
        for attempt in 0..8 {
            let pts = cfg.generic_points(dim + held, seed.wrapping_add(attempt))?;
            let w = CMatrix::from_rows(&pts[..dim].iter().map(|z| basis(cfg, z)).collect::<Vec<_>>());
            let cond = w.condition_number();
            last = cond;
            if cond <= MAX_BASIS_CONDITION {
                let winv = w.inverse()?;
                return Ok(Interpolator { samples: pts[..dim].to_vec(), held_out: pts[dim..].to_vec(), winv, condition: cond, basis });
            }
        }
        Err(Error::IllConditionedBasis(last))
    }

    pub fn holomorphic(cfg: &HeckeConfig, seed: u64) -> Result<Interpolator> {
        Interpolator::new(cfg, holo_basis, 3, 3, seed)
    }

    pub fn dim(&self) -> usize {
        self.samples.len()
    }

    pub fn basis_at(&self, cfg: &HeckeConfig, z: &Site) -> Vec<C64> {
        (self.basis)(cfg, z)
    }

    /// Coefficients from values at the sample sites.
    pub fn coefficients<T: Scalar>(&self, values: &[T]) -> Vec<T> {
        (0..self.dim())
            .map(|a| {
                let mut acc = values[0].zero_like();
                for (m, v) in values.iter().enumerate() {
                    acc = acc + v.scaled(self.winv[(a, m)]);
                }
                acc
            })
            .collect()
    }

    pub fn evaluate(&self, cfg: &HeckeConfig, coeffs: &[C64], z: &Site) -> C64 {
        self.basis_at(cfg, z).iter().zip(coeffs).map(|(b, c)| b * c).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hamiltonians {
    pub values: Vec<C64>,
    /// Max relative mismatch at the held-out points.
    pub held_out_residual: f64,
}

pub fn extract_hamiltonians(cfg: &HeckeConfig, pp: &PhasePoint) -> Result<Hamiltonians> {
    extract_hamiltonians_with(cfg, pp, &Interpolator::holomorphic(cfg, 0x4a11)?)
}

pub fn extract_hamiltonians_with(cfg: &HeckeConfig, pp: &PhasePoint, ip: &Interpolator) -> Result<Hamiltonians> {
    if cfg.genus() != 2 {
        return Err(Error::UnsupportedConfiguration("Hamiltonian extraction is provided for g = 2".into()));
    }
    let c = check_ell(cfg, pp)?;
    let dd = c.den_data()?;
    let hs: Vec<C64> = ip.samples.iter().map(|z| Ok(hitchin_h_at(&c, pp, &dd, &c.point_data(z)?))).collect::<Result<_>>()?;
    let values = ip.coefficients(&hs);
    let mut res: f64 = 0.0;
    for z in &ip.held_out {
        let direct = hitchin_h_at(&c, pp, &dd, &c.point_data(z)?);
        let fit = ip.evaluate(&c, &values, z);
        res = res.max((direct - fit).norm() / direct.norm().max(fit.norm()).max(1e-300));
    }
    Ok(Hamiltonians { values, held_out_residual: res })
}

/// H_α as order-1 jets in the 2n variables (ℓ_1..ℓ_n, λ_1..λ_n).
pub fn hamiltonian_jets(cfg: &HeckeConfig, pp: &PhasePoint, ip: &Interpolator) -> Result<Vec<Jet>> {
    let c = check_ell(cfg, pp)?;
    let n = c.n();
    let space = JetSpace::get(2 * n, 1);
    let mut point = pp.ell.clone();
    point.extend_from_slice(&pp.lam);
    let vars = Jet::variables(&space, &point);
    let (ell, lam) = vars.split_at(n);
    let dd = DenData::new(&c.omegas(), ell)?;
    let hs: Vec<Jet> = ip
        .samples
        .iter()
        .map(|z| Ok(higgs_generic(&c, ell, lam, &dd, &c.point_data(z)?).tr_sq()))
        .collect::<Result<_>>()?;
    Ok(ip.coefficients(&hs))
}

/// Moment components as order-1 jets in (ℓ, λ).
pub fn moment_jets(pp: &PhasePoint) -> [Jet; 3] {
    let n = pp.ell.len();
    let mut point = pp.ell.clone();
    point.extend_from_slice(&pp.lam);
    let vars = Jet::variables(&JetSpace::get(2 * n, 1), &point);
    moment_components(&vars[..n], &vars[n..])
}

/// {F, G} = Σ_i (∂F/∂λ_i ∂G/∂ℓ_i − ∂F/∂ℓ_i ∂G/∂λ_i), for jets in the
/// variables (ℓ_1..ℓ_n, λ_1..λ_n); {λ_i, ℓ_j} = δ_ij.
pub fn poisson_bracket(f: &Jet, g: &Jet) -> C64 {
    let gf = f.gradient();
    let gg = g.gradient();
    let n = gf.len() / 2;
    (0..n).map(|i| gf[n + i] * gg[i] - gf[i] * gg[n + i]).sum()
}

/// Normalized bracket |{F,G}| / (‖∇F‖‖∇G‖).
pub fn normalized_bracket(f: &Jet, g: &Jet) -> f64 {
    let nf = f.gradient().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ng = g.gradient().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    poisson_bracket(f, g).norm() / (nf * ng).max(1e-300)
}

/// (ℓ, λ) ↦ ((aℓ+b)/(cℓ+d), λ(cℓ+d)²) for a unimodular [[a, b], [c, d]].
///
/// λ is a cotangent coordinate, so it transforms by the inverse Jacobian
/// dℓ/dℓ' = (cℓ+d)²; this keeps the moment-map zero level invariant.
pub fn sl2_action(m: [[C64; 2]; 2], pp: &PhasePoint) -> Result<PhasePoint> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if (det - 1.0).norm() > 1e-10 {
        return Err(Error::Invalid(format!("matrix is not unimodular (det = {det})")));
    }
    let mut ell = Vec::with_capacity(pp.ell.len());
    let mut lam = Vec::with_capacity(pp.ell.len());
    for (i, (l, la)) in pp.ell.iter().zip(&pp.lam).enumerate() {
        let den = m[1][0] * l + m[1][1];
        if den.norm() < 1e-12 * (1.0 + l.norm()) {
            return Err(Error::PoleHit(i));
        }
        ell.push((m[0][0] * l + m[0][1]) / den);
        lam.push(la * den * den);
    }
    Ok(PhasePoint { ell, lam })
}

/// A random unimodular matrix with entries of order one.
pub fn random_unimodular<R: rand::Rng>(rng: &mut R) -> [[C64; 2]; 2] {
    let mut c = || C64::new(crate::hecke::normal(rng), crate::hecke::normal(rng)) * 0.5;
    let (a, b, cc) = (c() + 1.0, c(), c());
    // d from ad − bc = 1
    let d = (1.0 + b * cc) / a;
    [[a, b], [cc, d]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_matches_trace() {
        let x = SL2Vector::new(C64::new(1.0, 2.0), C64::new(0.5, 0.0), C64::new(-1.0, 1.0));
        // matrix [[h, e], [f, -h]]
        let t = 2.0 * x.h * x.h + 2.0 * x.e * x.f;
        assert!((x.tr_sq() - t).norm() < 1e-15);
        let a = residue_direction(&C64::new(0.3, 0.1));
        let b = residue_direction(&C64::new(-1.2, 0.4));
        let l = C64::new(0.3, 0.1) - C64::new(-1.2, 0.4);
        assert!((a.pair(&b) + l * l).norm() < 1e-14);
    }

    #[test]
    fn bracket_of_coordinates() {
        let pp = PhasePoint { ell: vec![C64::new(0.2, 0.1), C64::new(1.0, 0.0)], lam: vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)] };
        let mut point = pp.ell.clone();
        point.extend_from_slice(&pp.lam);
        let v = Jet::variables(&JetSpace::get(4, 1), &point);
        assert_eq!(poisson_bracket(&v[2], &v[0]), C64::new(1.0, 0.0));
        assert_eq!(poisson_bracket(&v[2], &v[1]), C64::new(0.0, 0.0));
        assert_eq!(poisson_bracket(&v[0], &v[1]), C64::new(0.0, 0.0));
    }
}
