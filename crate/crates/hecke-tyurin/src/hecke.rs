//! The Hecke data (P, ℓ): the determinant Den and the linear systems built
//! around it.
//!
//! M(P,ℓ) has rows indexed by i and columns by (a, α), a outer and α inner:
//! M_{i,3a+α} = ω_a(P_i)·ℓ_i^α. Den = det M.

use crate::curve::{PeriodData, Site, SurfacePoint};
use crate::error::{Error, Result};
use crate::green::KernelContext;
use crate::numeric::jet::{Jet, JetSpace, Scalar};
use crate::numeric::linalg::{det_generic, invert, kernel_basis, CMatrix};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Sign picked up by each 3×3 Vandermonde block when det M is expanded
/// into the symmetrized sum: det[1, ℓ, ℓ²]_{i<j<k} = −ℓ_ij ℓ_ik ℓ_jk.
pub const DEN_SIGN_PER_BLOCK: f64 = -1.0;

/// Global sign s with den_det = s · den_sum at genus g.
pub fn den_sign(g: usize) -> f64 {
    DEN_SIGN_PER_BLOCK.powi(g as i32)
}

/// Relative |Den| below which Den counts as zero.
pub const DEN_ZERO_REL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct HeckeConfig {
    pub kernel: KernelContext,
    pub sites: Vec<Site>,
    pub ell: Vec<C64>,
    pub den: C64,
    /// r[j][i] = r^{(P_j)}(P_i) = ω^{(P_i)}(P_j); zero on the diagonal.
    pub r: Vec<Vec<C64>>,
    /// gp[j][i] = G(P_j, P_i)dP_j; zero on the diagonal.
    pub gp: Vec<Vec<C64>>,
    /// r_p0[j] = r^{(P_j)}(P_0).
    pub r_p0: Vec<C64>,
}

/// Kernel values at a probe point z that do not depend on ℓ.
#[derive(Clone, Debug)]
pub struct PointData {
    pub site: Site,
    /// ω^{(P_i)}(z).
    pub wz: Vec<C64>,
    /// ω^{(P_0)}(z).
    pub w0: C64,
    /// G(z, P_i) = ω^{(P_i)}(z) − ω^{(P_0)}(z).
    pub gz: Vec<C64>,
    /// G(P_i, z)dP_i.
    pub gp: Vec<C64>,
    /// d_z[G(P_i, z)dP_i].
    pub dgp: Vec<C64>,
}

/// Coefficients of Den as a polynomial in ℓ_j: Den = D0 + D1 ℓ_j + D2 ℓ_j².
#[derive(Clone, Debug)]
pub struct DenCoefficients<T> {
    pub j: usize,
    pub d: [T; 3],
}

impl<T: Scalar> DenCoefficients<T> {
    pub fn reconstruct(&self, ell_j: &T) -> T {
        self.d[0].clone() + self.d[1].clone() * ell_j.clone() + self.d[2].clone() * ell_j.clone() * ell_j.clone()
    }
}

/// M(P,ℓ) for any scalar type of ℓ.
pub fn m_matrix<T: Scalar>(omegas: &[Vec<C64>], ell: &[T]) -> Vec<Vec<T>> {
    let g = omegas[0].len();
    omegas
        .iter()
        .zip(ell)
        .map(|(om, l)| {
            let powers = [l.one_like(), l.clone(), l.clone() * l.clone()];
            let mut row = Vec::with_capacity(3 * g);
            for w in om.iter() {
                for p in &powers {
                    row.push(p.scaled(*w));
                }
            }
            row
        })
        .collect()
}

/// Den and M⁻¹ at one ℓ. D_k^{(j)}(z) = Den·Σ_a ω_a(z) M⁻¹[3a+k][j].
#[derive(Clone, Debug)]
pub struct DenData<T> {
    pub den: T,
    pub minv: Vec<Vec<T>>,
}

impl<T: Scalar> DenData<T> {
    pub fn new(omegas: &[Vec<C64>], ell: &[T]) -> Result<DenData<T>> {
        let m = m_matrix(omegas, ell);
        let den = det_generic(m.clone());
        let minv = invert(&m, 0.0)?;
        Ok(DenData { den, minv })
    }

    /// D_k^{(j)}(z)/Den for k = 0, 1, 2, with ω(z) given.
    pub fn ratios(&self, j: usize, omega_z: &[C64]) -> [T; 3] {
        let one = self.den.one_like();
        let mk = |k: usize| -> T {
            let mut acc = one.zero_like();
            for (a, w) in omega_z.iter().enumerate() {
                acc = acc + self.minv[3 * a + k][j].scaled(*w);
            }
            acc
        };
        [mk(0), mk(1), mk(2)]
    }
}

fn fmt_indices(ell: &[C64], tol: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..ell.len() {
        for j in i + 1..ell.len() {
            if (ell[i] - ell[j]).norm() <= tol {
                out.push(i);
                out.push(j);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

impl HeckeConfig {
    pub fn new(pd: Arc<PeriodData>, points: &[SurfacePoint], p0: SurfacePoint, ell: Vec<C64>) -> Result<HeckeConfig> {
        let g = pd.genus();
        if points.len() != 3 * g {
            return Err(Error::Invalid(format!("expected 3g = {} points, got {}", 3 * g, points.len())));
        }
        if ell.len() != 3 * g {
            return Err(Error::Invalid(format!("expected 3g = {} values of l, got {}", 3 * g, ell.len())));
        }
        for (i, l) in ell.iter().enumerate() {
            if !(l.re.is_finite() && l.im.is_finite()) {
                return Err(Error::Invalid(format!("l_{i} is not finite")));
            }
            if l.norm() == 0.0 {
                return Err(Error::ZeroEll(i));
            }
        }
        let sc = pd.scale();
        for i in 0..points.len() {
            if (points[i].x - p0.x).norm() < 1e-8 * sc {
                return Err(Error::Invalid(format!("P_{i} coincides with P0")));
            }
            for j in i + 1..points.len() {
                if (points[i].x - points[j].x).norm() < 1e-8 * sc {
                    return Err(Error::Invalid(format!("P_{i} and P_{j} share an x-coordinate")));
                }
            }
        }
        let kernel = KernelContext::new(pd.clone(), p0)?;
        let sites: Vec<Site> = points.iter().map(|p| pd.site(*p)).collect::<Result<_>>()?;
        HeckeConfig::from_sites(kernel, sites, ell)
    }

    pub fn from_sites(kernel: KernelContext, sites: Vec<Site>, ell: Vec<C64>) -> Result<HeckeConfig> {
        let n = sites.len();
        let mut r = vec![vec![C64::default(); n]; n];
        let mut gp = vec![vec![C64::default(); n]; n];
        let mut r_p0 = vec![C64::default(); n];
        for j in 0..n {
            let r0 = kernel.r_kernel(&sites[j], &kernel.p0)?;
            r_p0[j] = r0;
            for i in 0..n {
                if i != j {
                    r[j][i] = kernel.r_kernel(&sites[j], &sites[i])?;
                    gp[j][i] = r[j][i] - r0;
                }
            }
        }
        let omegas: Vec<Vec<C64>> = sites.iter().map(|s| s.omega.clone()).collect();
        let den = det_generic(m_matrix(&omegas, &ell));
        Ok(HeckeConfig { kernel, sites, ell, den, r, gp, r_p0 })
    }

    /// Same points with new ℓ; kernel data is reused.
    pub fn with_ell(&self, ell: Vec<C64>) -> HeckeConfig {
        assert_eq!(ell.len(), self.n());
        let den = det_generic(m_matrix(&self.omegas(), &ell));
        HeckeConfig { ell, den, ..self.clone() }
    }

    /// Random configuration: points off the cuts, pairwise separated, ℓ
    /// complex Gaussian.
    pub fn random<R: Rng>(pd: Arc<PeriodData>, rng: &mut R) -> Result<HeckeConfig> {
        let g = pd.genus();
        let pts = random_points(&pd, 3 * g + 1, rng);
        let ell: Vec<C64> = (0..3 * g).map(|_| C64::new(normal(rng), normal(rng))).collect();
        HeckeConfig::new(pd, &pts[1..], pts[0], ell)
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn point_data(&self, z: &Site) -> Result<PointData> {
        let k = &self.kernel;
        let w0 = k.omega_kernel(&k.p0, z)?;
        let n = self.n();
        let (mut wz, mut gz, mut gp, mut dgp) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (i, p) in self.sites.iter().enumerate() {
            let w = k.omega_kernel(p, z)?;
            wz.push(w);
            gz.push(w - w0);
            let lt = k.log_theta(p, z)?;
            let r: C64 = lt.grad.iter().zip(&p.omega).map(|(a, b)| a * b).sum();
            gp.push(r - self.r_p0[i]);
            let mut h = C64::default();
            for (a, pa) in p.omega.iter().enumerate() {
                for (b, zb) in z.omega.iter().enumerate() {
                    h += pa * lt.hess[a][b] * zb;
                }
            }
            dgp.push(-h);
        }
        Ok(PointData { site: z.clone(), wz, w0, gz, gp, dgp })
    }

    /// Point data at x, continued from the site `near` (used by probes).
    pub fn point_data_near(&self, near: &Site, x: C64) -> Result<PointData> {
        self.point_data(&self.pd().site_near(near, x)?)
    }

    /// Minimum distance from x to branch points, the P_i and P_0.
    pub fn clearance(&self, x: C64) -> f64 {
        let mut d = self.pd().model.nearest_branch_distance(x);
        for s in self.sites.iter().chain(std::iter::once(&self.kernel.p0)) {
            let e = (s.x() - x).norm();
            if e > 0.0 {
                d = d.min(e);
            }
        }
        d
    }

    /// Laurent probe radius at a special point: a quarter of its clearance,
    /// capped at 0.01·scale.
    pub fn probe_radius(&self, x: C64) -> f64 {
        (0.25 * self.clearance(x)).min(0.01 * self.pd().scale())
    }

    /// Generic probe points z: at least 0.05·scale from branch points, the
    /// P_i and P_0, deterministic in the seed.
    pub fn generic_points(&self, count: usize, seed: u64) -> Result<Vec<Site>> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sc = self.pd().scale();
        let mut out: Vec<Site> = Vec::new();
        while out.len() < count {
            let cand = random_points(self.pd(), 1, &mut rng)[0];
            // clearance skips exact hits, so coincidence with a site is tested on its own
            let taken = self.sites.iter().chain(std::iter::once(&self.kernel.p0)).chain(&out).any(|s| (s.x() - cand.x).norm() < 0.05 * sc);
            if taken || self.clearance(cand.x) < 0.05 * sc {
                continue;
            }
            out.push(self.pd().site(cand)?);
        }
        Ok(out)
    }

    pub fn genus(&self) -> usize {
        self.kernel.genus()
    }

    pub fn pd(&self) -> &Arc<PeriodData> {
        &self.kernel.pd
    }

    pub fn omegas(&self) -> Vec<Vec<C64>> {
        self.sites.iter().map(|s| s.omega.clone()).collect()
    }

    pub fn m(&self) -> CMatrix {
        CMatrix::from_rows(&m_matrix(&self.omegas(), &self.ell))
    }

    /// Hadamard bound of M, the natural scale of Den.
    pub fn den_scale(&self) -> f64 {
        let m = self.m();
        (0..m.rows).map(|i| m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).product()
    }

    pub fn den_relative(&self) -> f64 {
        self.den.norm() / self.den_scale()
    }

    pub fn den_is_zero(&self) -> bool {
        self.den_relative() < DEN_ZERO_REL
    }

    pub fn require_den(&self) -> Result<()> {
        if self.den_is_zero() {
            let spread = self.ell.iter().map(|l| l.norm()).fold(1.0, f64::max);
            return Err(Error::DenZero { value: self.den.norm(), indices: fmt_indices(&self.ell, 1e-8 * spread) });
        }
        Ok(())
    }

    pub fn den_data(&self) -> Result<DenData<C64>> {
        self.require_den()?;
        DenData::new(&self.omegas(), &self.ell)
    }

    /// Den and M⁻¹ as jets of the given order in the 3g variables ℓ.
    pub fn den_data_jet(&self, order: usize) -> Result<DenData<Jet>> {
        self.require_den()?;
        let space = JetSpace::get(self.n(), order);
        let ell = Jet::variables(&space, &self.ell);
        DenData::new(&self.omegas(), &ell)
    }

    pub fn ell_jets(&self, order: usize) -> Vec<Jet> {
        Jet::variables(&JetSpace::get(self.n(), order), &self.ell)
    }
}

/// Standard normal draw (Box-Muller).
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// `count` points on random sheets, at least 0.08·scale from each other
/// and 0.1·scale from branch points and cuts.
pub fn random_points<R: Rng>(pd: &PeriodData, count: usize, rng: &mut R) -> Vec<SurfacePoint> {
    random_points_in(pd, count, rng, None)
}

/// Rectangle [re_lo, re_hi] × [im_lo, im_hi] for point sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

/// As [`random_points`], optionally drawing x uniformly from a box instead
/// of the default bands above and below the branch points.
pub fn random_points_in<R: Rng>(pd: &PeriodData, count: usize, rng: &mut R, region: Option<SamplingBox>) -> Vec<SurfacePoint> {
    let sc = pd.scale();
    let e = &pd.model.sorted;
    let lo = e.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - 0.1 * sc;
    let hi = e.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) + 0.1 * sc;
    let ilo = e.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let ihi = e.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<SurfacePoint> = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(tries < 100_000, "could not place random points");
        let x = match region {
            Some(b) => C64::new(rng.gen_range(b.re[0]..b.re[1]), rng.gen_range(b.im[0]..b.im[1])),
            None => {
                let up = rng.gen_bool(0.5);
                let im = if up { ihi + rng.gen_range(0.1..0.4) * sc } else { ilo - rng.gen_range(0.1..0.4) * sc };
                C64::new(rng.gen_range(lo..hi), im)
            }
        };
        if pd.model.nearest_branch_distance(x) < 0.1 * sc {
            continue;
        }
        if out.iter().any(|p| (p.x - x).norm() < 0.08 * sc) {
            continue;
        }
        let sheet = if rng.gen_bool(0.5) { 1 } else { -1 };
        out.push(SurfacePoint::new(x, sheet));
    }
    out
}

pub fn den_det(cfg: &HeckeConfig) -> C64 {
    cfg.den
}

/// Den with ℓ promoted to jets of the given order.
pub fn den_det_jet(cfg: &HeckeConfig, order: usize) -> Jet {
    det_generic(m_matrix(&cfg.omegas(), &cfg.ell_jets(order)))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// The symmetrized sum over permutations with increasing triples,
/// evaluated literally. Exponential cost; g ≤ 2 only.
pub fn den_sum(cfg: &HeckeConfig) -> Result<C64> {
    let g = cfg.genus();
    if g > 2 {
        return Err(Error::Invalid("den_sum is limited to g <= 2".into()));
    }
    let n = cfg.n();
    let om = cfg.omegas();
    let l = &cfg.ell;
    let mut total = C64::default();
    for p in permutations(n) {
        if !(0..g).all(|a| p[3 * a] < p[3 * a + 1] && p[3 * a + 1] < p[3 * a + 2]) {
            continue;
        }
        let mut term = C64::new(perm_sign(&p), 0.0);
        for a in 0..g {
            let (i, j, k) = (p[3 * a], p[3 * a + 1], p[3 * a + 2]);
            term *= om[i][a] * om[j][a] * om[k][a] * (l[i] - l[j]) * (l[i] - l[k]) * (l[j] - l[k]);
        }
        total += term;
    }
    Ok(total)
}

/// D0, D1, D2 for index j by replacing row j of M with ω_a(·)e_α,
/// optionally with P_j moved to `subst`.
pub fn den_coefficients(cfg: &HeckeConfig, j: usize, subst: Option<&Site>) -> DenCoefficients<C64> {
    den_coefficients_generic(&cfg.omegas(), &cfg.ell, j, subst.map(|s| s.omega.as_slice()))
}

pub fn den_coefficients_generic<T: Scalar>(
    omegas: &[Vec<C64>],
    ell: &[T],
    j: usize,
    subst: Option<&[C64]>,
) -> DenCoefficients<T> {
    let m = m_matrix(omegas, ell);
    let w = subst.unwrap_or(&omegas[j]);
    let g = w.len();
    let one = ell[0].one_like();
    let d = [0, 1, 2].map(|k| {
        let mut mm = m.clone();
        mm[j] = (0..3 * g)
            .map(|c| if c % 3 == k { one.scaled(w[c / 3]) } else { one.zero_like() })
            .collect();
        det_generic(mm)
    });
    DenCoefficients { j, d }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelReport {
    pub kernel_dim: usize,
    pub smallest_singular_value: f64,
    pub singular_values: Vec<f64>,
}

/// Numerical rank threshold relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-9;

/// The stability system in unknowns (λ_1..λ_n, C_e, C_h, C_f):
/// Σ_i λ_i ℓ_i^α ω_a(P_i) = 0 and
/// Σ_{j≠i} λ_j ℓ_ij² r^{(P_j)}(P_i) + C_f − 2ℓ_i C_h − ℓ_i² C_e = 0.
pub fn stability_matrix(cfg: &HeckeConfig) -> CMatrix {
    let n = cfg.n();
    let g = cfg.genus();
    let l = &cfg.ell;
    let mut m = CMatrix::zeros(3 * g + n, n + 3);
    for a in 0..g {
        for al in 0..3 {
            for i in 0..n {
                m[(3 * a + al, i)] = l[i].powu(al as u32) * cfg.sites[i].omega[a];
            }
        }
    }
    for i in 0..n {
        let row = 3 * g + i;
        for j in 0..n {
            if j != i {
                let lij = l[i] - l[j];
                m[(row, j)] = lij * lij * cfg.r[j][i];
            }
        }
        m[(row, n)] = -l[i] * l[i];
        m[(row, n + 1)] = -2.0 * l[i];
        m[(row, n + 2)] = C64::new(1.0, 0.0);
    }
    m
}

pub fn stability_check(cfg: &HeckeConfig) -> KernelReport {
    let k = kernel_basis(&stability_matrix(cfg), RANK_TOL);
    KernelReport { kernel_dim: k.dim(), smallest_singular_value: k.smallest_singular_value, singular_values: k.singular_values }
}

/// Kernel of α ↦ Σ_i α_i ω_a(P_i) ℓ_i^α, i.e. of Mᵀ.
pub fn fiber_rigidity(cfg: &HeckeConfig) -> KernelReport {
    let k = kernel_basis(&cfg.m().transpose(), RANK_TOL);
    KernelReport { kernel_dim: k.dim(), smallest_singular_value: k.smallest_singular_value, singular_values: k.singular_values }
}

/// The g×n matrix [ω_a(P_i)].
pub fn omega_matrix(cfg: &HeckeConfig) -> CMatrix {
    CMatrix::from_fn(cfg.genus(), cfg.n(), |a, i| cfg.sites[i].omega[a])
}

/// Orthogonal projection of a displacement onto Σ_i ω_a(P_i) δP_i = 0.
pub fn project_delta_p(cfg: &HeckeConfig, raw: &[C64]) -> Vec<C64> {
    crate::numeric::linalg::project_onto_kernel(&omega_matrix(cfg), raw, 1e-12)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Variation {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub delta_ell: Vec<C64>,
    /// δℓ from the closed formula in terms of Den restrictions.
    pub delta_ell_closed: Vec<C64>,
    /// Max residual of the three equation families, relative to their
    /// natural scale.
    pub residuals: [f64; 3],
}

/// First-order variation of the Hecke data when the points move by δP
/// (x-displacements) with Σ_i ω_a(P_i) δP_i = 0.
pub fn bundle_variation(cfg: &HeckeConfig, dp: &[C64]) -> Result<Variation> {
    let n = cfg.n();
    let g = cfg.genus();
    if dp.len() != n {
        return Err(Error::Invalid(format!("expected {n} displacements")));
    }
    let om = omega_matrix(cfg);
    let lhs = om.matvec(dp);
    let scale: f64 = (0..g)
        .map(|a| (0..n).map(|i| (om[(a, i)] * dp[i]).norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-300);
    let viol = lhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if viol > 1e-9 * scale && viol > 1e-300 {
        return Err(Error::ConstraintViolated(viol / scale));
    }
    variation_unchecked(cfg, dp)
}

/// The variation formulas applied without the admissibility check; they
/// are linear in δP.
pub fn variation_unchecked(cfg: &HeckeConfig, dp: &[C64]) -> Result<Variation> {
    let n = cfg.n();
    let g = cfg.genus();
    let om = omega_matrix(cfg);
    let scale: f64 = (0..g)
        .map(|a| (0..n).map(|i| (om[(a, i)] * dp[i]).norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-300);
    let dd = cfg.den_data()?;
    let l = &cfg.ell;
    // d0[i][j] = Den|_{ℓ_i=0, P_i→P_j} / Den
    let d0: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| dd.ratios(i, &cfg.sites[j].omega)[0]).collect()).collect();
    let alpha: Vec<C64> = (0..n).map(|i| -l[i] * (0..n).map(|j| dp[j] / l[j] * d0[i][j]).sum::<C64>()).collect();
    let beta: Vec<C64> = (0..n).map(|i| -(alpha[i] + dp[i]) / l[i]).collect();
    let delta_ell: Vec<C64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| cfg.r[j][i] * (l[i] - l[j]) * (alpha[j] + l[i] * beta[j])).sum())
        .collect();
    let delta_ell_closed: Vec<C64> = (0..n)
        .map(|i| {
            let mut s = C64::default();
            for j in (0..n).filter(|&j| j != i) {
                let lij = l[i] - l[j];
                let inner: C64 = (0..n).map(|m| dp[m] / l[m] * d0[j][m]).sum();
                s += cfg.r[j][i] * lij * lij * inner;
                s -= cfg.r[j][i] * lij * l[i] / l[j] * dp[j];
            }
            s
        })
        .collect();
    let fam = |w: &dyn Fn(usize) -> C64| -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..g {
            let s: C64 = (0..n).map(|i| om[(a, i)] * w(i)).sum();
            let sc: f64 = (0..n).map(|i| (om[(a, i)] * w(i)).norm()).sum::<f64>().max(1e-300);
            worst = worst.max(s.norm() / sc.max(scale));
        }
        worst
    };
    let residuals = [
        fam(&|i| alpha[i]),
        fam(&|i| l[i] * alpha[i]),
        fam(&|i| (alpha[i] + dp[i]) / l[i]),
    ];
    Ok(Variation { alpha, beta, delta_ell, delta_ell_closed, residuals })
}

/// J[j][m] = ∂(δℓ_j)/∂(δP_m) from the closed formula, ignoring the
/// constraint on δP.
pub fn delta_ell_jacobian(cfg: &HeckeConfig) -> Result<CMatrix> {
    let n = cfg.n();
    let mut j = CMatrix::zeros(n, n);
    for m in 0..n {
        let mut e = vec![C64::default(); n];
        e[m] = C64::new(1.0, 0.0);
        let v = variation_unchecked(cfg, &e)?;
        for (r, d) in v.delta_ell_closed.iter().enumerate() {
            j[(r, m)] = *d;
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_signs() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(perm_sign(&[1, 0, 2]), -1.0);
        assert_eq!(perm_sign(&[1, 2, 0]), 1.0);
    }

    #[test]
    fn sign_constant() {
        assert_eq!(den_sign(1), -1.0);
        assert_eq!(den_sign(2), 1.0);
    }
}
