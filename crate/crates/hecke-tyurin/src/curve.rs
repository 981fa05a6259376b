//! Hyperelliptic curves y² = ∏(x − e_j): sheets, homology basis, normalized
//! differentials, period matrix, Abel map and the period cache.
//!
//! The reference branch is
//! y_ref(x) = ∏_pairs (x − m)·sqrt(1 − h²/(x − m)²)
//! over the cuts [e1,e2], [e3,e4], … of the sorted branch points, with the
//! principal square root. Each factor has its branch cut exactly on its
//! segment. With an odd number of branch points the last one is joined to
//! infinity by a ray pointing away from the centroid. A point with sheet s
//! has y = s·y_ref(x).

use crate::error::{Error, Result};
use crate::numeric::linalg::CMatrix;
use crate::numeric::quad::{self, Contour, QuadSettings};
use crate::theta::{real_part_eigenvalues, ThetaContext};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub branch_points: Vec<C64>,
    pub genus: usize,
}

impl CurveSpec {
    pub fn new(points: Vec<C64>) -> Result<CurveSpec> {
        if points.len() < 3 {
            return Err(Error::Invalid("need at least 3 branch points".into()));
        }
        if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("branch points must be finite".into()));
        }
        let genus = (points.len() - 1) / 2;
        let spec = CurveSpec { branch_points: points, genus };
        let s = spec.scale();
        for i in 0..spec.branch_points.len() {
            for j in i + 1..spec.branch_points.len() {
                if (spec.branch_points[i] - spec.branch_points[j]).norm() <= 1e-10 * s {
                    return Err(Error::Invalid(format!("branch points {i} and {j} coincide")));
                }
            }
        }
        Ok(spec)
    }

    pub fn from_real(points: &[f64]) -> Result<CurveSpec> {
        CurveSpec::new(points.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Largest pairwise distance between branch points.
    pub fn scale(&self) -> f64 {
        let e = &self.branch_points;
        let mut s: f64 = 0.0;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                s = s.max((e[i] - e[j]).norm());
            }
        }
        s.max(1e-300)
    }

    /// Branch points sorted by real then imaginary part.
    pub fn sorted(&self) -> Vec<C64> {
        let mut e = self.branch_points.clone();
        e.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        e
    }

    /// Content hash over the spec and quadrature settings.
    pub fn hash(&self, settings: &QuadSettings) -> String {
        let body = serde_json::to_string(&(&self.branch_points, settings)).expect("spec serializes");
        let digest = Sha256::digest(body.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: C64,
    pub sheet: i8,
    pub at_infinity: bool,
}

impl SurfacePoint {
    pub fn new(x: C64, sheet: i8) -> SurfacePoint {
        assert!(sheet == 1 || sheet == -1, "sheet must be +1 or -1");
        SurfacePoint { x, sheet, at_infinity: false }
    }

    pub fn upper(x: C64) -> SurfacePoint {
        SurfacePoint::new(x, 1)
    }

    /// The hyperelliptic involution (x, y) -> (x, -y).
    pub fn involution(&self) -> SurfacePoint {
        SurfacePoint { sheet: -self.sheet, ..*self }
    }
}

/// Cut layout and the reference branch of y.
#[derive(Clone, Debug)]
pub struct CurveModel {
    pub sorted: Vec<C64>,
    pub cuts: Vec<(C64, C64)>,
    /// Start and unit direction of the cut to infinity (odd count only).
    pub ray: Option<(C64, C64)>,
    pub scale: f64,
}

fn cross2(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Parameter s in (0,1) where u + s(v-u) meets the segment p + t(q-p),
/// t in [0, tmax] (tmax = inf for a ray).
fn segment_hit(u: C64, v: C64, p: C64, q: C64, tmax: f64) -> Option<f64> {
    let d1 = v - u;
    let d2 = q - p;
    let den = cross2(d1, d2);
    if den.abs() < 1e-300 {
        return None;
    }
    let w = p - u;
    let s = cross2(w, d2) / den;
    let t = cross2(w, d1) / den;
    if s > 0.0 && s < 1.0 && t >= 0.0 && t <= tmax {
        Some(s)
    } else {
        None
    }
}

fn point_segment_distance(z: C64, p: C64, q: C64) -> f64 {
    let d = q - p;
    let t = if d.norm_sqr() == 0.0 { 0.0 } else { ((z - p) * d.conj()).re / d.norm_sqr() };
    (z - (p + d * t.clamp(0.0, 1.0))).norm()
}

fn segment_distance(a: C64, b: C64, c: C64, d: C64) -> f64 {
    if segment_hit(a, b, c, d, 1.0).is_some() {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Two closed segments overlap or cross anywhere other than at a shared
/// endpoint.
pub fn segments_conflict(a: (C64, C64), b: (C64, C64), tol: f64) -> bool {
    let shared = |z: C64| (z - b.0).norm() < tol || (z - b.1).norm() < tol;
    if segment_hit(a.0, a.1, b.0, b.1, 1.0).is_some() {
        let s = segment_hit(a.0, a.1, b.0, b.1, 1.0).unwrap();
        let z = a.0 + (a.1 - a.0) * s;
        if !(shared(z)) {
            return true;
        }
    }
    // colinear overlap and touching interiors
    for (z, seg) in [(a.0, b), (a.1, b), (b.0, a), (b.1, a)] {
        let is_end = (z - seg.0).norm() < tol || (z - seg.1).norm() < tol;
        if !is_end && point_segment_distance(z, seg.0, seg.1) < tol {
            return true;
        }
    }
    false
}

/// Reject layouts in which cuts and the connecting gap segments cross or
/// overlap. Sorting the branch points makes this impossible for curves
/// built by [`CurveSpec`]; the check guards hand-built layouts.
pub fn validate_cut_layout(segments: &[(C64, C64)], scale: f64) -> Result<()> {
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            if segments_conflict(segments[i], segments[j], 1e-12 * scale) {
                return Err(Error::UnsupportedConfiguration(format!(
                    "segments {:?} and {:?} cross or overlap",
                    segments[i], segments[j]
                )));
            }
        }
    }
    Ok(())
}

impl CurveModel {
    pub fn new(spec: &CurveSpec) -> Result<CurveModel> {
        let e = spec.sorted();
        let n = e.len();
        let cuts: Vec<(C64, C64)> = (0..n / 2).map(|k| (e[2 * k], e[2 * k + 1])).collect();
        let ray = if n % 2 == 1 {
            let last = e[n - 1];
            let centroid: C64 = e.iter().sum::<C64>() / n as f64;
            let d = last - centroid;
            if d.norm() < 1e-12 * spec.scale() {
                return Err(Error::UnsupportedConfiguration("last branch point sits at the centroid".into()));
            }
            Some((last, d / d.norm()))
        } else {
            None
        };
        let model = CurveModel { sorted: e, cuts, ray, scale: spec.scale() };
        let mut segs = model.cuts.clone();
        segs.extend(model.gaps());
        validate_cut_layout(&segs, model.scale)?;
        if let Some((p, d)) = model.ray {
            for s in &segs {
                if let Some(t) = segment_hit(s.0, s.1, p, p + d, f64::INFINITY) {
                    let _ = t;
                    return Err(Error::UnsupportedConfiguration("cut to infinity crosses another cut".into()));
                }
            }
        }
        Ok(model)
    }

    pub fn genus(&self) -> usize {
        (self.sorted.len() - 1) / 2
    }

    /// Gap segments between consecutive cuts (and to the last branch point
    /// for an odd count); g of them.
    pub fn gaps(&self) -> Vec<(C64, C64)> {
        let g = self.genus();
        let n = self.sorted.len();
        (0..g)
            .map(|k| {
                if n % 2 == 1 && k == g - 1 {
                    (self.cuts[k].1, self.sorted[n - 1])
                } else {
                    (self.cuts[k].1, self.cuts[k + 1].0)
                }
            })
            .collect()
    }

    pub fn y_ref(&self, x: C64) -> C64 {
        self.y_from_diffs(x, &self.diffs(x))
    }

    /// x − e_j for the sorted branch points.
    pub fn diffs(&self, x: C64) -> Vec<C64> {
        self.sorted.iter().map(|e| x - e).collect()
    }

    /// y_ref from x and the differences x − e_j. Callers that know some
    /// differences more accurately than x itself (near an endpoint of a
    /// path) pass them here; 1 − h²/u² is written as (x − p)(x − q)/u² so
    /// no cancellation happens close to a branch point.
    pub fn y_from_diffs(&self, x: C64, d: &[C64]) -> C64 {
        let mut r = C64::new(1.0, 0.0);
        for (k, &(p, q)) in self.cuts.iter().enumerate() {
            let u = x - 0.5 * (p + q);
            r *= u * (d[2 * k] * d[2 * k + 1] / (u * u)).sqrt();
        }
        if let Some((_, dir)) = self.ray {
            r *= (-dir).sqrt() * (d[self.sorted.len() - 1] / (-dir)).sqrt();
        }
        r
    }

    /// y'/y = ½ Σ 1/(x − e_j).
    pub fn dlog_y(&self, x: C64) -> C64 {
        0.5 * self.sorted.iter().map(|e| 1.0 / (x - e)).sum::<C64>()
    }

    /// Sorted parameters in (0,1) at which the segment u→v crosses a cut.
    pub fn crossings(&self, u: C64, v: C64) -> Vec<f64> {
        let mut out: Vec<f64> = self.cuts.iter().filter_map(|&(p, q)| segment_hit(u, v, p, q, 1.0)).collect();
        if let Some((e, d)) = self.ray {
            if let Some(s) = segment_hit(u, v, e, e + d, f64::INFINITY) {
                out.push(s);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    pub fn nearest_branch_distance(&self, x: C64) -> f64 {
        self.sorted.iter().map(|e| (x - e).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Raw differentials x^c / y_ref(x), c = 0..g-1.
    pub fn raw_forms(&self, x: C64) -> Vec<C64> {
        self.raw_forms_from_diffs(x, &self.diffs(x))
    }

    pub fn raw_forms_from_diffs(&self, x: C64, d: &[C64]) -> Vec<C64> {
        let y = self.y_from_diffs(x, d);
        let mut p = C64::new(1.0, 0.0);
        (0..self.genus())
            .map(|_| {
                let v = p / y;
                p *= x;
                v
            })
            .collect()
    }

    /// Sorted index of a branch point given by value.
    fn index_of(&self, e: C64) -> usize {
        self.sorted.iter().position(|&z| z == e).expect("not a branch point")
    }

    /// Raw forms times dx along the segment p→q between two branch points,
    /// with x = p + (q − p) sin²(θ/2); both endpoint differences are exact.
    pub fn gap_integrand(&self, p: C64, q: C64, th: f64) -> Vec<C64> {
        let (ip, iq) = (self.index_of(p), self.index_of(q));
        let (s, c) = (0.5 * th).sin_cos();
        let x = p + (q - p) * (s * s);
        let mut d = self.diffs(x);
        d[ip] = (q - p) * (s * s);
        d[iq] = -(q - p) * (c * c);
        let dx = (q - p) * (s * c);
        self.raw_forms_from_diffs(x, &d).into_iter().map(|v| v * dx).collect()
    }
}

/// A-cycles as ellipses around the first g cuts, B-cycles as chains of gap
/// segments, and the intersection matrix computed from winding numbers.
#[derive(Clone, Debug)]
pub struct Homology {
    pub a_cycles: Vec<Contour>,
    pub gaps: Vec<(C64, C64)>,
    /// intersection[a][b] = A_a · B_b.
    pub intersection: Vec<Vec<i32>>,
}

/// Winding number of a closed contour around z.
pub fn winding_number(c: &Contour, z: C64) -> i32 {
    let n = 2048;
    let mut total = 0.0;
    let mut prev = c.point(0.0) - z;
    for k in 1..=n {
        let cur = c.point(k as f64 / n as f64) - z;
        total += (cur / prev).arg();
        prev = cur;
    }
    (total / (2.0 * PI)).round() as i32
}

pub fn build_homology(spec: &CurveSpec) -> Result<Homology> {
    let model = CurveModel::new(spec)?;
    build_homology_for(&model)
}

fn build_homology_for(model: &CurveModel) -> Result<Homology> {
    let g = model.genus();
    let gaps = model.gaps();
    let mut a_cycles = Vec::with_capacity(g);
    for a in 0..g {
        let (p, q) = model.cuts[a];
        let mut dmin = f64::INFINITY;
        for (b, &(r, s)) in model.cuts.iter().enumerate() {
            if b != a {
                dmin = dmin.min(segment_distance(p, q, r, s));
            }
        }
        for (k, &(r, s)) in gaps.iter().enumerate() {
            // gaps touching this cut are meant to cross its ellipse
            if k + 1 != a && k != a {
                dmin = dmin.min(segment_distance(p, q, r, s));
            }
        }
        if let Some((e, d)) = model.ray {
            dmin = dmin.min(segment_distance(p, q, e, e + d * (4.0 * model.scale)));
        }
        if !dmin.is_finite() {
            dmin = model.scale;
        }
        let delta = 0.35 * dmin;
        let h = 0.5 * (q - p);
        a_cycles.push(Contour::Ellipse { center: 0.5 * (p + q), a: h.norm() + delta, b: delta, angle: h.arg() });
    }
    // B_b runs from the end of the chain back to the end of cut b.
    let end = gaps.last().map(|s| s.1).unwrap_or(model.sorted[0]);
    let intersection = (0..g)
        .map(|a| {
            (0..g)
                .map(|b| winding_number(&a_cycles[a], model.cuts[b].1) - winding_number(&a_cycles[a], end))
                .collect()
        })
        .collect::<Vec<Vec<i32>>>();
    for (a, row) in intersection.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if v != i32::from(a == b) {
                return Err(Error::UnsupportedConfiguration(format!("intersection A_{a}.B_{b} = {v}")));
            }
        }
    }
    Ok(Homology { a_cycles, gaps, intersection })
}

/// A point together with the data every kernel needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub point: SurfacePoint,
    pub y: C64,
    /// ω_a = omega[a]·dx at the point.
    pub omega: Vec<C64>,
    /// d/dx of omega[a].
    pub omega_dx: Vec<C64>,
    pub abel: Vec<C64>,
}

impl Site {
    pub fn x(&self) -> C64 {
        self.point.x
    }

    /// Same point with the Abel vector moved by a period (continuation
    /// around a closed loop).
    pub fn translated(&self, shift: &[C64]) -> Site {
        let mut s = self.clone();
        for (a, d) in s.abel.iter_mut().zip(shift) {
            *a += d;
        }
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CacheFile {
    spec: CurveSpec,
    settings: QuadSettings,
    a_periods: Vec<Vec<C64>>,
    b_periods: Vec<Vec<C64>>,
    normalization: Vec<Vec<C64>>,
    tau: Vec<Vec<C64>>,
    kappa0: Vec<C64>,
    kappa_characteristic: (Vec<f64>, Vec<f64>),
    base_point: SurfacePoint,
    path_atlas: String,
    hash: String,
}

pub const PATH_ATLAS: &str = "straight segments from the first sorted branch point; \
sheet sign flips at each cut crossing; optional waypoints give a polyline";

/// Normalized period data of a curve.
#[derive(Clone, Debug)]
pub struct PeriodData {
    pub curve: CurveSpec,
    pub settings: QuadSettings,
    /// a_periods[a][c] = ∮_{A_a} x^c dx / y.
    pub a_periods: Vec<Vec<C64>>,
    pub b_periods: Vec<Vec<C64>>,
    /// ω_a = Σ_c N[a][c] x^c dx / y.
    pub normalization: Vec<Vec<C64>>,
    pub tau: Vec<Vec<C64>>,
    pub kappa0: Vec<C64>,
    /// (a, b) with κ₀ = 2πi a + τ b.
    pub kappa_characteristic: (Vec<f64>, Vec<f64>),
    pub base_point: SurfacePoint,
    pub path_atlas: String,
    pub homology: Homology,
    pub model: CurveModel,
    theta: ThetaContext,
}

impl PartialEq for PeriodData {
    fn eq(&self, o: &PeriodData) -> bool {
        self.curve == o.curve
            && self.settings == o.settings
            && self.a_periods == o.a_periods
            && self.b_periods == o.b_periods
            && self.normalization == o.normalization
            && self.tau == o.tau
            && self.kappa0 == o.kappa0
            && self.kappa_characteristic == o.kappa_characteristic
            && self.base_point == o.base_point
    }
}

fn mat(rows: &[Vec<C64>]) -> CMatrix {
    CMatrix::from_rows(rows)
}

/// Odd half-period characteristics (a, b) ∈ {0,½}^g × {0,½}^g in
/// lexicographic order.
pub fn odd_characteristics(g: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let total = 1usize << g;
    let bits = |k: usize| -> Vec<f64> { (0..g).map(|i| if (k >> (g - 1 - i)) & 1 == 1 { 0.5 } else { 0.0 }).collect() };
    for ka in 0..total {
        for kb in 0..total {
            let a = bits(ka);
            let b = bits(kb);
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            if ((4.0 * dot).round() as i64) % 2 == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

impl PeriodData {
    pub fn compute(spec: &CurveSpec) -> Result<PeriodData> {
        PeriodData::compute_with(spec, QuadSettings::default())
    }

    pub fn compute_with(spec: &CurveSpec, settings: QuadSettings) -> Result<PeriodData> {
        let model = CurveModel::new(spec)?;
        let homology = build_homology_for(&model)?;
        let g = model.genus();
        let mut a_periods = Vec::with_capacity(g);
        for c in &homology.a_cycles {
            a_periods.push(quad::contour_integrate_vec(&|x| model.raw_forms(x), c, 8, settings)?);
        }
        let mut gaps = Vec::with_capacity(g);
        for &(p, q) in &homology.gaps {
            // the sin² substitution absorbs both endpoint square roots
            let f = |th: f64| -> Vec<C64> { model.gap_integrand(p, q, th).into_iter().map(|v| 2.0 * v).collect() };
            gaps.push(quad::integrate(&f, 0.0, PI, settings)?.0);
        }
        let b_periods: Vec<Vec<C64>> = (0..g)
            .map(|a| (0..g).map(|c| -(a..g).map(|k| gaps[k][c]).sum::<C64>()).collect())
            .collect();
        let am = mat(&a_periods);
        let cond = am.condition_number();
        if cond > 1e8 {
            return Err(Error::SingularPeriods(cond));
        }
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        let nm = am.transpose().inverse()?.scale(two_pi_i);
        let tau_m = mat(&b_periods).matmul(&nm.transpose());
        let mut tau = tau_m.to_rows();
        // symmetrize away quadrature round-off
        for a in 0..g {
            for b in a + 1..g {
                let s = 0.5 * (tau[a][b] + tau[b][a]);
                tau[a][b] = s;
                tau[b][a] = s;
            }
        }
        let theta = ThetaContext::new(tau.clone())?;
        let base_point = SurfacePoint::upper(model.sorted[0]);
        let mut pd = PeriodData {
            curve: spec.clone(),
            settings,
            a_periods,
            b_periods,
            normalization: nm.to_rows(),
            tau,
            kappa0: vec![C64::default(); g],
            kappa_characteristic: (vec![0.0; g], vec![0.0; g]),
            base_point,
            path_atlas: PATH_ATLAS.to_string(),
            homology,
            model,
            theta,
        };
        pd.select_kappa(0)?;
        Ok(pd)
    }

    pub fn genus(&self) -> usize {
        self.tau.len()
    }

    pub fn scale(&self) -> f64 {
        self.model.scale
    }

    /// Cap on the lattice radius used by theta evaluations.
    pub fn set_theta_max_radius(&mut self, r: usize) {
        self.theta.max_radius = r;
    }

    pub fn theta_context(&self) -> &ThetaContext {
        &self.theta
    }

    pub fn half_period(&self, a: &[f64], b: &[f64]) -> Vec<C64> {
        let g = self.genus();
        (0..g)
            .map(|i| C64::new(0.0, 2.0 * PI * a[i]) + (0..g).map(|j| self.tau[i][j] * b[j]).sum::<C64>())
            .collect()
    }

    /// A generic test point for validating κ₀.
    fn probe_point(&self) -> SurfacePoint {
        let c: C64 = self.model.sorted.iter().sum::<C64>() / self.model.sorted.len() as f64;
        SurfacePoint::upper(c + C64::new(0.137, 0.412) * self.scale())
    }

    /// Number of zeros of z -> Θ(A(z) − A(P) + κ) inside a small circle
    /// around P, by the argument principle.
    pub fn zero_count(&self, kappa: &[C64], p: &Site, radius: f64) -> Result<i32> {
        let n = 256;
        let mut prev: Option<C64> = None;
        let mut first = C64::default();
        let mut total = 0.0;
        for k in 0..n {
            let x = p.x() + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64);
            let z = self.site_near(p, x)?;
            let arg: Vec<C64> = (0..self.genus()).map(|a| z.abel[a] - p.abel[a] + kappa[a]).collect();
            let t = self.theta.theta(&arg)?;
            if let Some(pv) = prev {
                total += (t / pv).arg();
            } else {
                first = t;
            }
            prev = Some(t);
        }
        total += (first / prev.unwrap()).arg();
        Ok((total / (2.0 * PI)).round() as i32)
    }

    /// Choose the `skip`-th validated odd half-period as κ₀.
    pub fn select_kappa(&mut self, skip: usize) -> Result<()> {
        let p = self.site(self.probe_point())?;
        let mut found = 0;
        for (a, b) in odd_characteristics(self.genus()) {
            let k = self.half_period(&a, &b);
            let tv = self.theta.eval(&k)?;
            if tv.value.norm() > 1e-10 * tv.abs_sum.max(1.0) {
                continue;
            }
            if self.zero_count(&k, &p, 0.02 * self.scale())? != 1 {
                continue;
            }
            if found == skip {
                self.kappa0 = k;
                self.kappa_characteristic = (a, b);
                return Ok(());
            }
            found += 1;
        }
        Err(Error::UnsupportedConfiguration(format!("fewer than {} validated odd half-periods", skip + 1)))
    }

    /// Copy with a different validated κ₀.
    pub fn with_kappa_choice(&self, skip: usize) -> Result<PeriodData> {
        let mut pd = self.clone();
        pd.select_kappa(skip)?;
        Ok(pd)
    }

    pub fn y(&self, p: &SurfacePoint) -> C64 {
        self.model.y_ref(p.x) * p.sheet as f64
    }

    /// Normalized ω_a coefficients (of dx) at P.
    pub fn omega_vec(&self, p: &SurfacePoint) -> Vec<C64> {
        let raw = self.model.raw_forms(p.x);
        let s = p.sheet as f64;
        self.normalization.iter().map(|row| row.iter().zip(&raw).map(|(n, r)| n * r).sum::<C64>() * s).collect()
    }

    pub fn eval_omega(&self, a: usize, p: &SurfacePoint) -> C64 {
        self.omega_vec(p)[a]
    }

    /// d/dx of the ω_a coefficients.
    pub fn omega_dx_vec(&self, p: &SurfacePoint) -> Vec<C64> {
        let x = p.x;
        let y = self.y(p);
        let dl = self.model.dlog_y(x);
        let g = self.genus();
        // d/dx (x^c / y) = (c x^{c-1} - x^c y'/y) / y
        let raw_d: Vec<C64> = (0..g)
            .map(|c| {
                let xc = x.powu(c as u32);
                let dxc = if c == 0 { C64::default() } else { x.powu(c as u32 - 1) * c as f64 };
                (dxc - xc * dl) / y
            })
            .collect();
        self.normalization.iter().map(|row| row.iter().zip(&raw_d).map(|(n, r)| n * r).sum()).collect()
    }

    fn check_point(&self, x: C64) -> Result<()> {
        let d = self.model.nearest_branch_distance(x);
        if d < 1e-6 * self.scale() {
            return Err(Error::PathThroughBranchPoint(d));
        }
        Ok(())
    }

    /// Integrate the raw forms along u→v starting with sign `eps` relative
    /// to y_ref; returns the signed integral and the sign at v. With
    /// `from_branch` the start u is a branch point and the t² substitution
    /// removes the square-root singularity there.
    fn integrate_segment(&self, u: C64, v: C64, eps: f64, from_branch: bool) -> Result<(Vec<C64>, f64)> {
        let g = self.genus();
        let sc = self.scale();
        for (k, e) in self.model.sorted.iter().enumerate() {
            if from_branch && k == 0 && (u - e).norm() < 1e-14 * sc {
                continue;
            }
            let d = point_segment_distance(*e, u, v);
            if d < 1e-6 * sc {
                return Err(Error::PathThroughBranchPoint(d));
            }
        }
        let cross = self.model.crossings(u, v);
        let mut breaks = vec![0.0];
        breaks.extend(cross.iter().copied());
        breaks.push(1.0);
        let mut total = vec![C64::default(); g];
        let mut sign = eps;
        for w in breaks.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let (v_part, _) = if from_branch {
                let f = |t: f64| -> Vec<C64> {
                    let x = u + (v - u) * (t * t);
                    let dx = (v - u) * (2.0 * t);
                    let mut d = self.model.diffs(x);
                    d[0] = (v - u) * (t * t);
                    self.model.raw_forms_from_diffs(x, &d).into_iter().map(|r| r * dx).collect()
                };
                quad::integrate(&f, s0.sqrt(), s1.sqrt(), self.settings)?
            } else {
                let f = |s: f64| -> Vec<C64> {
                    let x = u + (v - u) * s;
                    self.model.raw_forms(x).into_iter().map(|r| r * (v - u)).collect()
                };
                quad::integrate(&f, s0, s1, self.settings)?
            };
            for (t, p) in total.iter_mut().zip(v_part) {
                *t += p * sign;
            }
            if s1 < 1.0 {
                sign = -sign;
            }
        }
        Ok((total, sign))
    }

    fn normalize(&self, raw: &[C64]) -> Vec<C64> {
        self.normalization.iter().map(|row| row.iter().zip(raw).map(|(n, r)| n * r).sum()).collect()
    }

    /// Abel map from the base point along the polyline through `waypoints`.
    pub fn abel_map_via(&self, p: &SurfacePoint, waypoints: &[C64]) -> Result<Vec<C64>> {
        self.check_point(p.x)?;
        let g = self.genus();
        let mut nodes = vec![self.base_point.x];
        nodes.extend_from_slice(waypoints);
        nodes.push(p.x);
        let mut raw = vec![C64::default(); g];
        let mut eps = 1.0;
        for (k, w) in nodes.windows(2).enumerate() {
            if (w[1] - w[0]).norm() == 0.0 {
                continue;
            }
            let (part, end_sign) = self.integrate_segment(w[0], w[1], eps, k == 0)?;
            for (r, v) in raw.iter_mut().zip(part) {
                *r += v;
            }
            eps = end_sign;
        }
        // the lift ends on sheet eps·(+1); flip the whole lift if needed
        let flip = eps * p.sheet as f64;
        Ok(self.normalize(&raw).into_iter().map(|v| v * flip).collect())
    }

    pub fn abel_map(&self, p: &SurfacePoint) -> Result<Vec<C64>> {
        if (p.x - self.base_point.x).norm() == 0.0 {
            return Ok(vec![C64::default(); self.genus()]);
        }
        self.abel_map_via(p, &[])
    }

    fn make_site(&self, p: SurfacePoint, abel: Vec<C64>) -> Site {
        Site { point: p, y: self.y(&p), omega: self.omega_vec(&p), omega_dx: self.omega_dx_vec(&p), abel }
    }

    pub fn site(&self, p: SurfacePoint) -> Result<Site> {
        let abel = self.abel_map(&p)?;
        Ok(self.make_site(p, abel))
    }

    pub fn site_via(&self, p: SurfacePoint, waypoints: &[C64]) -> Result<Site> {
        let abel = self.abel_map_via(&p, waypoints)?;
        Ok(self.make_site(p, abel))
    }

    /// Continue from `c` along the straight segment to x. The sheet of the
    /// result follows the continuation (it flips if the segment crosses a
    /// cut).
    pub fn site_near(&self, c: &Site, x: C64) -> Result<Site> {
        self.check_point(x)?;
        let eps = c.point.sheet as f64;
        let (raw, end_sign) = self.integrate_segment(c.x(), x, eps, false)?;
        let delta = self.normalize(&raw);
        let p = SurfacePoint::new(x, if end_sign > 0.0 { 1 } else { -1 });
        let abel = c.abel.iter().zip(delta).map(|(a, d)| a + d).collect();
        Ok(self.make_site(p, abel))
    }

    /// Probe sites on a circle around a center site.
    pub fn circle_sites(&self, c: &Site, radius: f64, n: usize) -> Result<Vec<Site>> {
        crate::numeric::laurent::circle_points(c.x(), radius, n).into_iter().map(|x| self.site_near(c, x)).collect()
    }

    /// Integral of the normalized ω along a cycle (on the upper sheet for
    /// A-cycles).
    pub fn a_cycle_integral(&self, a: usize) -> Result<Vec<C64>> {
        let model = &self.model;
        let raw = quad::contour_integrate_vec(&|x| model.raw_forms(x), &self.homology.a_cycles[a], 8, self.settings)?;
        Ok(self.normalize(&raw))
    }

    /// Period vector of B_a: column a of τ.
    pub fn b_period(&self, a: usize) -> Vec<C64> {
        (0..self.genus()).map(|b| self.tau[a][b]).collect()
    }

    /// Real coordinates (a, b) with v = 2πi a + τ b.
    pub fn lattice_coordinates(&self, v: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.genus();
        let re_tau = CMatrix::from_fn(g, g, |i, j| C64::new(self.tau[i][j].re, 0.0));
        let b: Vec<f64> = re_tau.inverse()?.matvec(&v.iter().map(|z| C64::new(z.re, 0.0)).collect::<Vec<_>>()).iter().map(|z| z.re).collect();
        let a = (0..g)
            .map(|i| (v[i].im - (0..g).map(|j| self.tau[i][j].im * b[j]).sum::<f64>()) / (2.0 * PI))
            .collect();
        Ok((a, b))
    }

    /// Distance of v from the period lattice, measured in lattice
    /// coordinates.
    pub fn lattice_distance(&self, v: &[C64]) -> Result<f64> {
        let (a, b) = self.lattice_coordinates(v)?;
        Ok(a.iter().chain(&b).map(|t| (t - t.round()).abs()).fold(0.0, f64::max))
    }

    /// Representative of v mod the lattice with coordinates in [-½, ½).
    pub fn lattice_reduce(&self, v: &[C64]) -> Result<Vec<C64>> {
        let (a, b) = self.lattice_coordinates(v)?;
        let red = |t: f64| t - (t + 0.5).floor();
        let a: Vec<f64> = a.into_iter().map(red).collect();
        let b: Vec<f64> = b.into_iter().map(red).collect();
        Ok(self.half_period(&a, &b))
    }

    pub fn hash(&self) -> String {
        self.curve.hash(&self.settings)
    }

    pub fn cache_store(&self, path: &Path) -> Result<()> {
        let file = CacheFile {
            spec: self.curve.clone(),
            settings: self.settings,
            a_periods: self.a_periods.clone(),
            b_periods: self.b_periods.clone(),
            normalization: self.normalization.clone(),
            tau: self.tau.clone(),
            kappa0: self.kappa0.clone(),
            kappa_characteristic: self.kappa_characteristic.clone(),
            base_point: self.base_point,
            path_atlas: self.path_atlas.clone(),
            hash: self.hash(),
        };
        let body = serde_json::to_string_pretty(&file).map_err(|e| Error::Io(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, body)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Load cached period data, checking it was computed for `spec` with
    /// `settings`.
    pub fn cache_load(path: &Path, spec: &CurveSpec, settings: &QuadSettings) -> Result<PeriodData> {
        if !path.exists() {
            return Err(Error::NotFound(path.display().to_string()));
        }
        let body = std::fs::read_to_string(path)?;
        let file: CacheFile = serde_json::from_str(&body).map_err(|e| Error::Io(e.to_string()))?;
        let expected = spec.hash(settings);
        if file.hash != expected || file.spec.hash(&file.settings) != expected {
            return Err(Error::HashMismatch { stored: file.hash, expected });
        }
        let model = CurveModel::new(&file.spec)?;
        let homology = build_homology_for(&model)?;
        let theta = ThetaContext::new(file.tau.clone())?;
        Ok(PeriodData {
            curve: file.spec,
            settings: file.settings,
            a_periods: file.a_periods,
            b_periods: file.b_periods,
            normalization: file.normalization,
            tau: file.tau,
            kappa0: file.kappa0,
            kappa_characteristic: file.kappa_characteristic,
            base_point: file.base_point,
            path_atlas: file.path_atlas,
            homology,
            model,
            theta,
        })
    }

    /// Eigenvalues of Re τ, ascending.
    pub fn re_tau_eigenvalues(&self) -> Vec<f64> {
        real_part_eigenvalues(&self.tau)
    }

    /// Largest |τ_ab − τ_ba| over the raw (unsymmetrized) product.
    pub fn tau_asymmetry(&self) -> f64 {
        let t = mat(&self.b_periods).matmul(&mat(&self.normalization).transpose());
        let g = self.genus();
        let mut m: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                m = m.max((t[(a, b)] - t[(b, a)]).norm());
            }
        }
        m / t.max_abs().max(1e-300)
    }

    /// Riemann bilinear check: a_periods·b_periodsᵀ symmetric, relative.
    pub fn bilinear_asymmetry(&self) -> f64 {
        let p = mat(&self.a_periods).transpose().matmul(&mat(&self.b_periods));
        let g = self.genus();
        let mut m: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                m = m.max((p[(a, b)] - p[(b, a)]).norm());
            }
        }
        m / p.max_abs().max(1e-300)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_ref_squares_to_polynomial() {
        let spec = CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2]).unwrap();
        let m = CurveModel::new(&spec).unwrap();
        let x = C64::new(0.3, 1.7);
        let p: C64 = spec.branch_points.iter().map(|e| x - e).product();
        assert!((m.y_ref(x) * m.y_ref(x) - p).norm() < 1e-12 * p.norm());
        let odd = CurveSpec::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let m = CurveModel::new(&odd).unwrap();
        let p: C64 = odd.branch_points.iter().map(|e| x - e).product();
        assert!((m.y_ref(x) * m.y_ref(x) - p).norm() < 1e-12 * p.norm());
    }

    #[test]
    fn crossing_detection() {
        let spec = CurveSpec::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let m = CurveModel::new(&spec).unwrap();
        let c = m.crossings(C64::new(-0.5, 1.0), C64::new(-0.5, -1.0));
        assert_eq!(c.len(), 1);
        assert!((c[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn odd_characteristics_count() {
        assert_eq!(odd_characteristics(1).len(), 1);
        assert_eq!(odd_characteristics(2).len(), 6);
        let (a, b) = &odd_characteristics(2)[0];
        assert_eq!((a.clone(), b.clone()), (vec![0.0, 0.5], vec![0.0, 0.5]));
    }
}
