//! The verification suites. Each returns named checks; thresholds can be
//! overridden per scenario.

use super::scenario::Scenario;
use super::{Check, Comparison};
use crate::curve::{PeriodData, Site};
use crate::error::Result;
use crate::green::KernelContext;
use crate::hecke::{self, normal, HeckeConfig};
use crate::hitchin::{self, Interpolator, PhasePoint};
use crate::kzb;
use crate::numeric::laurent;
use crate::theta::ThetaContext;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

pub struct Ctx<'a> {
    pub scenario: &'a Scenario,
    pub pd: Arc<PeriodData>,
    pub cfg: Option<HeckeConfig>,
    pub seed: u64,
}

impl Ctx<'_> {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn cfg(&self) -> &HeckeConfig {
        self.cfg.as_ref().expect("suite requires a Hecke configuration")
    }

    fn at_most(&self, suite: &str, name: &str, value: f64, default: f64) -> Check {
        Check::new(name, value, self.scenario.threshold(suite, name, default), Comparison::AtMost)
    }

    fn at_least(&self, suite: &str, name: &str, value: f64, default: f64) -> Check {
        Check::new(name, value, self.scenario.threshold(suite, name, default), Comparison::AtLeast)
    }
}

fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn gauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

/// λ = 2πi·u + τ·v with u, v uniform in [−½, ½]^g.
fn random_argument(tau: &[Vec<C64>], rng: &mut ChaCha8Rng) -> Vec<C64> {
    let g = tau.len();
    let u: Vec<f64> = (0..g).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let v: Vec<f64> = (0..g).map(|_| rng.gen_range(-0.5..0.5)).collect();
    (0..g).map(|a| C64::new(0.0, 2.0 * PI * u[a]) + (0..g).map(|b| tau[a][b] * v[b]).sum::<C64>()).collect()
}

pub fn theta_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let th = ctx.pd.theta_context();
    let tau = th.tau().to_vec();
    let g = tau.len();
    let mut rng = ctx.rng(1);
    let (mut even, mut per, mut quasi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let lam = random_argument(&tau, &mut rng);
        let t = th.eval(&lam)?;
        let sc = t.abs_sum;
        let neg: Vec<C64> = lam.iter().map(|z| -z).collect();
        even = even.max((th.theta(&neg)? - t.value).norm() / sc);
        for a in 0..g {
            let mut s = lam.clone();
            s[a] += C64::new(0.0, 2.0 * PI);
            per = per.max((th.theta(&s)? - t.value).norm() / sc);
            let s: Vec<C64> = (0..g).map(|b| lam[b] + tau[b][a]).collect();
            let expect = (-0.5 * tau[a][a] - lam[a]).exp() * t.value;
            let got = th.theta(&s)?;
            quasi = quasi.max((got - expect).norm() / got.norm().max(expect.norm()).max(1e-300));
        }
    }
    // ∂Θ/∂τ_ab against the z-Hessian (½ on the diagonal).
    let mut heat: f64 = 0.0;
    let h = 1e-4;
    for _ in 0..3 {
        let lam = random_argument(&tau, &mut rng);
        let hess = th.theta_hess(&lam)?;
        for a in 0..g {
            for b in a..g {
                let shifted = |d: f64| -> Result<C64> {
                    let mut t2 = tau.clone();
                    t2[a][b] += d;
                    if a != b {
                        t2[b][a] += d;
                    }
                    ThetaContext::new(t2)?.theta(&lam)
                };
                let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h);
                let expect = if a == b { 0.5 * hess[a][a] } else { hess[a][b] };
                heat = heat.max((fd - expect).norm() / expect.norm().max(1e-300));
            }
        }
    }
    Ok(vec![
        ctx.at_most("theta", "theta_even", even, 1e-11),
        ctx.at_most("theta", "theta_periodic", per, 1e-11),
        ctx.at_most("theta", "theta_quasi_periodic", quasi, 1e-11),
        ctx.at_most("theta", "theta_heat_equation", heat, 1e-6),
    ])
}

pub fn periods_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let pd = &ctx.pd;
    let g = pd.genus();
    let mut a_norm: f64 = 0.0;
    for a in 0..g {
        let v = pd.a_cycle_integral(a)?;
        for (b, z) in v.iter().enumerate() {
            let expect = if a == b { C64::new(0.0, 2.0 * PI) } else { C64::default() };
            a_norm = a_norm.max((z - expect).norm());
        }
    }
    let mut rng = ctx.rng(2);
    let mut count_dev: f64 = 0.0;
    for p in hecke::random_points(pd, 2, &mut rng) {
        let r = 0.25 * pd.model.nearest_branch_distance(p.x).min(0.08 * pd.scale());
        count_dev = count_dev.max((pd.zero_count(&pd.kappa0, &pd.site(p)?, r)? - 1).abs() as f64);
    }
    let mut rng = ctx.rng(3);
    let pts = hecke::random_points(pd, 4, &mut rng);
    let mut inv: f64 = 0.0;
    let mut path: f64 = 0.0;
    for p in &pts {
        let a = pd.abel_map(p)?;
        let b = pd.abel_map(&p.involution())?;
        inv = inv.max(cnorm(&a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>()));
        let w = C64::new(p.x.re * 0.5, p.x.im + 0.3 * pd.scale());
        let c = pd.abel_map_via(p, &[w])?;
        let d: Vec<C64> = a.iter().zip(&c).map(|(x, y)| x - y).collect();
        path = path.max(pd.lattice_distance(&d)?);
    }
    Ok(vec![
        ctx.at_most("periods", "tau_symmetric", pd.tau_asymmetry(), 1e-9),
        Check::new("re_tau_negative_definite", *pd.re_tau_eigenvalues().last().unwrap(), 0.0, Comparison::Below),
        ctx.at_most("periods", "a_normalization", a_norm, 1e-9),
        ctx.at_most("periods", "bilinear_relation", pd.bilinear_asymmetry(), 1e-9),
        ctx.at_most("periods", "kappa_simple_zero", count_dev, 0.0),
        ctx.at_most("periods", "abel_involution", inv, 1e-10),
        ctx.at_most("periods", "abel_path_independence", path, 1e-9),
    ])
}

pub fn green_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let pd = &ctx.pd;
    let g = pd.genus();
    let mut rng = ctx.rng(4);
    let (mut diag, mut p0res, mut bmono, mut amono): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..ctx.scenario.samples {
        let pts = hecke::random_points(pd, 3, &mut rng);
        let k = KernelContext::new(pd.clone(), pts[0])?;
        let p = pd.site(pts[1])?;
        let z = pd.site(pts[2])?;
        let r = 0.25 * (p.x() - k.p0.x()).norm().min(pd.model.nearest_branch_distance(p.x())).min(0.04 * pd.scale());
        let w = laurent::probe(&|x| k.omega_kernel(&p, &pd.site_near(&p, x)?), p.x(), r, laurent::DEFAULT_SAMPLES)?;
        diag = diag.max((w.c(-1) - 1.0).norm());
        let r0 = 0.25 * (p.x() - k.p0.x()).norm().min(pd.model.nearest_branch_distance(k.p0.x())).min(0.04 * pd.scale());
        let w = laurent::probe(&|x| k.green_g(&pd.site_near(&k.p0, x)?, &p), k.p0.x(), r0, laurent::DEFAULT_SAMPLES)?;
        p0res = p0res.max((w.c(-1) + 1.0).norm());
        let base = k.r_kernel(&p, &z)?;
        for a in 0..g {
            let zb = z.translated(&pd.b_period(a));
            let d = k.r_kernel(&p, &zb)? - base - p.omega[a];
            bmono = bmono.max(d.norm() / p.omega[a].norm().max(1.0));
            let mut shift = vec![C64::default(); g];
            shift[a] = C64::new(0.0, 2.0 * PI);
            let za = z.translated(&shift);
            amono = amono.max((k.r_kernel(&p, &za)? - base).norm() / base.norm().max(1.0));
        }
    }
    Ok(vec![
        ctx.at_most("green", "diagonal_residue", diag, 1e-8),
        ctx.at_most("green", "p0_residue", p0res, 1e-8),
        ctx.at_most("green", "b_monodromy", bmono, 1e-8),
        ctx.at_most("green", "a_monodromy", amono, 1e-8),
    ])
}

/// Configurations used by sample-based checks: the scenario's own plus
/// random ones on the same curve.
fn sample_configs(ctx: &Ctx, salt: u64, count: usize) -> Result<Vec<HeckeConfig>> {
    let mut out = vec![ctx.cfg().clone()];
    let mut rng = ctx.rng(salt);
    while out.len() < count {
        let c = HeckeConfig::random(ctx.pd.clone(), &mut rng)?;
        if !c.den_is_zero() {
            out.push(c);
        }
    }
    Ok(out)
}

pub fn hecke_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let cfgs = sample_configs(ctx, 5, ctx.scenario.samples.max(2))?;
    let g = ctx.pd.genus();
    let (mut agree, mut recon, mut grad): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let (mut stab, mut fib): (usize, usize) = (0, 0);
    for c in &cfgs {
        if g <= 2 {
            let s = hecke::den_sum(c)? * hecke::den_sign(g);
            agree = agree.max((s - c.den).norm() / c.den.norm());
        }
        for j in 0..c.n() {
            let d = hecke::den_coefficients(c, j, None);
            recon = recon.max((d.reconstruct(&c.ell[j]) - c.den).norm() / c.den.norm());
        }
        let jet = hecke::den_det_jet(c, 1);
        for (i, gi) in jet.gradient().iter().enumerate() {
            let h = 1e-5 * c.ell[i].norm().max(1.0);
            let mut lp = c.ell.clone();
            lp[i] += h;
            let mut lm = c.ell.clone();
            lm[i] -= h;
            let fd = (c.with_ell(lp).den - c.with_ell(lm).den) / (2.0 * h);
            grad = grad.max((fd - gi).norm() / gi.norm().max(c.den.norm()));
        }
        stab = stab.max(hecke::stability_check(c).kernel_dim);
        fib = fib.max(hecke::fiber_rigidity(c).kernel_dim);
    }
    // g + 1 coincident values already force Den = 0; use all of them.
    let equal = vec![ctx.cfg().ell[0]; ctx.cfg().n()];
    let degenerate = ctx.cfg().with_ell(equal);
    let mut checks = vec![
        ctx.at_most("hecke", "den_coefficients_reconstruct", recon, 1e-10),
        ctx.at_most("hecke", "den_jet_gradient", grad, 1e-6),
        ctx.at_most("hecke", "stability_kernel_trivial", stab as f64, 0.0),
        ctx.at_most("hecke", "fiber_kernel_trivial", fib as f64, 0.0),
        ctx.at_least("hecke", "stability_kernel_at_den_zero", hecke::stability_check(&degenerate).kernel_dim as f64, 1.0),
        ctx.at_least("hecke", "fiber_kernel_at_den_zero", hecke::fiber_rigidity(&degenerate).kernel_dim as f64, 1.0),
    ];
    if g <= 2 {
        checks.push(ctx.at_most("hecke", "den_det_matches_sum", agree, 1e-9));
    }
    Ok(checks)
}

fn phase_points(ctx: &Ctx, cfg: &HeckeConfig) -> Result<Vec<PhasePoint>> {
    (0..ctx.scenario.samples as u64).map(|s| hitchin::sample_phase_point(cfg, ctx.seed.wrapping_add(s))).collect()
}

fn singular_ratio(w: &[laurent::LaurentWindow]) -> (f64, f64) {
    let sing = w.iter().map(|l| l.c(-2).norm().max(l.c(-1).norm())).fold(0.0, f64::max);
    let c0 = w.iter().map(|l| l.c(0).norm()).fold(0.0, f64::max);
    (sing, c0)
}

pub fn hitchin_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let cfg = ctx.cfg();
    cfg.require_den()?;
    let dd = cfg.den_data()?;
    let pps = phase_points(ctx, cfg)?;
    let ip = Interpolator::holomorphic(cfg, ctx.seed ^ 0x4a11)?;
    let zs = cfg.generic_points(10, ctx.seed ^ 0x22)?;
    let zds: Vec<_> = zs.iter().map(|z| cfg.point_data(z)).collect::<Result<_>>()?;
    let mut rng = ctx.rng(6);
    let mats: Vec<_> = (0..5).map(|_| hitchin::random_unimodular(&mut rng)).collect();
    let (mut constraint, mut at_pi, mut at_p0, mut alt, mut held, mut homog): (f64, f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut comm, mut moment, mut inv, mut resdir, mut cond3): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for pp in &pps {
        constraint = constraint.max(pp.constraint_residual());
        let h = |c: &Site, x: C64| -> Result<Vec<C64>> {
            let zd = cfg.point_data_near(c, x)?;
            let a = hitchin::higgs_generic(cfg, &pp.ell, &pp.lam, &dd, &zd);
            Ok(vec![a.tr_sq(), a.e, a.h, a.f])
        };
        let mut wins = Vec::new();
        for c in &cfg.sites {
            wins.push(laurent::probe_many(&|x| h(c, x), c.x(), cfg.probe_radius(c.x()), laurent::DEFAULT_SAMPLES)?);
        }
        let p0 = &cfg.kernel.p0;
        let w0 = laurent::probe_many(&|x| h(p0, x), p0.x(), cfg.probe_radius(p0.x()), laurent::DEFAULT_SAMPLES)?;
        let hscale = wins.iter().chain(std::iter::once(&w0)).map(|w| w[0].c(0).norm()).fold(0.0, f64::max);
        let ascale = wins.iter().map(|w| w[1..].iter().map(|l| l.c(0).norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
        for (i, w) in wins.iter().enumerate() {
            at_pi = at_pi.max(singular_ratio(&w[..1]).0 / hscale);
            let l = cfg.ell[i];
            let res = [w[1].c(-1), w[2].c(-1), w[3].c(-1)];
            let x = hitchin::residue_direction(&l);
            let c = -res[0];
            let dev = ((res[0] - c * x.e).norm()).max((res[1] - c * x.h).norm()).max((res[2] - c * x.f).norm());
            resdir = resdir.max(dev / res.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300));
            let comb = [w[1].c(-1), w[2].c(-1), w[3].c(-1)];
            let iii = -l * l * comb[0] - 2.0 * l * comb[1] + comb[2];
            cond3 = cond3.max(iii.norm() / ascale);
        }
        at_p0 = at_p0.max(singular_ratio(&w0[..1]).0 / hscale);
        for z in &zs {
            let a = hitchin::hitchin_h(cfg, pp, z)?;
            let b = hitchin::hitchin_h_alt(cfg, pp, z)?;
            alt = alt.max((a - b).norm() / a.norm().max(b.norm()));
        }
        for zd in zds.iter().take(3) {
            let a = hitchin::hitchin_h_at(cfg, pp, &dd, zd);
            let b = hitchin::hitchin_h_at(cfg, &pp.scaled_lambda(2.0), &dd, zd);
            homog = homog.max((b - 4.0 * a).norm() / (4.0 * a.norm()));
        }
        let hs = hitchin::extract_hamiltonians_with(cfg, pp, &ip)?;
        held = held.max(hs.held_out_residual);
        let jets = hitchin::hamiltonian_jets(cfg, pp, &ip)?;
        for a in 0..jets.len() {
            for b in a + 1..jets.len() {
                comm = comm.max(hitchin::normalized_bracket(&jets[a], &jets[b]));
            }
        }
        for m in hitchin::moment_jets(pp).iter() {
            for j in &jets {
                moment = moment.max(hitchin::normalized_bracket(m, j));
            }
        }
        for m in &mats {
            let q = hitchin::sl2_action(*m, pp)?;
            let hq = hitchin::extract_hamiltonians_with(cfg, &q, &ip)?;
            let sc = cnorm(&hs.values);
            for (x, y) in hs.values.iter().zip(&hq.values) {
                inv = inv.max((x - y).norm() / sc);
            }
        }
    }
    Ok(vec![
        ctx.at_most("hitchin", "phase_point_constraints", constraint, 1e-12),
        ctx.at_most("hitchin", "higgs_residue_direction", resdir, 1e-7),
        ctx.at_most("hitchin", "higgs_condition_iii", cond3, 1e-7),
        ctx.at_most("hitchin", "h_regular_at_points", at_pi, 1e-7),
        ctx.at_most("hitchin", "h_regular_at_p0", at_p0, 1e-7),
        ctx.at_most("hitchin", "h_two_expressions", alt, 1e-8),
        ctx.at_most("hitchin", "h_homogeneous", homog, 1e-12),
        ctx.at_most("hitchin", "hamiltonians_held_out", held, 1e-7),
        ctx.at_most("hitchin", "hamiltonians_commute", comm, 1e-7),
        ctx.at_most("hitchin", "moment_brackets_vanish", moment, 1e-7),
        ctx.at_most("hitchin", "hamiltonians_sl2_invariant", inv, 1e-7),
    ])
}

/// Max normalized commutator over all pairs (α, β).
pub fn commutator_max(ops: &[kzb::DiffOperator], tests: &[crate::numeric::jet::Jet]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..ops.len() {
        for b in a + 1..ops.len() {
            worst = worst.max(kzb::commutator_check(&ops[a], &ops[b], tests)?.max_residual);
        }
    }
    Ok(worst)
}

pub fn kzb_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let cfg = ctx.cfg();
    cfg.require_den()?;
    let mut checks = Vec::new();
    for &k in &ctx.scenario.k {
        let kc = C64::new(k, 0.0);
        let reports: Vec<kzb::PoleReport> = cfg.sites.iter().map(|c| kzb::pole_report(cfg, c, kc)).collect::<Result<_>>()?;
        if (k + 2.0).abs() < 1e-12 {
            let v = reports.iter().map(|r| r.max_singular_relative).fold(0.0, f64::max);
            checks.push(ctx.at_most("kzb", "t_regular_at_critical_level", v, 1e-6));
        } else {
            let expect = 2.0 * (k + 2.0) * k / 4.0;
            let v = reports.iter().map(|r| (r.scalar_c_minus2 - expect).norm()).fold(0.0, f64::max);
            checks.push(ctx.at_most("kzb", &format!("t_double_pole_law_k{k}"), v, 1e-6));
        }
    }
    let crit = kzb::t_diff_alpha(cfg, C64::new(-2.0, 0.0), 2)?;
    checks.push(ctx.at_most("kzb", "t_alpha_held_out", crit.held_out_residual, 1e-6));
    let monos: Vec<_> = kzb::default_monomials(cfg.n()).iter().map(|e| kzb::monomial(&cfg.ell, e, 4)).collect();
    checks.push(ctx.at_most("kzb", "commutators_critical_monomials", commutator_max(&crit.ops, &monos)?, 1e-5));
    if cfg.n() == 6 {
        checks.push(ctx.at_most("kzb", "commutators_critical_invariants", commutator_max(&crit.ops, &kzb::invariant_tests(&cfg.ell))?, 1e-5));
    }
    let pps = phase_points(ctx, cfg)?;
    let ip = Interpolator::holomorphic(cfg, ctx.seed ^ 0x4a11)?;
    let mut sym: f64 = 0.0;
    for pp in &pps {
        let hs = hitchin::extract_hamiltonians_with(cfg, pp, &ip)?;
        let sc = cnorm(&hs.values);
        for (op, h) in crit.ops.iter().zip(&hs.values) {
            sym = sym.max((op.symbol_on(&pp.lam) - kzb::SYMBOL_NORMALIZATION * h).norm() / sc);
        }
    }
    checks.push(ctx.at_most("kzb", "symbol_matches_hamiltonians", sym, 1e-6));
    // μ coefficients are rational in ℓ: jet gradient against differences
    let z = &cfg.generic_points(1, ctx.seed ^ 0x31)?[0];
    let zd = cfg.point_data(z)?;
    let fl = kzb::jet_fields(cfg, &zd, C64::new(1.0, 0.0), 1)?;
    let mut rat: f64 = 0.0;
    for v in 0..cfg.n() {
        let h = 1e-5;
        let mut lp = cfg.ell.clone();
        lp[v] += h;
        let mut lm = cfg.ell.clone();
        lm[v] -= h;
        let (cp, cm) = (cfg.with_ell(lp), cfg.with_ell(lm));
        let fp = kzb::fields(&cp, &cp.ell, &cp.den_data()?, &zd, C64::new(1.0, 0.0));
        let fm = kzb::fields(&cm, &cm.ell, &cm.den_data()?, &zd, C64::new(1.0, 0.0));
        for i in 0..cfg.n() {
            for c in 0..3 {
                let fd = (fp.mu[i].get(c) - fm.mu[i].get(c)) / (2.0 * h);
                let jd = fl.mu[i].get(c).gradient()[v];
                rat = rat.max((fd - jd).norm() / jd.norm().max(fl.mu[i].get(c).value().norm()).max(1.0));
            }
        }
    }
    checks.push(ctx.at_most("kzb", "mu_jet_gradient", rat, 1e-6));
    let mut lam_max: f64 = 0.0;
    for i in 0..cfg.n() {
        let op = kzb::lambda_operator(cfg, i, C64::new(-2.0, 0.0))?;
        let all = op.shifted.iter().chain([&op.scalar, &op.sl2.e, &op.sl2.h, &op.sl2.f]);
        for c in all {
            lam_max = lam_max.max(if c.re.is_finite() && c.im.is_finite() { c.norm() } else { f64::INFINITY });
        }
    }
    checks.push(ctx.at_most("kzb", "lambda_finite", lam_max, 1e12));
    let k0 = kzb::t_diff_alpha(cfg, C64::new(0.0, 0.0), 2)?;
    checks.push(Check::contrast("contrast_commutators_k0", commutator_max(&k0.ops, &monos)?));
    let jac = hecke::delta_ell_jacobian(cfg)?;
    let mut diff: f64 = 0.0;
    for i in 0..cfg.n() {
        let op = kzb::lambda_operator(cfg, i, C64::new(0.0, 0.0))?;
        for (j, c) in op.shifted.iter().enumerate() {
            diff = diff.max((c + jac[(j, i)]).norm() / c.norm().max(1.0));
        }
    }
    checks.push(Check::contrast("contrast_lambda_vs_variation", diff));
    Ok(checks)
}

pub fn variation_suite(ctx: &Ctx) -> Result<Vec<Check>> {
    let cfg = ctx.cfg();
    let om = hecke::omega_matrix(cfg);
    let mut rng = ctx.rng(7);
    let (mut res, mut closed, mut proj, mut idem, mut beta): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..ctx.scenario.samples.max(5) {
        let raw: Vec<C64> = (0..cfg.n()).map(|_| gauss(&mut rng)).collect();
        let dp = hecke::project_delta_p(cfg, &raw);
        proj = proj.max(cnorm(&om.matvec(&dp)) / cnorm(&raw));
        let again = hecke::project_delta_p(cfg, &dp);
        idem = idem.max(cnorm(&again.iter().zip(&dp).map(|(a, b)| a - b).collect::<Vec<_>>()) / cnorm(&dp));
        let v = hecke::bundle_variation(cfg, &dp)?;
        res = res.max(v.residuals.iter().cloned().fold(0.0, f64::max));
        let sc = cnorm(&v.delta_ell).max(1e-300);
        closed = closed.max(cnorm(&v.delta_ell.iter().zip(&v.delta_ell_closed).map(|(a, b)| a - b).collect::<Vec<_>>()) / sc);
        for i in 0..cfg.n() {
            let b = -(v.alpha[i] + dp[i]) / cfg.ell[i];
            beta = beta.max((b - v.beta[i]).norm());
        }
    }
    let zero = hecke::bundle_variation(cfg, &vec![C64::default(); cfg.n()])?;
    let zero_out = cnorm(&zero.alpha).max(cnorm(&zero.beta)).max(cnorm(&zero.delta_ell));
    Ok(vec![
        ctx.at_most("variation", "projection_residual", proj, 1e-12),
        ctx.at_most("variation", "projection_idempotent", idem, 1e-12),
        ctx.at_most("variation", "system_residuals", res, 1e-8),
        ctx.at_most("variation", "delta_ell_closed_form", closed, 1e-8),
        ctx.at_most("variation", "beta_identity", beta, 0.0),
        ctx.at_most("variation", "zero_displacement", zero_out, 0.0),
    ])
}

/// Helper for callers building their own configurations.
pub fn admissible_displacement(cfg: &HeckeConfig, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let raw: Vec<C64> = (0..cfg.n()).map(|_| gauss(rng)).collect();
    hecke::project_delta_p(cfg, &raw)
}
