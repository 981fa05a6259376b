//! End-to-end acceptance run. Each criterion prints one line; the process
//! exits non-zero if any criterion misses its tolerance or time budget.

use hecke_tyurin::curve::{CurveSpec, PeriodData, Site};
use hecke_tyurin::green::KernelContext;
use hecke_tyurin::hecke::{self, HeckeConfig};
use hecke_tyurin::hitchin::{self, Interpolator, PhasePoint};
use hecke_tyurin::kzb;
use hecke_tyurin::numeric::laurent;
use hecke_tyurin::theta::ThetaContext;
use hecke_tyurin::{Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

const CURVE: [f64; 6] = [-3.0, -2.0, -0.5, 0.7, 2.0, 3.2];

struct Outcome {
    id: usize,
    title: &'static str,
    detail: String,
    pass: bool,
    elapsed: Duration,
    budget: Duration,
}

fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn curve() -> Arc<PeriodData> {
    Arc::new(PeriodData::compute(&CurveSpec::from_real(&CURVE).unwrap()).unwrap())
}

/// Random configurations with Den well away from zero.
fn configs(pd: &Arc<PeriodData>, count: usize, seed: u64) -> Result<Vec<HeckeConfig>> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let c = HeckeConfig::random(pd.clone(), &mut r)?;
        if !c.den_is_zero() {
            out.push(c);
        }
    }
    Ok(out)
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a.abs() {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// τ for y² = (x − e1)(x − e2)(x − e3), e1 < e2 < e3, with the A-cycle
/// around [e1, e2] and A-periods normalized to 2πi.
fn agm_tau(e1: f64, e2: f64, e3: f64) -> f64 {
    let k12 = PI / agm((e3 - e1).sqrt(), (e3 - e2).sqrt());
    let k23 = PI / agm((e3 - e1).sqrt(), (e2 - e1).sqrt());
    -2.0 * PI * k23 / k12
}

fn periods() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for e in [[-1.0, 0.0, 1.0], [-1.0, 0.3, 2.0]] {
        let pd = PeriodData::compute(&CurveSpec::from_real(&e)?)?;
        worst = worst.max((pd.tau[0][0] - agm_tau(e[0], e[1], e[2])).norm());
    }
    let mut r = rng(11);
    let (mut asym, mut eig): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for _ in 0..3 {
        // Distinct real parts keep the sorted cut pairing non-crossing.
        let mut re: Vec<f64> = (0..6).map(|i| i as f64 * 1.3 + r.gen_range(-0.4..0.4)).collect();
        re.sort_by(f64::total_cmp);
        let pts: Vec<C64> = re.iter().map(|&x| C64::new(x, r.gen_range(-0.8..0.8))).collect();
        let pd = PeriodData::compute(&CurveSpec::new(pts)?)?;
        asym = asym.max(pd.tau_asymmetry());
        eig = eig.max(*pd.re_tau_eigenvalues().last().unwrap());
    }
    Ok((
        worst <= 1e-9 && asym <= 1e-9 && eig < 0.0,
        format!("AGM deviation {worst:.1e}, asymmetry {asym:.1e}, max eig Re tau {eig:.3}"),
    ))
}

fn random_argument(tau: &[Vec<C64>], r: &mut ChaCha8Rng) -> Vec<C64> {
    let g = tau.len();
    let u: Vec<f64> = (0..g).map(|_| r.gen_range(-0.5..0.5)).collect();
    let v: Vec<f64> = (0..g).map(|_| r.gen_range(-0.5..0.5)).collect();
    (0..g).map(|a| C64::new(0.0, 2.0 * PI * u[a]) + (0..g).map(|b| tau[a][b] * v[b]).sum::<C64>()).collect()
}

fn theta(pd: &PeriodData) -> Result<(bool, String)> {
    let th = pd.theta_context();
    let tau = th.tau().to_vec();
    let g = tau.len();
    let mut r = rng(12);
    let (mut even, mut per, mut quasi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let lam = random_argument(&tau, &mut r);
        let t = th.eval(&lam)?;
        let neg: Vec<C64> = lam.iter().map(|z| -z).collect();
        even = even.max((th.theta(&neg)? - t.value).norm() / t.abs_sum);
        for a in 0..g {
            let mut s = lam.clone();
            s[a] += C64::new(0.0, 2.0 * PI);
            per = per.max((th.theta(&s)? - t.value).norm() / t.abs_sum);
            let s: Vec<C64> = (0..g).map(|b| lam[b] + tau[b][a]).collect();
            let expect = (-0.5 * tau[a][a] - lam[a]).exp() * t.value;
            let got = th.theta(&s)?;
            quasi = quasi.max((got - expect).norm() / got.norm().max(expect.norm()));
        }
    }
    let mut heat: f64 = 0.0;
    let h = 1e-4;
    for _ in 0..3 {
        let lam = random_argument(&tau, &mut r);
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
                heat = heat.max((fd - expect).norm() / expect.norm());
            }
        }
    }
    Ok((
        even <= 1e-11 && per <= 1e-11 && quasi <= 1e-11 && heat <= 1e-6,
        format!("even {even:.1e}, periodic {per:.1e}, quasi-periodic {quasi:.1e}, heat {heat:.1e}"),
    ))
}

fn green(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let g = pd.genus();
    let mut r = rng(13);
    let (mut diag, mut p0res, mut bmono, mut amono): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..5 {
        let pts = hecke::random_points(pd, 3, &mut r);
        let k = KernelContext::new(pd.clone(), pts[0])?;
        let p = pd.site(pts[1])?;
        let z = pd.site(pts[2])?;
        let sep = (p.x() - k.p0.x()).norm();
        let rp = 0.25 * sep.min(pd.model.nearest_branch_distance(p.x())).min(0.04 * pd.scale());
        let w = laurent::probe(&|x| k.omega_kernel(&p, &pd.site_near(&p, x)?), p.x(), rp, laurent::DEFAULT_SAMPLES)?;
        diag = diag.max((w.c(-1) - 1.0).norm());
        let r0 = 0.25 * sep.min(pd.model.nearest_branch_distance(k.p0.x())).min(0.04 * pd.scale());
        let w = laurent::probe(&|x| k.green_g(&pd.site_near(&k.p0, x)?, &p), k.p0.x(), r0, laurent::DEFAULT_SAMPLES)?;
        p0res = p0res.max((w.c(-1) + 1.0).norm());
        let base = k.r_kernel(&p, &z)?;
        for a in 0..g {
            let zb = z.translated(&pd.b_period(a));
            bmono = bmono.max((k.r_kernel(&p, &zb)? - base - p.omega[a]).norm() / p.omega[a].norm().max(1.0));
            let mut shift = vec![C64::default(); g];
            shift[a] = C64::new(0.0, 2.0 * PI);
            amono = amono.max((k.r_kernel(&p, &z.translated(&shift))? - base).norm() / base.norm().max(1.0));
        }
    }
    Ok((
        diag.max(p0res).max(bmono).max(amono) <= 1e-8,
        format!("diagonal {diag:.1e}, P0 {p0res:.1e}, B-shift {bmono:.1e}, A-shift {amono:.1e}"),
    ))
}

fn den_agreement(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for c in configs(pd, 10, 14)? {
        let s = hecke::den_sum(&c)? * hecke::den_sign(2);
        worst = worst.max((s - c.den).norm() / c.den.norm());
    }
    Ok((worst <= 1e-9, format!("max relative {worst:.1e} over 10 samples")))
}

fn stability(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let cs = configs(pd, 20, 15)?;
    let mut generic = 0;
    for c in &cs {
        generic = generic.max(hecke::stability_check(c).kernel_dim).max(hecke::fiber_rigidity(c).kernel_dim);
    }
    // Den = 0 by construction. Equal lines give an endomorphism; g + 1
    // coincident lines already make M singular, so they only enter the
    // fiber check.
    let mut degenerate = usize::MAX;
    for c in cs.iter().take(3) {
        let equal = c.with_ell(vec![c.ell[1]; c.n()]);
        degenerate = degenerate.min(hecke::stability_check(&equal).kernel_dim).min(hecke::fiber_rigidity(&equal).kernel_dim);
        let mut tri = c.ell.clone();
        tri[2] = tri[0];
        tri[4] = tri[0];
        degenerate = degenerate.min(hecke::fiber_rigidity(&c.with_ell(tri)).kernel_dim);
    }
    Ok((
        generic == 0 && degenerate >= 1,
        format!("max kernel dim at Den != 0: {generic}, min kernel dim at Den = 0: {degenerate}"),
    ))
}

fn h_regularity(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (s, cfg) in configs(pd, 5, 16)?.iter().enumerate() {
        let pp = hitchin::sample_phase_point(cfg, s as u64)?;
        let dd = cfg.den_data()?;
        let mut centers: Vec<&Site> = cfg.sites.iter().collect();
        centers.push(&cfg.kernel.p0);
        let mut wins = Vec::new();
        for c in centers {
            let f = |x: C64| Ok(vec![hitchin::hitchin_h_at(cfg, &pp, &dd, &cfg.point_data_near(c, x)?)]);
            wins.push(laurent::probe_many(&f, c.x(), cfg.probe_radius(c.x()), laurent::DEFAULT_SAMPLES)?.remove(0));
        }
        let scale = wins.iter().map(|w| w.c(0).norm()).fold(0.0, f64::max);
        for w in &wins {
            worst = worst.max(w.c(-2).norm().max(w.c(-1).norm()) / scale);
        }
    }
    Ok((worst < 1e-7, format!("max |c-2|, |c-1| relative {worst:.1e} at 6 points + P0, 5 samples")))
}

fn h_commutativity(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let mut comm: f64 = 0.0;
    let mut inv: f64 = 0.0;
    let mut r = rng(17);
    let mats: Vec<_> = (0..5).map(|_| hitchin::random_unimodular(&mut r)).collect();
    for cfg in configs(pd, 4, 17)? {
        let ip = Interpolator::holomorphic(&cfg, 0x4a11)?;
        for s in 0..5 {
            let pp = hitchin::sample_phase_point(&cfg, 100 + s)?;
            let jets = hitchin::hamiltonian_jets(&cfg, &pp, &ip)?;
            for a in 0..jets.len() {
                for b in a + 1..jets.len() {
                    comm = comm.max(hitchin::normalized_bracket(&jets[a], &jets[b]));
                }
            }
            if s == 0 {
                let hs = hitchin::extract_hamiltonians_with(&cfg, &pp, &ip)?;
                for m in &mats {
                    let hq = hitchin::extract_hamiltonians_with(&cfg, &hitchin::sl2_action(*m, &pp)?, &ip)?;
                    let d: Vec<C64> = hs.values.iter().zip(&hq.values).map(|(x, y)| x - y).collect();
                    inv = inv.max(cnorm(&d) / cnorm(&hs.values));
                }
            }
        }
    }
    Ok((comm < 1e-7 && inv < 1e-7, format!("bracket {comm:.1e} on 20 samples, SL2 deviation {inv:.1e}")))
}

fn h_expressions(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (s, cfg) in configs(pd, 5, 18)?.iter().enumerate() {
        let pp = hitchin::sample_phase_point(cfg, s as u64)?;
        for z in cfg.generic_points(10, 7 + s as u64)? {
            let a = hitchin::hitchin_h(cfg, &pp, &z)?;
            let b = hitchin::hitchin_h_alt(cfg, &pp, &z)?;
            worst = worst.max((a - b).norm() / a.norm().max(b.norm()));
        }
    }
    Ok((worst <= 1e-8, format!("max relative {worst:.1e} over 10 points x 5 samples")))
}

fn pole_law(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let (mut law, mut crit): (f64, f64) = (0.0, 0.0);
    let expect = 2.0 * 3.0 * 1.0 / 4.0;
    for cfg in configs(pd, 2, 19)? {
        for c in &cfg.sites {
            law = law.max((kzb::pole_report(&cfg, c, C64::new(1.0, 0.0))?.scalar_c_minus2 - expect).norm());
            crit = crit.max(kzb::pole_report(&cfg, c, C64::new(-2.0, 0.0))?.max_singular_relative);
        }
    }
    Ok((law <= 1e-6 && crit < 1e-6, format!("k=1 deviation from 3/2 {law:.1e}, k=-2 singular part {crit:.1e}")))
}

fn critical_commutators(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let base = &configs(pd, 1, 20)?[0];
    let mut r = rng(20);
    let (mut crit, mut k0): (f64, f64) = (0.0, 0.0);
    let mut done = 0;
    while done < 3 {
        let ell: Vec<C64> = (0..base.n()).map(|_| C64::new(hecke::normal(&mut r), hecke::normal(&mut r))).collect();
        let cfg = base.with_ell(ell);
        if cfg.den_is_zero() {
            continue;
        }
        let monos: Vec<_> = kzb::default_monomials(cfg.n()).iter().map(|e| kzb::monomial(&cfg.ell, e, 4)).collect();
        let t = kzb::t_diff_alpha(&cfg, C64::new(-2.0, 0.0), 2)?;
        let t0 = kzb::t_diff_alpha(&cfg, C64::new(0.0, 0.0), 2)?;
        for a in 0..3 {
            for b in a + 1..3 {
                crit = crit.max(kzb::commutator_check(&t.ops[a], &t.ops[b], &monos)?.max_residual);
                k0 = k0.max(kzb::commutator_check(&t0.ops[a], &t0.ops[b], &monos)?.max_residual);
            }
        }
        done += 1;
    }
    Ok((crit < 1e-5, format!("k=-2 residual {crit:.1e} (k=0 contrast {k0:.1e}, not asserted)")))
}

fn variation(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let cfg = &configs(pd, 1, 21)?[0];
    let mut r = rng(21);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let raw: Vec<C64> = (0..cfg.n()).map(|_| C64::new(hecke::normal(&mut r), hecke::normal(&mut r))).collect();
        let v = hecke::bundle_variation(cfg, &hecke::project_delta_p(cfg, &raw))?;
        worst = worst.max(v.residuals.iter().cloned().fold(0.0, f64::max));
    }
    Ok((worst <= 1e-8, format!("max system residual {worst:.1e} over 5 draws")))
}

fn symbol(pd: &Arc<PeriodData>) -> Result<(bool, String)> {
    let cfg = &configs(pd, 1, 22)?[0];
    let t = kzb::t_diff_alpha(cfg, C64::new(-2.0, 0.0), 2)?;
    let ip = Interpolator::holomorphic(cfg, 0x4a11)?;
    let mut worst: f64 = 0.0;
    for s in 0..3 {
        let pp: PhasePoint = hitchin::sample_phase_point(cfg, 300 + s)?;
        let hs = hitchin::extract_hamiltonians_with(cfg, &pp, &ip)?;
        let sc = cnorm(&hs.values);
        for (op, h) in t.ops.iter().zip(&hs.values) {
            worst = worst.max((op.symbol_on(&pp.lam) - kzb::SYMBOL_NORMALIZATION * h).norm() / sc);
        }
    }
    Ok((worst <= 1e-6, format!("max relative {worst:.1e} over 3 samples")))
}

type Criterion = (usize, &'static str, u64, fn(&Arc<PeriodData>) -> Result<(bool, String)>);

fn main() {
    let pd = curve();
    let list: Vec<Criterion> = vec![
        (1, "period correctness", 10, |_| periods()),
        (2, "theta identities", 5, |pd| theta(pd)),
        (3, "green kernels", 30, green),
        (4, "Den agreement", 5, den_agreement),
        (5, "stability and rigidity", 10, stability),
        (6, "Hitchin regularity", 60, h_regularity),
        (7, "Hitchin commutativity", 120, h_commutativity),
        (8, "two H expressions", 30, h_expressions),
        (9, "T^diff pole law", 120, pole_law),
        (10, "critical-level commutativity", 300, critical_commutators),
        (11, "variation consistency", 10, variation),
        (12, "symbol vs Hamiltonians", 60, symbol),
    ];
    // Criteria run one at a time so each timing is its own.
    let outcomes: Vec<Outcome> = list
        .into_iter()
        .map(|(id, title, budget, f)| {
            let t = Instant::now();
            let (pass, detail) = match f(&pd) {
                Ok(x) => x,
                Err(e) => (false, format!("error: {e}")),
            };
            let elapsed = t.elapsed();
            let budget = Duration::from_secs(budget);
            Outcome { id, title, detail, pass: pass && elapsed < budget, elapsed, budget }
        })
        .collect();
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "[{}] {:>2}. {:<30} {}  ({:.2} s of {} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail,
            o.elapsed.as_secs_f64(),
            o.budget.as_secs()
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
