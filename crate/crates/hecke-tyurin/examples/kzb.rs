//! Second-order operators T_alpha: pole law at the points, commutators at
//! the critical level and away from it, principal symbol.

use hecke_tyurin::curve::{CurveSpec, PeriodData};
use hecke_tyurin::hecke::HeckeConfig;
use hecke_tyurin::hitchin::{self, Interpolator};
use hecke_tyurin::{kzb, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn max_commutator(t: &kzb::TDiffAlpha, tests: &[hecke_tyurin::numeric::jet::Jet]) -> hecke_tyurin::Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in a + 1..3 {
            worst = worst.max(kzb::commutator_check(&t.ops[a], &t.ops[b], tests)?.max_residual);
        }
    }
    Ok(worst)
}

fn main() -> hecke_tyurin::Result<()> {
    let pd = Arc::new(PeriodData::compute(&CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2])?)?);
    let cfg = HeckeConfig::random(pd, &mut ChaCha8Rng::seed_from_u64(7))?;
    for k in [1.0, -2.0] {
        let r = kzb::pole_report(&cfg, &cfg.sites[0], C64::new(k, 0.0))?;
        println!("k = {k:+}: (dz/z)^2 coefficient {:.10}, expected {}", r.scalar_c_minus2, (k + 2.0) * k / 2.0);
    }
    let tests: Vec<_> = kzb::default_monomials(cfg.n()).iter().map(|e| kzb::monomial(&cfg.ell, e, 4)).collect();
    let crit = kzb::t_diff_alpha(&cfg, C64::new(-2.0, 0.0), 2)?;
    let k0 = kzb::t_diff_alpha(&cfg, C64::new(0.0, 0.0), 2)?;
    println!("max commutator: k = -2 {:.1e}, k = 0 {:.1e}", max_commutator(&crit, &tests)?, max_commutator(&k0, &tests)?);

    let pp = hitchin::sample_phase_point(&cfg, 1)?;
    let hs = hitchin::extract_hamiltonians_with(&cfg, &pp, &Interpolator::holomorphic(&cfg, 0x4a11)?)?;
    for (a, op) in crit.ops.iter().enumerate() {
        println!("alpha {a}: symbol {:.8}, H {:.8}", op.symbol_on(&pp.lam), hs.values[a]);
    }
    Ok(())
}
