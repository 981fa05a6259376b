//! Higgs field, tr A^2 and the Hitchin Hamiltonians on a constrained
//! phase point.

use hecke_tyurin::curve::{CurveSpec, PeriodData};
use hecke_tyurin::hecke::HeckeConfig;
use hecke_tyurin::hitchin::{self, Interpolator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn main() -> hecke_tyurin::Result<()> {
    let pd = Arc::new(PeriodData::compute(&CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2])?)?);
    let cfg = HeckeConfig::random(pd, &mut ChaCha8Rng::seed_from_u64(7))?;
    let pp = hitchin::sample_phase_point(&cfg, 1)?;
    println!("moment constraints {:.1e}", pp.constraint_residual());

    let z = &cfg.generic_points(1, 3)?[0];
    let h = hitchin::hitchin_h(&cfg, &pp, z)?;
    let h_alt = hitchin::hitchin_h_alt(&cfg, &pp, z)?;
    println!("H(z) = {h:.10}, second expression differs by {:.1e}", (h - h_alt).norm() / h.norm());

    let ip = Interpolator::holomorphic(&cfg, 0x4a11)?;
    let hs = hitchin::extract_hamiltonians_with(&cfg, &pp, &ip)?;
    println!("H_alpha = {:.8?} (held-out residual {:.1e})", hs.values, hs.held_out_residual);
    let jets = hitchin::hamiltonian_jets(&cfg, &pp, &ip)?;
    for a in 0..3 {
        for b in a + 1..3 {
            println!("{{H_{a}, H_{b}}} = {:.1e}", hitchin::normalized_bracket(&jets[a], &jets[b]));
        }
    }
    Ok(())
}
