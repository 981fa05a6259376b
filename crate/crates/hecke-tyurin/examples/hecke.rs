//! Den as a determinant and as a sum, stability of the bundle and the
//! induced variation of the lines under a displacement of the points.

use hecke_tyurin::curve::{CurveSpec, PeriodData};
use hecke_tyurin::hecke::{self, HeckeConfig};
use hecke_tyurin::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn main() -> hecke_tyurin::Result<()> {
    let pd = Arc::new(PeriodData::compute(&CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2])?)?);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = HeckeConfig::random(pd, &mut rng)?;
    let sum = hecke::den_sum(&cfg)? * hecke::den_sign(cfg.genus());
    println!("Den = {:.10}  (sum form {:.10})", cfg.den, sum);
    println!("kernel dims: stability {}, fiber {}", hecke::stability_check(&cfg).kernel_dim, hecke::fiber_rigidity(&cfg).kernel_dim);

    let same = cfg.with_ell(vec![cfg.ell[0]; cfg.n()]);
    println!("equal lines: |Den| relative {:.1e}, stability kernel {}", same.den_relative(), hecke::stability_check(&same).kernel_dim);

    let raw: Vec<C64> = (0..cfg.n()).map(|_| C64::new(hecke::normal(&mut rng), hecke::normal(&mut rng))).collect();
    let dp = hecke::project_delta_p(&cfg, &raw);
    let v = hecke::bundle_variation(&cfg, &dp)?;
    println!("delta l = {:.6?}", v.delta_ell);
    println!("system residuals {:?}", v.residuals);
    Ok(())
}
