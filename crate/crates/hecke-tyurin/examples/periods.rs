//! Period matrix of a genus-2 curve, the theta shift and the Abel map.
//!
//!     cargo run --example periods

use hecke_tyurin::curve::{CurveSpec, PeriodData, SurfacePoint};
use hecke_tyurin::C64;

fn main() -> hecke_tyurin::Result<()> {
    // y^2 = x^3 - x has tau = -2 pi with A-periods normalized to 2 pi i.
    let pd = PeriodData::compute(&CurveSpec::from_real(&[-1.0, 0.0, 1.0])?)?;
    println!("genus 1: tau = {:.12}  (-2 pi = {:.12})", pd.tau[0][0].re, -2.0 * std::f64::consts::PI);

    let pd = PeriodData::compute(&CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2])?)?;
    println!("genus 2: curve hash {}", pd.hash());
    for row in &pd.tau {
        println!("  [{:+.10} {:+.10}]", row[0], row[1]);
    }
    println!("asymmetry {:.1e}, Re tau eigenvalues {:?}", pd.tau_asymmetry(), pd.re_tau_eigenvalues());
    println!("kappa0 characteristic {:?}", pd.kappa_characteristic);

    let q = SurfacePoint::upper(C64::new(1.3, -0.6));
    let a = pd.abel_map(&q)?;
    let b = pd.abel_map_via(&q, &[C64::new(0.0, 2.0)])?;
    let d: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    println!("A(q) = {a:.8?}");
    println!("two paths differ by a lattice vector up to {:.1e}", pd.lattice_distance(&d)?);
    Ok(())
}
