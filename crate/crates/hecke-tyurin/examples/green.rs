//! Green kernel residues and the B-cycle shift of r^(P).

use hecke_tyurin::curve::{CurveSpec, PeriodData, SurfacePoint};
use hecke_tyurin::green::KernelContext;
use hecke_tyurin::numeric::laurent;
use hecke_tyurin::C64;
use std::sync::Arc;

fn main() -> hecke_tyurin::Result<()> {
    let pd = Arc::new(PeriodData::compute(&CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2])?)?);
    let k = KernelContext::new(pd.clone(), SurfacePoint::upper(C64::new(0.9, 1.6)))?;
    let p = pd.site(SurfacePoint::upper(C64::new(-1.2, 0.5)))?;
    let w = laurent::probe(&|x| k.omega_kernel(&p, &pd.site_near(&p, x)?), p.x(), 0.05, laurent::DEFAULT_SAMPLES)?;
    println!("res_(z=P) omega^(P) = {:.12}", w.c(-1));
    let w = laurent::probe(&|x| k.green_g(&pd.site_near(&k.p0, x)?, &p), k.p0.x(), 0.05, laurent::DEFAULT_SAMPLES)?;
    println!("res_(z=P0) G(z, P) = {:.12}", w.c(-1));
    let z = pd.site(SurfacePoint::upper(C64::new(1.3, -0.6)))?;
    for a in 0..pd.genus() {
        let shift = k.r_kernel(&p, &z.translated(&pd.b_period(a)))? - k.r_kernel(&p, &z)?;
        println!("B_{a} shift {:.12}  omega_{a}(P) {:.12}", shift, p.omega[a]);
    }
    Ok(())
}
