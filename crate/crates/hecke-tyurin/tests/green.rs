mod common;

use hecke_tyurin::curve::SurfacePoint;
use hecke_tyurin::green::KernelContext;
use hecke_tyurin::numeric::laurent;
use hecke_tyurin::C64;
use proptest::prelude::*;
use std::sync::Arc;

fn residue_at_diagonal(k: &KernelContext, p: SurfacePoint) -> C64 {
    let pd = &k.pd;
    let p = pd.site(p).unwrap();
    let w = laurent::probe(&|x| k.omega_kernel(&p, &pd.site_near(&p, x)?), p.x(), 0.03, laurent::DEFAULT_SAMPLES).unwrap();
    w.c(-1)
}

#[test]
fn residues_do_not_depend_on_the_theta_shift() {
    let pd = common::curve();
    let other = Arc::new(pd.with_kappa_choice(1).unwrap());
    let p0 = SurfacePoint::upper(C64::new(0.9, 1.6));
    let p = SurfacePoint::upper(C64::new(-1.2, 0.5));
    let a = residue_at_diagonal(&KernelContext::new(pd, p0).unwrap(), p);
    let b = residue_at_diagonal(&KernelContext::new(other, p0).unwrap(), p);
    assert!((a - 1.0).norm() < 1e-8 && (b - 1.0).norm() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn green_residues(px in -2.5..2.5f64, py in 0.4..1.2f64) {
        let pd = common::curve();
        let k = KernelContext::new(pd.clone(), SurfacePoint::upper(C64::new(0.9, 1.6))).unwrap();
        let p = pd.site(SurfacePoint::upper(C64::new(px, -py))).unwrap();
        let w = laurent::probe(&|x| k.omega_kernel(&p, &pd.site_near(&p, x)?), p.x(), 0.05, laurent::DEFAULT_SAMPLES).unwrap();
        prop_assert!((w.c(-1) - 1.0).norm() < 1e-8);
        let w = laurent::probe(&|x| k.green_g(&pd.site_near(&k.p0, x)?, &p), k.p0.x(), 0.05, laurent::DEFAULT_SAMPLES).unwrap();
        prop_assert!((w.c(-1) + 1.0).norm() < 1e-8);
    }

    #[test]
    fn r_kernel_shifts_by_omega_along_b_cycles(zx in -2.5..2.5f64, zy in 0.4..1.2f64) {
        let pd = common::curve();
        let k = KernelContext::new(pd.clone(), SurfacePoint::upper(C64::new(0.9, 1.6))).unwrap();
        let p = pd.site(SurfacePoint::upper(C64::new(-1.2, 0.5))).unwrap();
        let z = pd.site(SurfacePoint::upper(C64::new(zx, zy))).unwrap();
        let base = k.r_kernel(&p, &z).unwrap();
        for a in 0..2 {
            let shifted = k.r_kernel(&p, &z.translated(&pd.b_period(a))).unwrap();
            prop_assert!((shifted - base - p.omega[a]).norm() < 1e-8 * p.omega[a].norm().max(1.0));
        }
    }
}
