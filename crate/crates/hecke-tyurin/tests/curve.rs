mod common;

use hecke_tyurin::curve::{validate_cut_layout, CurveSpec, PeriodData, SurfacePoint};
use hecke_tyurin::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn lemniscatic_tau() {
    let pd = PeriodData::compute(&CurveSpec::from_real(&[-1.0, 0.0, 1.0]).unwrap()).unwrap();
    assert!((pd.tau[0][0] - C64::new(-2.0 * PI, 0.0)).norm() < 1e-9);
}

#[test]
fn a_periods_are_normalized() {
    let pd = common::curve();
    for a in 0..2 {
        let v = pd.a_cycle_integral(a).unwrap();
        for (b, z) in v.iter().enumerate() {
            let expect = if a == b { C64::new(0.0, 2.0 * PI) } else { C64::default() };
            assert!((z - expect).norm() < 1e-9);
        }
    }
}

#[test]
fn overlapping_cuts_are_rejected() {
    let segs = [(C64::new(0.0, 0.0), C64::new(2.0, 0.0)), (C64::new(1.0, 0.0), C64::new(3.0, 0.0))];
    assert!(matches!(validate_cut_layout(&segs, 3.0), Err(Error::UnsupportedConfiguration(_))));
    let crossing = [(C64::new(0.0, -1.0), C64::new(0.0, 1.0)), (C64::new(-1.0, 0.0), C64::new(1.0, 0.0))];
    assert!(validate_cut_layout(&crossing, 2.0).is_err());
    let disjoint = [(C64::new(0.0, 0.0), C64::new(1.0, 0.0)), (C64::new(2.0, 0.0), C64::new(3.0, 0.0))];
    assert!(validate_cut_layout(&disjoint, 3.0).is_ok());
}

#[test]
fn repeated_branch_points_are_invalid() {
    assert!(CurveSpec::from_real(&[0.0, 1.0, 1.0]).is_err());
}

#[test]
fn theta_vanishes_at_kappa() {
    let pd = common::curve();
    let t = pd.theta_context().eval(&pd.kappa0).unwrap();
    assert!(t.value.norm() < 1e-10 * t.abs_sum);
}

#[test]
fn abel_map_of_conjugate_sheet_is_opposite() {
    let pd = common::curve();
    let p = SurfacePoint::upper(C64::new(1.3, -0.6));
    let a = pd.abel_map(&p).unwrap();
    let b = pd.abel_map(&p.involution()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x + y).norm() < 1e-10);
    }
}

#[test]
fn cache_round_trip_and_hash_check() {
    let pd = common::curve();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g2.json");
    pd.cache_store(&path).unwrap();
    let back = PeriodData::cache_load(&path, &pd.curve, &pd.settings).unwrap();
    assert_eq!(back.tau, pd.tau);
    let mut moved = common::CURVE;
    moved[2] += 1e-3;
    let other = CurveSpec::from_real(&moved).unwrap();
    assert!(matches!(PeriodData::cache_load(&path, &other, &pd.settings), Err(Error::HashMismatch { .. })));
    let missing = dir.path().join("none.json");
    assert!(matches!(PeriodData::cache_load(&missing, &pd.curve, &pd.settings), Err(Error::NotFound(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Complex branch points with separated real parts: τ symmetric with
    /// negative definite real part, bilinear relations hold.
    #[test]
    fn random_genus_two_periods(jitter in prop::collection::vec((-0.4..0.4f64, -0.8..0.8f64), 6)) {
        let pts: Vec<C64> = jitter.iter().enumerate().map(|(i, (a, b))| C64::new(1.3 * i as f64 + a, *b)).collect();
        let pd = PeriodData::compute(&CurveSpec::new(pts).unwrap()).unwrap();
        prop_assert!(pd.tau_asymmetry() < 1e-9);
        prop_assert!(pd.bilinear_asymmetry() < 1e-9);
        prop_assert!(*pd.re_tau_eigenvalues().last().unwrap() < 0.0);
    }

    #[test]
    fn abel_map_is_path_independent(x in -2.5..2.5f64, y in 0.3..1.5f64, w in -1.0..1.0f64) {
        let pd = common::curve();
        let p = SurfacePoint::upper(C64::new(x, -y));
        let a = pd.abel_map(&p).unwrap();
        let b = pd.abel_map_via(&p, &[C64::new(w, 2.0)]).unwrap();
        let d: Vec<C64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
        prop_assert!(pd.lattice_distance(&d).unwrap() < 1e-8);
    }
}
