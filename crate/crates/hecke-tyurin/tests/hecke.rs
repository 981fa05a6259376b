mod common;

use hecke_tyurin::hecke::{self, den_coefficients};
use hecke_tyurin::{Error, C64};
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

#[test]
fn determinant_matches_sum_with_calibrated_sign() {
    for seed in 0..5 {
        let c = common::config(seed);
        let s = hecke::den_sum(&c).unwrap() * hecke::den_sign(2);
        assert!((s - c.den).norm() <= 1e-9 * c.den.norm());
    }
}

#[test]
fn wrong_point_count_is_rejected() {
    let c = common::config(1);
    let pts: Vec<_> = c.sites.iter().take(5).map(|s| s.point).collect();
    let err = hecke::HeckeConfig::new(c.pd().clone(), &pts, c.kernel.p0.point, c.ell[..5].to_vec()).unwrap_err();
    assert!(err.to_string().contains("expected 3g = 6 points"));
}

#[test]
fn coincident_lines_report_their_indices() {
    let c = common::config(2);
    let mut ell = c.ell.clone();
    ell[3] = ell[0];
    ell[5] = ell[0];
    match c.with_ell(ell).require_den() {
        Err(Error::DenZero { indices, .. }) => assert_eq!(indices, vec![0, 3, 5]),
        other => panic!("expected DenZero, got {other:?}"),
    }
}

#[test]
fn smallest_singular_value_collapses_toward_den_zero() {
    let c = common::config(3);
    let target = c.ell[0];
    let at = |t: f64| {
        let mut ell = c.ell.clone();
        for j in [2, 4] {
            ell[j] = ell[j] + (target - ell[j]) * t;
        }
        hecke::fiber_rigidity(&c.with_ell(ell)).smallest_singular_value
    };
    let s0 = at(0.0);
    let (s1, s2) = (at(1.0 - 1e-3), at(1.0 - 1e-6));
    // vanishes to first order in the distance to the coincidence
    assert!(s1 < s0);
    assert!((s2 / s1 / 1e-3 - 1.0).abs() < 1e-2, "{s1:e} {s2:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Den is a polynomial of degree ≤ 2 in each ℓ_j.
    #[test]
    fn den_is_quadratic_in_each_line(seed in 0u64..1000, j in 0usize..6, shift in c64()) {
        let c = common::config(seed);
        let d = den_coefficients(&c, j, None);
        let mut ell = c.ell.clone();
        ell[j] += shift;
        let moved = c.with_ell(ell.clone());
        let scale = c.den_scale();
        prop_assert!((d.reconstruct(&ell[j]) - moved.den).norm() <= 1e-10 * scale);
    }

    #[test]
    fn projection_is_idempotent_and_admissible(seed in 0u64..1000, raw in prop::collection::vec(c64(), 6)) {
        let c = common::config(seed);
        let dp = hecke::project_delta_p(&c, &raw);
        let again = hecke::project_delta_p(&c, &dp);
        let n: f64 = dp.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for (a, b) in dp.iter().zip(&again) {
            prop_assert!((a - b).norm() <= 1e-12 * n);
        }
        let om = hecke::omega_matrix(&c).matvec(&dp);
        let r: f64 = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(om.iter().all(|z| z.norm() <= 1e-12 * r));
    }

    #[test]
    fn variation_satisfies_its_system(seed in 0u64..1000, raw in prop::collection::vec(c64(), 6)) {
        let c = common::config(seed);
        let v = hecke::bundle_variation(&c, &hecke::project_delta_p(&c, &raw)).unwrap();
        prop_assert!(v.residuals.iter().all(|&r| r < 1e-8));
    }

    /// Möbius maps preserve the zero set of Den.
    #[test]
    fn den_zero_set_is_mobius_invariant(seed in 0u64..1000, b in c64(), cc in c64()) {
        let c = common::config(seed);
        let a = C64::new(1.0, 0.0);
        let d = (1.0 + b * cc) / a;
        let mob = |l: C64| (a * l + b) / (cc * l + d);
        prop_assume!(c.ell.iter().all(|l| (cc * l + d).norm() > 1e-3));
        let generic = c.with_ell(c.ell.iter().map(|&l| mob(l)).collect());
        prop_assert!(!generic.den_is_zero());
        let mut tri = c.ell.clone();
        tri[1] = tri[0];
        tri[2] = tri[0];
        prop_assert!(c.with_ell(tri.clone()).den_is_zero());
        prop_assert!(c.with_ell(tri.iter().map(|&l| mob(l)).collect()).den_is_zero());
    }
}
