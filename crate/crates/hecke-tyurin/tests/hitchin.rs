mod common;

use hecke_tyurin::hitchin::{self, Interpolator, PhasePoint, SL2Vector};
use hecke_tyurin::numeric::laurent;
use hecke_tyurin::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mat_mul(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut m = [[C64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / x.norm().max(1.0)).fold(0.0, f64::max)
}

#[test]
fn trace_form_pairing() {
    let x = SL2Vector::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    assert_eq!(x.pair(&x), C64::new(2.0, 0.0));
    let e = SL2Vector::new(C64::new(1.0, 0.0), C64::default(), C64::default());
    let f = SL2Vector::new(C64::default(), C64::default(), C64::new(1.0, 0.0));
    assert_eq!(e.pair(&f), C64::new(1.0, 0.0));
}

#[test]
fn h_is_regular_at_a_marked_point() {
    let cfg = common::config(4);
    let pp = hitchin::sample_phase_point(&cfg, 9).unwrap();
    let dd = cfg.den_data().unwrap();
    let c = &cfg.sites[2];
    let f = |x: C64| Ok(vec![hitchin::hitchin_h_at(&cfg, &pp, &dd, &cfg.point_data_near(c, x)?)]);
    let w = laurent::probe_many(&f, c.x(), cfg.probe_radius(c.x()), laurent::DEFAULT_SAMPLES).unwrap();
    let sc = w[0].c(0).norm();
    assert!(w[0].c(-2).norm() < 1e-7 * sc && w[0].c(-1).norm() < 1e-7 * sc);
}

#[test]
fn hamiltonians_poisson_commute() {
    let cfg = common::config(5);
    let pp = hitchin::sample_phase_point(&cfg, 1).unwrap();
    let ip = Interpolator::holomorphic(&cfg, 0x4a11).unwrap();
    let jets = hitchin::hamiltonian_jets(&cfg, &pp, &ip).unwrap();
    assert_eq!(jets.len(), 3);
    for a in 0..3 {
        for b in a + 1..3 {
            assert!(hitchin::normalized_bracket(&jets[a], &jets[b]) < 1e-7);
        }
    }
}

#[test]
fn off_constraint_points_are_rejected() {
    let cfg = common::config(6);
    let pp = PhasePoint { ell: cfg.ell.clone(), lam: vec![C64::new(1.0, 0.0); 6] };
    assert!(pp.constraint_residual() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Acting by g₂ then g₁ equals acting by g₁g₂, and constraints survive.
    #[test]
    fn sl2_action_is_a_group_action(seed in 0u64..10_000) {
        let cfg = common::config(seed % 7);
        let pp = hitchin::sample_phase_point(&cfg, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = hitchin::random_unimodular(&mut rng);
        let g2 = hitchin::random_unimodular(&mut rng);
        let (Ok(step), Ok(direct)) = (hitchin::sl2_action(g2, &pp), hitchin::sl2_action(mat_mul(g1, g2), &pp)) else {
            return Ok(());
        };
        let Ok(twice) = hitchin::sl2_action(g1, &step) else { return Ok(()) };
        prop_assert!(max_diff(&twice.ell, &direct.ell) < 1e-9);
        prop_assert!(max_diff(&twice.lam, &direct.lam) < 1e-9);
        let scale = pp.lam.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(direct.constraint_residual() < 1e-8 * scale.max(1.0));
    }

    #[test]
    fn h_is_homogeneous_of_degree_two(seed in 0u64..1000, s in 0.1..5.0f64) {
        let cfg = common::config(seed % 5);
        let pp = hitchin::sample_phase_point(&cfg, seed).unwrap();
        let z = &cfg.generic_points(1, seed).unwrap()[0];
        let a = hitchin::hitchin_h(&cfg, &pp, z).unwrap();
        let b = hitchin::hitchin_h(&cfg, &pp.scaled_lambda(s), z).unwrap();
        prop_assert!((b - s * s * a).norm() <= 1e-12 * (s * s * a).norm());
    }

    #[test]
    fn two_expressions_for_h_agree(seed in 0u64..1000) {
        let cfg = common::config(seed % 5);
        let pp = hitchin::sample_phase_point(&cfg, seed).unwrap();
        for z in cfg.generic_points(3, seed).unwrap() {
            let a = hitchin::hitchin_h(&cfg, &pp, &z).unwrap();
            let b = hitchin::hitchin_h_alt(&cfg, &pp, &z).unwrap();
            prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(b.norm()));
        }
    }
}
