use hecke_tyurin::numeric::jet::{Jet, JetSpace};
use hecke_tyurin::numeric::laurent;
use hecke_tyurin::numeric::linalg::{det_lu, CMatrix};
use hecke_tyurin::numeric::quad::{contour_integrate_vec, Contour, QuadSettings};
use hecke_tyurin::C64;
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn jet6(coeffs: Vec<C64>) -> Jet {
    let sp = JetSpace::get(6, 2);
    let mut c = coeffs;
    c.resize(sp.len(), C64::default());
    Jet::from_coeffs(&sp, c)
}

fn close(a: &Jet, b: &Jet) -> f64 {
    (a - b).max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jet_product_commutes_and_associates(a in prop::collection::vec(c64(), 28), b in prop::collection::vec(c64(), 28), c in prop::collection::vec(c64(), 28)) {
        let (a, b, c) = (jet6(a), jet6(b), jet6(c));
        prop_assert!(close(&(&a * &b), &(&b * &a)) < 1e-14);
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c))) < 1e-13);
    }

    #[test]
    fn det_is_multiplicative(a in prop::collection::vec(c64(), 36), b in prop::collection::vec(c64(), 36)) {
        let ma = CMatrix::from_fn(6, 6, |i, j| a[6 * i + j]);
        let mb = CMatrix::from_fn(6, 6, |i, j| b[6 * i + j]);
        let lhs = det_lu(&ma.matmul(&mb));
        let rhs = det_lu(&ma) * det_lu(&mb);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-300));
    }

    #[test]
    fn laurent_probe_recovers_rational_coefficients(cm2 in c64(), cm1 in c64(), c0 in c64(), pole in c64()) {
        // f = cm2/z² + cm1/z + c0 + 1/(z − 3 − pole) around z = 0
        let far = C64::new(3.0, 0.0) + pole;
        let f = |z: C64| Ok(cm2 / (z * z) + cm1 / z + c0 + 1.0 / (z - far));
        let w = laurent::probe(&f, C64::default(), 0.2, laurent::DEFAULT_SAMPLES).unwrap();
        prop_assert!((w.c(-2) - cm2).norm() < 1e-10);
        prop_assert!((w.c(-1) - cm1).norm() < 1e-10);
        prop_assert!((w.c(0) - (c0 - 1.0 / far)).norm() < 1e-10);
    }

    #[test]
    fn contour_integral_does_not_depend_on_subdivision(pieces in 1usize..9, r in 0.5..2.0f64) {
        let path = Contour::Circle { center: C64::new(0.1, 0.0), radius: r };
        let f = |z: C64| vec![z.exp() / z, 1.0 / (z * z)];
        let a = contour_integrate_vec(&f, &path, pieces, QuadSettings::default()).unwrap();
        let b = contour_integrate_vec(&f, &path, 4, QuadSettings::default()).unwrap();
        prop_assert!((a[0] - b[0]).norm() < 1e-12 && (a[1] - b[1]).norm() < 1e-12);
        prop_assert!((a[0] - C64::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-12);
    }
}

#[test]
fn polynomial_products_are_exact_up_to_order() {
    // (1 + x + y)(1 − x + 2y) truncated at order 2
    let sp = JetSpace::get(2, 2);
    let v = Jet::variables(&sp, &[C64::default(), C64::default()]);
    let one = C64::new(1.0, 0.0);
    let p = v[0].add_const(one) + &v[1];
    let q = (&v[1].scale(C64::new(2.0, 0.0)) - &v[0]).add_const(one);
    let r = &p * &q;
    let expect = [(vec![0, 0], 1.0), (vec![1, 0], 0.0), (vec![0, 1], 3.0), (vec![2, 0], -1.0), (vec![1, 1], 1.0), (vec![0, 2], 2.0)];
    for (e, c) in expect {
        assert!((r.coeff(&e) - c).norm() < 1e-15, "{e:?}");
    }
}

#[test]
fn division_by_vanishing_jet_is_an_error() {
    let sp = JetSpace::get(1, 2);
    let x = Jet::variable(&sp, 0, C64::default());
    assert!(x.try_recip(1e-14).is_err());
}
