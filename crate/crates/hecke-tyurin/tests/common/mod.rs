#![allow(dead_code)]

use hecke_tyurin::curve::{CurveSpec, PeriodData};
use hecke_tyurin::hecke::HeckeConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::{Arc, OnceLock};

pub const CURVE: [f64; 6] = [-3.0, -2.0, -0.5, 0.7, 2.0, 3.2];

/// The genus-2 curve shared by most tests, computed once per binary.
pub fn curve() -> Arc<PeriodData> {
    static PD: OnceLock<Arc<PeriodData>> = OnceLock::new();
    PD.get_or_init(|| Arc::new(PeriodData::compute(&CurveSpec::from_real(&CURVE).unwrap()).unwrap())).clone()
}

pub fn config(seed: u64) -> HeckeConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let c = HeckeConfig::random(curve(), &mut rng).unwrap();
        if !c.den_is_zero() {
            return c;
        }
    }
}
