#![allow(dead_code)]

use hroots::MpComplex;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

pub const PREC: usize = 256;

/// Fixed seed so a CI run is reproducible.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn mp(z: Complex64) -> MpComplex {
    MpComplex::from_c64(z, PREC)
}

/// Dyadic rationals `n / 8` so sums and products stay exact.
pub fn dyadic() -> impl Strategy<Value = f64> {
    (-64i32..=64).prop_map(|n| n as f64 / 8.0)
}

pub fn dyadic_c() -> impl Strategy<Value = Complex64> {
    (dyadic(), dyadic()).prop_map(|(a, b)| Complex64::new(a, b))
}

pub fn nonzero_dyadic_c() -> impl Strategy<Value = Complex64> {
    dyadic_c().prop_filter("nonzero", |z| z.norm() > 0.0)
}

pub fn polar(modulus: f64, arg: f64) -> Complex64 {
    Complex64::from_polar(modulus, arg)
}

/// Roots whose moduli are strictly separated: consecutive moduli grow by a
/// factor of at least `1 / max_ratio`.
pub fn separated_roots(max_len: usize, max_ratio: f64) -> impl Strategy<Value = Vec<Complex64>> {
    (
        0.3f64..1.5,
        prop::collection::vec((0.25f64..max_ratio, -3.1f64..3.1), 0..max_len),
        -3.1f64..3.1,
    )
        .prop_map(|(start, steps, arg0)| {
            let mut out = vec![polar(start, arg0)];
            let mut m = start;
            for (q, a) in steps {
                m /= q;
                out.push(polar(m, a));
            }
            out
        })
}

pub fn rel(a: &MpComplex, b: &MpComplex) -> f64 {
    (a - b).abs_f64() / b.abs_f64().max(f64::MIN_POSITIVE)
}
