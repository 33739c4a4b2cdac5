mod common;

use common::*;
use hroots::engine::escalating_trace;
use hroots::oracle::{
    cluster_roots, combinations, independent_roots, reversal_sign, theoretical_error_constant,
    vandermonde, vandermonde_inversed,
};
use hroots::{MpComplex, Polynomial, SeriesKind, SolverConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn reversed_power_matrix_flips_by_sign(args in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=8)) {
        let zs: Vec<_> = args.iter().map(|&(a, b)| mp(Complex64::new(a, b))).collect();
        let v = vandermonde(&zs);
        let got = vandermonde_inversed(&zs);
        let want = v.scale_i64(reversal_sign(zs.len()));
        prop_assert!((&got - &want).abs_f64() <= 2f64.powi(-200) * v.abs_f64().max(1.0));
    }

    #[test]
    fn vandermonde_vanishes_on_repeats(args in prop::collection::vec(dyadic_c(), 1..=5), i in 0usize..5) {
        let mut zs: Vec<_> = args.iter().map(|&z| mp(z)).collect();
        let dup = zs[i % zs.len()].clone();
        zs.push(dup);
        prop_assert!(vandermonde(&zs).is_zero());
    }

    #[test]
    fn combinations_are_sorted_subsets(n in 0usize..9, r in 0usize..5) {
        let c = combinations(n, r);
        prop_assert_eq!(c.len(), if r > n { 0 } else { binomial(n, r) });
        for s in &c {
            prop_assert_eq!(s.len(), r);
            prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.iter().all(|&i| i < n));
        }
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn durand_kerner_finds_the_roots(roots in separated_roots(4, 0.8)) {
        let rs: Vec<_> = roots.iter().map(|&z| (mp(z), 1)).collect();
        let p = Polynomial::from_roots(&rs, &MpComplex::one(PREC)).unwrap();
        let found = cluster_roots(&independent_roots(&p).unwrap(), 1e-6);
        prop_assert_eq!(found.len(), roots.len());
        for (c, m) in &found {
            prop_assert_eq!(*m, 1);
            let near = roots.iter().map(|z| (c.to_c64() - z).norm() / z.norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(near < 1e-30);
        }
    }

    #[test]
    fn ratios_respect_the_error_bound(roots in separated_roots(3, 0.7), mults in prop::collection::vec(1usize..=2, 4)) {
        let zs: Vec<_> = roots.iter().map(|&z| mp(z)).collect();
        let ms = &mults[..zs.len()];
        let rs: Vec<_> = zs.iter().cloned().zip(ms.iter().copied()).collect();
        let p = Polynomial::from_roots(&rs, &MpComplex::one(PREC)).unwrap();
        let cfg = SolverConfig::default();
        for side in [SeriesKind::Taylor, SeriesKind::Laurent] {
            for r in 1..=zs.len() {
                let ec = theoretical_error_constant(&zs, ms, r, side, 0.4).unwrap();
                let t = escalating_trace(&p, side, r, 60, &cfg).unwrap();
                // Values are rounded to f64, hence the epsilon floor.
                for pt in t.points.iter().filter(|pt| pt.k >= ec.k_threshold) {
                    let err = (pt.value - ec.product).norm();
                    prop_assert!(
                        err <= ec.bound(pt.k) * (1.0 + 1e-9) + 8.0 * f64::EPSILON * ec.product.norm(),
                        "side {} r {} k {}: {} > {}", side, r, pt.k, err, ec.bound(pt.k)
                    );
                }
            }
        }
    }
}
