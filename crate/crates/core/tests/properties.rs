use gafzeros_core::deviations::{lemma_check, LemmaEvent};
use gafzeros_core::intensity::{density_closed, density_numeric};
use gafzeros_core::montecarlo::wilson;
use gafzeros_core::num_complex::Complex64;
use gafzeros_core::rigidity::{random_unitary, KernelModel};
use gafzeros_core::zeros::{count_region_jittered, locate_polynomial};
use gafzeros_core::{Ensemble, Kernel, Polynomial, Region, SeedPath};
use proptest::prelude::*;

fn point(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_hermitian(z in point(0.9), w in point(0.9)) {
        for e in [Ensemble::planar(1.0).unwrap(), Ensemble::hyperbolic(0.95).unwrap(), Ensemble::kostlan(7, 1.0).unwrap()] {
            let kzw = e.kernel(z, w).unwrap();
            let kwz = e.kernel(w, z).unwrap();
            prop_assert!((kzw - kwz.conj()).norm() <= 1e-12 * kzw.norm().max(1.0));
            let diag = e.kernel(z, z).unwrap();
            prop_assert!((diag.re - e.squared_norm(z).unwrap()).abs() <= 1e-12 * diag.re);
            prop_assert!(diag.im.abs() <= 1e-12 * diag.re);
        }
    }

    #[test]
    fn truncated_series_matches_closed_form(z in point(0.5)) {
        let e = Ensemble::hyperbolic(0.5).unwrap();
        let closed = e.squared_norm(z).unwrap();
        let series = e.truncated_squared_norm(z).unwrap();
        prop_assert!((closed - series).abs() <= 1e-6 * closed);
    }

    #[test]
    fn numeric_density_is_close_to_closed(z in point(0.7)) {
        let e = Ensemble::kostlan(9, 2.0).unwrap();
        let d = density_numeric(&e, z, 1e-3).unwrap();
        prop_assert!((d - density_closed(e.family(), z).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn planted_roots_are_found(roots in prop::collection::vec(point(0.8), 1..6)) {
        // keep planted roots away from the contour and from each other
        prop_assume!(roots.iter().all(|r| (r.norm() - 1.0).abs() > 0.05));
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                prop_assume!((a - b).norm() > 1e-3);
            }
        }
        let p = Polynomial::from_roots(&roots);
        let region = Region::disk(Complex64::new(0.0, 0.0), 1.0).unwrap();
        let (count, _) = count_region_jittered(&p, &region, roots.len()).unwrap();
        prop_assert_eq!(count.count, roots.len());
        let zs = locate_polynomial(&p, &region).unwrap();
        prop_assert_eq!(zs.total(), roots.len());
        for r in &roots {
            prop_assert!(zs.zeros.iter().any(|z| (z.location - r).norm() < 1e-8));
        }
    }

    #[test]
    fn wilson_contains_the_proportion(k in 0u64..500, extra in 0u64..500) {
        let n = k + extra + 1;
        let ci = wilson(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(ci.lower <= p && p <= ci.upper);
        prop_assert!(0.0 <= ci.lower && ci.upper <= 1.0);
    }

    #[test]
    fn lemma_holds_on_sublevel_sets(sigma in 0.05f64..20.0, s in 0.01f64..3.0) {
        let r = lemma_check(sigma, &LemmaEvent::Sublevel { s: s * sigma }).unwrap();
        prop_assert!(r.holds, "lhs {} rhs {}", r.lhs, r.rhs);
        prop_assert!(r.jensen_holds);
    }

    #[test]
    fn unitary_mixing_preserves_the_diagonal(seed in any::<u64>(), z in point(1.0)) {
        let m = KernelModel::new(
            vec![Polynomial::from_real(&[1.0, 0.3]), Polynomial::from_real(&[0.0, 1.0, 0.5]), Polynomial::from_real(&[0.2, 0.0, 0.0, 1.0])],
            None,
        ).unwrap();
        let u = random_unitary(3, &mut SeedPath::new(seed, 0).rng());
        let m2 = m.transformed(&u, &Polynomial::from_real(&[0.0])).unwrap();
        prop_assert!((m.log_squared_norm(z) - m2.log_squared_norm(z)).abs() < 1e-12);
    }
}
