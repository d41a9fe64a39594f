use erl_core::symplectic::{build_sigma, is_symplectic, poisson_bracket_linear, random_symplectic};
use proptest::prelude::*;

fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, d)
}

proptest! {
    #[test]
    fn sigma_is_skew_and_its_own_negative_inverse(n in 1usize..6) {
        let s = build_sigma(n).unwrap();
        prop_assert_eq!(s.transpose(), -&s);
        let id = nalgebra::DMatrix::<f64>::identity(2 * n, 2 * n);
        prop_assert_eq!(&s * &s, -id);
    }

    #[test]
    fn random_maps_are_symplectic_with_unit_determinant(n in 1usize..4, seed in any::<u64>()) {
        let s = random_symplectic(n, seed).unwrap();
        prop_assert!(s.is_symplectic(1e-8));
        prop_assert!((s.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn composition_stays_symplectic(n in 1usize..4, a in any::<u64>(), b in any::<u64>()) {
        let s = random_symplectic(n, a).unwrap().then(&random_symplectic(n, b).unwrap());
        prop_assert!(is_symplectic(s.matrix(), 1e-8).unwrap());
    }

    #[test]
    fn bracket_is_antisymmetric(u in coords(4), v in coords(4)) {
        prop_assert_eq!(poisson_bracket_linear(&u, &v).unwrap(), -poisson_bracket_linear(&v, &u).unwrap());
    }

    #[test]
    fn bracket_is_symplectic_invariant(u in coords(4), v in coords(4), seed in any::<u64>()) {
        let s = random_symplectic(2, seed).unwrap();
        let m = s.matrix();
        let su = m.transpose() * nalgebra::DVector::from_vec(u.clone());
        let sv = m.transpose() * nalgebra::DVector::from_vec(v.clone());
        let before = poisson_bracket_linear(&u, &v).unwrap();
        let after = poisson_bracket_linear(su.as_slice(), sv.as_slice()).unwrap();
        let scale = 1.0 + m.amax().powi(2) * 100.0;
        prop_assert!((before - after).abs() <= 1e-12 * scale, "{} vs {}", before, after);
    }
}
