use erl_core::channel::{channel_from_choi, channel_valid, choi_state, choi_state_by_action, compose, GaussianChannel};
use erl_core::random::{random_invalid_channel, random_valid_channel, random_valid_state, rng};
use erl_core::GaussianState;
use proptest::prelude::*;

fn close(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>, tol: f64) -> bool {
    (a - b).amax() <= tol * a.amax().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn composition_matches_sequential_application(seed in any::<u64>()) {
        let mut g = rng(seed);
        let first = random_valid_channel(1, 1.0, 0.1, &mut g).unwrap();
        let second = random_valid_channel(1, 1.0, 0.1, &mut g).unwrap();
        let s = random_valid_state(1, 1.0, 1.0, &mut g).unwrap();
        let direct = compose(&second, &first).unwrap().apply(&s).unwrap();
        let stepwise = second.apply(&first.apply(&s).unwrap()).unwrap();
        prop_assert!(close(direct.moments(), stepwise.moments(), 1e-10));
        prop_assert!((direct.means() - stepwise.means()).amax() <= 1e-10 * direct.means().amax().max(1.0));
        prop_assert!(channel_valid(&compose(&second, &first).unwrap(), 1e-9).cup_satisfied);
    }

    #[test]
    fn choi_state_two_ways(seed in any::<u64>(), r in 0.5..4.0f64) {
        let ch = random_valid_channel(1, 1.0, 0.1, &mut rng(seed)).unwrap();
        let a = choi_state(&ch, r).unwrap();
        let b = choi_state_by_action(&ch, r).unwrap();
        prop_assert!(close(a.moments(), b.moments(), 1e-10));
    }

    /// Valid channels are exactly those with valid Choi states.
    #[test]
    fn channel_validity_matches_choi_validity(seed in any::<u64>(), valid in any::<bool>()) {
        let mut g = rng(seed);
        let ch = if valid {
            random_valid_channel(1, 1.0, 0.05, &mut g).unwrap()
        } else {
            random_invalid_channel(1, 1.0, 0.05, &mut g).unwrap()
        };
        prop_assert_eq!(channel_valid(&ch, 1e-9).cup_satisfied, valid);
        prop_assert_eq!(choi_state(&ch, 8.0).unwrap().validate(1e-9).cup_satisfied, valid);
    }

    #[test]
    fn valid_channels_are_completely_valid(seed in any::<u64>()) {
        let mut g = rng(seed);
        let ch = random_valid_channel(1, 1.0, 0.0, &mut g).unwrap().on_modes(2, &[(seed % 2) as usize]).unwrap();
        let s = random_valid_state(2, 1.0, 1.0, &mut g).unwrap();
        let out = ch.apply(&s).unwrap();
        prop_assert!(out.validate(1e-8 * out.moments().amax().max(1.0)).cup_satisfied);
    }

    #[test]
    fn choi_round_trip(seed in any::<u64>()) {
        let ch = random_valid_channel(1, 1.0, 0.05, &mut rng(seed)).unwrap();
        let back = channel_from_choi(&choi_state(&ch, 8.0).unwrap(), 8.0).unwrap();
        prop_assert!((back.x() - ch.x()).amax() < 1e-5);
        prop_assert!((back.noise() - ch.noise()).amax() < 1e-5);
    }
}

#[test]
fn momentum_inversion_is_not_a_valid_channel() {
    let flip = GaussianChannel::momentum_inversion(1, 1.0).unwrap();
    assert!(!channel_valid(&flip, 1e-9).cup_satisfied);
    // It still maps every single-system state to a valid one.
    let mut g = rng(11);
    for _ in 0..50 {
        let s = random_valid_state(1, 1.0, 1.0, &mut g).unwrap();
        assert!(flip.apply(&s).unwrap().validate(1e-9).cup_satisfied);
    }
    // But not when acting on half of a correlated pair.
    let epr = erl_core::state::epr_state(1.0, 1.0).unwrap();
    let half = flip.on_modes(2, &[0]).unwrap().apply(&epr).unwrap();
    assert!(!half.validate(1e-9).cup_satisfied);
    let _: &GaussianState = &half;
}
