mod common;

use pinmg_core::cases::{five_bus_network, four_bus_network, CASE_GAIN};
use pinmg_core::pinsel::{self, algorithm1, algorithm2, brute_force_opt, RateTarget, Score};
use pinmg_core::{CommNetwork, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_connected() -> impl Strategy<Value = CommNetwork> {
    (any::<u64>(), 3usize..9, 0.0f64..0.6).prop_map(|(s, n, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        common::random_connected_undirected(&mut rng, n, p)
    })
}

#[test]
fn five_bus_rate_targets() {
    let net = five_bus_network();
    let low = algorithm2(&net, CASE_GAIN, RateTarget::new(10.0, 400.0, 400.0).unwrap()).unwrap();
    assert_eq!(low.sorted_set(), vec![1]);
    let high = algorithm2(&net, CASE_GAIN, RateTarget::new(20.0, 400.0, 400.0).unwrap()).unwrap();
    assert_eq!(high.sorted_set(), vec![1, 3]);
    assert!(high.achieved_phi >= 0.05);
}

#[test]
fn five_bus_first_step_ties_and_scores() {
    let net = five_bus_network();
    let r = algorithm1(&net, 1, CASE_GAIN).unwrap();
    assert_eq!(r.ties[0], vec![1, 2]);
    let sink = r.score_trace[0].iter().find(|c| c.node == 4).unwrap();
    assert_eq!(sink.score, Score::NegInfinite);
    // From {DG2}, the remaining candidates DG1, DG3, DG4, DG5 leave total
    // paths 4, 4, 3, 4.
    let second = algorithm1(&net, 2, CASE_GAIN).unwrap();
    let paths: Vec<String> = second.score_trace[1].iter().map(|c| c.path.to_string()).collect();
    assert_eq!(paths, ["4", "4", "3", "4"]);
    assert_eq!(second.pinned, vec![1, 3]);
}

#[test]
fn four_bus_greedy_agrees_with_oracle() {
    let net = four_bus_network();
    for g in [0.2, 1.0, 10.0] {
        let greedy = algorithm1(&net, 1, g).unwrap();
        let oracle = brute_force_opt(&net, 1, g).unwrap();
        assert_eq!(greedy.pinned, vec![1]);
        assert_eq!(oracle.alternatives, vec![vec![1]]);
    }
}

#[test]
fn full_set_pins_everything() {
    let net = five_bus_network();
    let r = algorithm1(&net, 5, CASE_GAIN).unwrap();
    assert_eq!(r.sorted_set(), vec![0, 1, 2, 3, 4]);
    assert!(matches!(algorithm1(&net, 6, CASE_GAIN), Err(Error::TooManyPins { .. })));
}

#[test]
fn exhaustive_guard() {
    let edges: Vec<_> = (1..40).flat_map(|i| [(0, i), (i, 0)]).collect();
    let net = CommNetwork::build(40, &edges).unwrap();
    assert!(matches!(brute_force_opt(&net, 20, 1.0), Err(Error::GuardExceeded { .. })));
}

#[test]
fn oracle_dominates_greedy_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let net = common::random_connected_undirected(&mut rng, 7, 0.25);
        let greedy = algorithm1(&net, 2, 1.0).unwrap();
        let best = common::enumerate_phi(&net, 2, 1.0)
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(greedy.achieved_phi <= best + 1e-9);
        let oracle = brute_force_opt(&net, 2, 1.0).unwrap();
        assert!((oracle.achieved_phi - best).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_sets_are_nested(net in arb_connected()) {
        let n = net.len();
        let mut prev: Vec<usize> = Vec::new();
        for m in 1..=n {
            let r = algorithm1(&net, m, 1.0).unwrap();
            prop_assert_eq!(&r.pinned[..m - 1], &prev[..]);
            prev = r.pinned;
        }
    }

    #[test]
    fn greedy_is_deterministic(net in arb_connected(), m in 1usize..4) {
        let m = m.min(net.len());
        let a = algorithm1(&net, m, 0.5).unwrap();
        let b = algorithm1(&net, m, 0.5).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn target_rate_result_is_minimal(net in arb_connected(), lambda in 1.0f64..200.0) {
        let target = RateTarget::new(lambda, 400.0, 400.0).unwrap();
        match algorithm2(&net, 1.0, target) {
            Ok(r) => {
                prop_assert!(r.achieved_phi >= target.mu_star - 1e-10);
                let m = r.pinned.len();
                let start = pinsel::initial_pin_count(&net, target.mu_star);
                for smaller in start..m {
                    let prefix = algorithm1(&net, smaller, 1.0).unwrap();
                    prop_assert!(prefix.achieved_phi < target.mu_star);
                }
            }
            Err(Error::Unattainable { best_phi, .. }) => {
                let all: Vec<usize> = (0..net.len()).collect();
                prop_assert!((best_phi - common::phi_oracle(&net, &all, 1.0)).abs() < 1e-9);
            }
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }
}
