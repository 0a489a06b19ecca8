mod common;

use pinmg_core::cases::{five_bus_network, five_bus_plant, CASE_GAIN};
use pinmg_core::consensus::{estimate_rate, max_abs, simulate_errors, ControllerGains, DEFAULT_BAND};
use pinmg_core::spectral;
use pinmg_core::{CommNetwork, Error, PinningConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gains(c: f64) -> ControllerGains {
    ControllerGains {
        c_v: c,
        c_omega: c,
        ..ControllerGains::default()
    }
}

fn radius(m: &common::Mat) -> f64 {
    m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Stable step from the infinity norm (an upper bound on the spectral radius).
fn safe_dt(m: &common::Mat, c: f64) -> f64 {
    0.25 / (c * radius(m))
}

/// Slowest decay read off the trajectory must equal `c phi`, and the
/// trajectory itself must agree with `exp(-c M t) e0`.
fn check_rate_against_expm(net: &CommNetwork, pinned: &[usize], g: f64, c: f64, e0: &[f64]) {
    let n = net.len();
    let pin = PinningConfig::uniform(n, pinned, g).unwrap();
    let m = common::pinned_laplacian(net, &common::gains_for(n, pinned, g));
    let phi = spectral::phi(net, &pin).unwrap();
    let dt = safe_dt(&m, c);
    let t_end = 25.0 / (c * phi);
    let traj = simulate_errors(net, &pin, &gains(c), e0, e0, dt, t_end).unwrap();

    let neg: common::Mat = m.iter().map(|r| r.iter().map(|v| -c * v).collect()).collect();
    for &frac in &[0.1, 0.5, 1.0] {
        let k = ((frac * t_end / dt).round() as usize).min(traj.len() - 1);
        let exact = common::mat_vec(&common::expm(&neg, traj.times[k]), e0);
        let scale = max_abs(&exact).max(1e-300);
        for (a, b) in traj.e_v[k].iter().zip(&exact) {
            assert!((a - b).abs() / scale < 1e-6, "t = {}: {a} vs {b}", traj.times[k]);
        }
    }
    let rates = estimate_rate(&traj, DEFAULT_BAND).unwrap();
    let measured = rates.voltage.regression;
    assert!(
        (measured - c * phi).abs() / (c * phi) < 0.02,
        "measured {measured} vs c*phi {}",
        c * phi
    );
}

#[test]
fn scalar_closed_form() {
    let net = CommNetwork::build(1, &[]).unwrap();
    let pin = PinningConfig::uniform(1, &[0], 1.0).unwrap();
    let traj = simulate_errors(&net, &pin, &gains(400.0), &[2.0], &[-3.0], 1e-4, 0.01).unwrap();
    let last = traj.len() - 1;
    let decay = (-400.0f64 * 0.01).exp();
    assert!((traj.e_v[last][0] / (2.0 * decay) - 1.0).abs() < 1e-6);
    assert!((traj.e_omega[last][0] / (-3.0 * decay) - 1.0).abs() < 1e-6);
}

#[test]
fn five_bus_single_pin_rate_matches_spectrum() {
    let net = five_bus_network();
    check_rate_against_expm(&net, &[2], CASE_GAIN, 400.0, &[1.0, 2.0, 3.0, 4.0, 5.0]);
}

#[test]
fn random_graphs_rate_matches_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..8 {
        let n = rng.random_range(3..=10);
        let net = common::random_connected_undirected(&mut rng, n, 0.3);
        let m = rng.random_range(1..=2);
        let pinned: Vec<usize> = (0..m).collect();
        let e0: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        check_rate_against_expm(&net, &pinned, 1.0, 10.0, &e0);
    }
}

#[test]
fn case_pinnings_meet_their_rate_targets() {
    let net = five_bus_network();
    let g = ControllerGains::default();
    let plant = five_bus_plant(&g).unwrap();
    let (ev0, ew0) = plant.islanding_errors(&g).unwrap();
    for (pinned, lambda) in [(vec![1], 10.0), (vec![1, 3], 20.0)] {
        let pin = PinningConfig::uniform(5, &pinned, CASE_GAIN).unwrap();
        let traj = simulate_errors(&net, &pin, &g, &ev0, &ew0, 1e-4, 2.0).unwrap();
        let r = estimate_rate(&traj, DEFAULT_BAND).unwrap();
        assert!(r.voltage.regression >= lambda, "{pinned:?}: {:?}", r);
        assert!(r.frequency.regression >= lambda, "{pinned:?}: {:?}", r);
    }
}

#[test]
fn halving_the_step_barely_moves_the_end_state() {
    let net = five_bus_network();
    let pin = PinningConfig::uniform(5, &[2], CASE_GAIN).unwrap();
    let e0 = [1.0, -2.0, 0.5, 3.0, -1.0];
    let run = |dt: f64| simulate_errors(&net, &pin, &gains(400.0), &e0, &e0, dt, 0.3).unwrap();
    let a = run(1e-4);
    let b = run(5e-5);
    let ea = a.e_v.last().unwrap();
    let eb = b.e_v.last().unwrap();
    let scale = max_abs(eb);
    let diff = ea.iter().zip(eb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff / scale < 1e-8, "relative change {}", diff / scale);
}

#[test]
fn oversized_step_is_rejected_with_a_suggestion() {
    let net = five_bus_network();
    let pin = PinningConfig::uniform(5, &[2], CASE_GAIN).unwrap();
    match simulate_errors(&net, &pin, &gains(400.0), &[1.0; 5], &[1.0; 5], 0.1, 1.0) {
        Err(Error::StepTooLarge { suggested_dt, .. }) => {
            assert!(simulate_errors(&net, &pin, &gains(400.0), &[1.0; 5], &[1.0; 5], suggested_dt, 0.01).is_ok());
        }
        other => panic!("expected StepTooLarge, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_superpose(
        a in proptest::collection::vec(-10.0f64..10.0, 5),
        b in proptest::collection::vec(-10.0f64..10.0, 5),
    ) {
        let net = five_bus_network();
        let pin = PinningConfig::uniform(5, &[0, 2], CASE_GAIN).unwrap();
        let run = |e: &[f64]| simulate_errors(&net, &pin, &gains(400.0), e, e, 1e-4, 0.05).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (ta, tb, ts) = (run(&a), run(&b), run(&sum));
        let scale = max_abs(&sum).max(max_abs(&a)).max(max_abs(&b)).max(1e-12);
        for k in 0..ts.len() {
            for i in 0..5 {
                let lin = ta.e_v[k][i] + tb.e_v[k][i];
                prop_assert!((ts.e_v[k][i] - lin).abs() <= 1e-9 * scale);
            }
        }
    }
}
