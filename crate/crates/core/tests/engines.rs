//! Monte Carlo engine against the analytic engine and against itself.

use dronesim_core::analytic::{coverage_model1, rate};
use dronesim_core::monte_carlo::{rate_from_sinr, MonteCarlo, SimulationWindow};
use dronesim_core::stats::ks_two_sample;
use dronesim_core::{MobilitySpec, NetworkParams, ServiceModel};

fn window(t_max: f64) -> SimulationWindow {
    SimulationWindow::new(SimulationWindow::DEFAULT_EVAL_RADIUS, t_max).unwrap()
}

#[test]
fn model1_sinr_law_is_time_invariant() {
    let p = NetworkParams::reference();
    let at = |t: f64, seed: u64| {
        MonteCarlo::new(p, ServiceModel::UeIndependent, window(t), seed)
            .sinr_samples(&[t], 20_000)
            .unwrap()
            .remove(0)
    };
    let test = ks_two_sample(&at(0.0, 1), &at(150.0, 2));
    assert!(test.p_value > 0.01, "{test:?}");

    let est = MonteCarlo::new(p, ServiceModel::UeIndependent, window(150.0), 3)
        .coverage(1.0, 150.0, 20_000)
        .unwrap();
    let exact = coverage_model1(1.0, &p).unwrap().value;
    assert!((est.mean - exact).abs() <= (2.0 * est.half_width_95).max(1e-3), "{} vs {exact}", est.mean);
}

#[test]
fn model2_rate_matches_analytic() {
    let p = NetworkParams::reference();
    let est = MonteCarlo::new(p, ServiceModel::UeDependent, window(50.0), 4)
        .rate(50.0, 40_000)
        .unwrap();
    let exact = rate(50.0, ServiceModel::UeDependent, &p).unwrap().value;
    assert!((est.mean - exact).abs() <= (2.0 * est.half_width_95).max(5e-3), "{} vs {exact}", est.mean);
}

#[test]
fn mobility_kinds_agree_where_they_must() {
    let p = NetworkParams::reference();
    let base = MonteCarlo::new(p, ServiceModel::UeDependent, window(100.0), 5);
    let straight = base.sinr_samples(&[0.0, 100.0], 5_000).unwrap();

    // No displacement yet: every kind sees the same field.
    for mobility in [
        MobilitySpec::random_walk(p.speed(), 10.0),
        MobilitySpec::random_waypoint(p.speed(), 500.0),
    ] {
        let other = base.with_mobility(mobility).sinr_samples(&[0.0], 5_000).unwrap();
        assert_eq!(other[0], straight[0]);
    }

    // A walk that never turns is a straight line.
    let never_turns = base
        .with_mobility(MobilitySpec::random_walk(p.speed(), f64::INFINITY))
        .sinr_samples(&[0.0, 100.0], 5_000)
        .unwrap();
    let (a, b) = (rate_from_sinr(&never_turns[1]), rate_from_sinr(&straight[1]));
    assert!((a.mean - b.mean).abs() <= 2.0 * a.half_width_95.max(b.half_width_95));
    assert_eq!(never_turns, straight);
}
