mod common;

use epirisk::analytic::*;
use epirisk::montecarlo::{estimate_p_inf_multi, McOptions};
use epirisk::scenario::{MobilityModel, MobilityParams, ScenarioConfig};
use proptest::prelude::*;

const MODELS: [MobilityModel; 4] =
    [MobilityModel::Static, MobilityModel::RandomDirection, MobilityModel::RandomWalk, MobilityModel::RandomWaypoint];

fn cell(model: MobilityModel, n: u32, vth: f64) -> ScenarioConfig {
    ScenarioConfig::static_cell(n, 100.0, 2.5, vth).with_mobility(MobilityParams::default_for(model, 100.0))
}

#[test]
fn probability_falls_with_threshold_and_rises_with_population() {
    let grid = [5e-4, 1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2, 3.2e-2];
    for model in MODELS {
        let curve = p_inf_curve(&cell(model, 20, 0.01), &grid).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].p_inf <= w[0].p_inf + 1e-9, "{model:?}: not decreasing in threshold");
        }
        let by_n: Vec<f64> = [2, 5, 10, 20, 40].iter().map(|&n| p_inf(&cell(model, n, 4e-3)).unwrap().p_inf).collect();
        for w in by_n.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{model:?}: not increasing in N: {by_n:?}");
        }
    }
}

#[test]
fn random_direction_is_bitwise_static() {
    for vth in [1e-3, 4e-3, 0.05] {
        let c = cell(MobilityModel::RandomDirection, 20, vth);
        assert_eq!(p_inf_rd(&c).unwrap(), p_inf_static(&c).unwrap());
    }
}

#[test]
fn analytic_tracks_simulation_on_a_threshold_grid() {
    let grid = [1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2];
    for model in MODELS {
        let mut c = cell(model, 20, 0.01);
        c.mc.trials = 20_000;
        c.mc.seed = 77;
        let an = p_inf_curve(&c, &grid).unwrap();
        let mc = estimate_p_inf_multi(&c, &grid, &McOptions::default()).unwrap();
        for ((a, m), t) in an.iter().zip(&mc).zip(grid) {
            let gap = (a.p_inf - m.p_inf_hat).abs();
            assert!(gap <= 3.0 * m.std_err + 0.03, "{model:?} V_th={t}: analytic {} mc {} +- {}", a.p_inf, m.p_inf_hat, m.std_err);
        }
    }
}

#[test]
fn single_individual_matches_direct_simulation() {
    let mut c = ScenarioConfig::static_cell(1, 10.0, 2.0, 0.04);
    c.vol_min = 1.0 - 1e-9;
    c.vol_max = 1.0 + 1e-9;
    let p = p_inf_static(&c).unwrap().p_inf;
    assert!((p - 0.25).abs() < 1e-3);
    let mut r = common::rng(5);
    let n = 1_000_000;
    let hits = (0..n)
        .filter(|_| {
            let (x, y) = common::disk_point(&mut r, 10.0);
            (x * x + y * y).powf(-1.0) >= 0.04
        })
        .count();
    let mc = hits as f64 / n as f64;
    assert!((mc - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{mc} vs {p}");
}

#[test]
fn single_individual_for_mobile_laws() {
    for model in [MobilityModel::RandomWalk, MobilityModel::RandomWaypoint] {
        let r = p_inf(&cell(model, 1, 1e-4)).unwrap();
        assert!(r.p_inf > 0.0 && r.p_inf < 1.0);
        assert!(!r.small_n);
    }
}

#[test]
fn literal_walk_minor_law_is_available() {
    let c = cell(MobilityModel::RandomWalk, 20, 4e-3);
    let renormalized = p_inf_rwk_with(&c, true).unwrap().p_inf;
    let literal = p_inf_rwk_with(&c, false).unwrap().p_inf;
    // dropping the renormalization shrinks the minor mean, so fewer infections
    assert!(literal < renormalized);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn result_is_a_probability_with_matching_risk(
        n in 1u32..60,
        eta in 2.0f64..5.0,
        log_vth in -5.0f64..0.0,
        d in 5.0f64..500.0,
        t in 0.0f64..5000.0,
    ) {
        let mut c = ScenarioConfig::static_cell(n, d, eta, 10f64.powf(log_vth));
        c.detention_time = t;
        let r = p_inf_static(&c).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_inf));
        prop_assert_eq!(r.r_total, t * r.p_inf);
        prop_assert_eq!(total_risk(&c, r.p_inf).unwrap(), r.r_total);
        prop_assert_eq!(r.small_n, (2..=4).contains(&n));
    }

    #[test]
    fn q_function_is_a_decreasing_tail(x in -30.0f64..30.0, dx in 0.0f64..5.0) {
        prop_assert!(q_function(x + dx) <= q_function(x));
        prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-15);
    }
}
