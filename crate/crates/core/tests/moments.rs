mod common;

use epirisk::distributions::rwk_law;
use epirisk::moments::*;
use epirisk::scenario::{MobilityModel, MobilityParams, ScenarioConfig};
use epirisk::stats::Running;
use proptest::prelude::*;

const SAMPLES: usize = 200_000;

fn cfg(n: u32, d: f64, eta: f64) -> ScenarioConfig {
    ScenarioConfig::static_cell(n, d, eta, 0.01)
}

/// Aggregate moments from per-minor samples `V r^-eta`, with their standard errors.
fn mc_moments(c: &ScenarioConfig, mut distance: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> f64, seed: u64) -> (f64, f64, f64, f64) {
    let mut r = common::rng(seed);
    let mut acc = Running::default();
    for _ in 0..SAMPLES {
        let d = distance(&mut r);
        let v = common::volume(&mut r, c.vol_min, c.vol_max);
        acc.push(v * d.powf(-c.path_loss));
    }
    let m = (c.n_infected - 1) as f64;
    (m * acc.mean(), m * acc.std_err_mean(), m * acc.variance(), m * acc.std_err_variance())
}

fn assert_close(label: &str, exact: MomentPair, mc: (f64, f64, f64, f64)) {
    let (mean, se_mean, var, se_var) = mc;
    assert!((exact.mean - mean).abs() <= 3.0 * se_mean, "{label}: mean {} vs mc {mean} +- {se_mean}", exact.mean);
    assert!((exact.variance - var).abs() <= 3.0 * se_var, "{label}: variance {} vs mc {var} +- {se_var}", exact.variance);
}

#[test]
fn static_moments_match_rejection_sampling() {
    let c = cfg(20, 100.0, 2.5);
    for (i, r1) in (1..=10).map(|k| k as f64 * 9.0).enumerate() {
        let exact = static_moments(r1, &c).unwrap();
        let mc = mc_moments(
            &c,
            |r| loop {
                let (x, y) = common::disk_point(r, 100.0);
                let d = x.hypot(y);
                if d >= r1 {
                    break d;
                }
            },
            100 + i as u64,
        );
        assert_close(&format!("static r1={r1}"), exact, mc);
    }
}

#[test]
fn walk_moments_match_geometric_sampling() {
    let c = cfg(20, 100.0, 2.5);
    let law = rwk_law(100.0, 20.0).unwrap();
    for (i, l1) in (1..=10).map(|k| k as f64 * 7.0).enumerate() {
        let exact = rwk_moments(l1, &c, &law).unwrap();
        let mc = mc_moments(
            &c,
            |r| loop {
                let d = common::walk_endpoint(r, 100.0, 20.0);
                if d >= l1 {
                    break d;
                }
            },
            200 + i as u64,
        );
        assert_close(&format!("walk l1={l1}"), exact, mc);
    }
}

#[test]
fn waypoint_moments_match_leg_sampling() {
    let c = cfg(20, 100.0, 2.5);
    for (i, u1) in (1..=10).map(|k| k as f64 * 0.07).enumerate() {
        let exact = rwp_moments(u1, &c).unwrap();
        let mc = mc_moments(
            &c,
            |r| loop {
                let u = common::waypoint_stationary(r);
                if u >= u1 {
                    break 100.0 * u;
                }
            },
            300 + i as u64,
        );
        assert_close(&format!("waypoint u1={u1}"), exact, mc);
    }
}

#[test]
fn moments_do_not_grow_with_the_nearest_distance() {
    let c = cfg(20, 100.0, 2.5);
    let law = rwk_law(100.0, 20.0).unwrap();
    let grid: Vec<f64> = (1..=100).map(|k| k as f64 * 0.0099 + 0.0001).collect();
    type Series<'a> = (&'a str, Box<dyn Fn(f64) -> MomentPair + 'a>);
    let series: [Series; 3] = [
        ("static", Box::new(|t| static_moments(100.0 * t, &c).unwrap())),
        ("walk", Box::new(|t| rwk_moments(100.0 * t, &c, &law).unwrap())),
        ("waypoint", Box::new(|t| rwp_moments(t, &c).unwrap())),
    ];
    for (label, f) in series.iter() {
        let values: Vec<MomentPair> = grid.iter().map(|&t| f(t)).collect();
        for w in values.windows(2) {
            assert!(w[1].mean <= w[0].mean * (1.0 + 1e-9), "{label}: mean increases");
            assert!(w[1].variance <= w[0].variance * (1.0 + 1e-9), "{label}: variance increases");
        }
    }
}

#[test]
fn boundary_pinned_limits() {
    let c = cfg(20, 100.0, 2.5).with_mobility(MobilityParams::default_for(MobilityModel::RandomWalk, 100.0));
    let pinned = 19.0 * 100f64.powf(-2.5);
    let law = rwk_law(100.0, 20.0).unwrap();
    assert!((static_moments(100.0 - 1e-7, &c).unwrap().mean - pinned).abs() < 1e-6 * pinned);
    assert!((rwk_moments(100.0 - 1e-7, &c, &law).unwrap().mean - pinned).abs() < 1e-6 * pinned);
    assert!((rwp_moments(1.0 - 1e-9, &c).unwrap().mean - pinned).abs() < 1e-6 * pinned);
    // volume spread is all that is left: Var[V] = 1/12
    let var = 19.0 / 12.0 * 100f64.powf(-5.0);
    assert!((static_moments(100.0 - 1e-7, &c).unwrap().variance - var).abs() < 1e-5 * var);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variance_is_nonnegative(n in 1u32..500, eta in 1.0f64..7.0, frac in 0.001f64..0.999, d in 1.0f64..5000.0) {
        let m = static_moments(frac * d, &cfg(n, d, eta)).unwrap();
        prop_assert!(m.variance >= 0.0);
        prop_assert!((m.std_dev * m.std_dev - m.variance).abs() <= 1e-12 * m.variance.max(1e-300));
        if n == 1 {
            prop_assert_eq!(m, MomentPair::ZERO);
        }
    }

    #[test]
    fn log_branch_is_the_midpoint_limit(n in 2u32..100, frac in 0.01f64..0.99, d in 1.0f64..5000.0) {
        // the first-order terms cancel in the symmetric average around eta = 2
        let at = static_moments(frac * d, &cfg(n, d, 2.0)).unwrap();
        let lo = static_moments(frac * d, &cfg(n, d, 2.0 - 1e-6)).unwrap();
        let hi = static_moments(frac * d, &cfg(n, d, 2.0 + 1e-6)).unwrap();
        prop_assert!((0.5 * (lo.mean + hi.mean) - at.mean).abs() <= 1e-6 * at.mean);
    }

    #[test]
    fn power_integral_matches_quadrature(lo in 0.01f64..10.0, span in 0.01f64..100.0, a in -6.0f64..3.0) {
        let hi = lo + span;
        let q = epirisk::quadrature::Quadrature::new(0.0, 1e-11, 200);
        let pts = epirisk::quadrature::geometric_breaks(lo, hi, 1.5);
        let direct = q.integrate_with_breaks(|x| x.powf(a - 1.0), &pts).unwrap().value;
        prop_assert!((power_integral(lo, hi, a) - direct).abs() <= 1e-9 * direct);
    }
}
