//! Browser bindings for the `epirisk` engine.
//!
//! Each export returns a flat `Float64Array` of fixed-width records so the
//! page can plot it without a serialization layer.

use epirisk::analytic::{p_inf_curve, rwk_law_cached};
use epirisk::distributions::{disk_uniform_law, nearest_of_n, rwp_law, tabulate, DistanceLaw};
use epirisk::mobility;
use epirisk::scenario::{MobilityModel, MobilityParams};
use epirisk::{Error, Result, ScenarioConfig};
use wasm_bindgen::prelude::*;

/// Most threshold points, law points or trail samples a single call may request.
pub const MAX_POINTS: usize = 200_000;

fn model(name: &str) -> Result<MobilityModel> {
    MobilityModel::parse(name)
        .ok_or_else(|| Error::Invalid(vec![format!("mobility.model: unknown model `{name}` (static|rd|rwk|rwp)")]))
}

fn check_points(name: &str, n: usize) -> Result<()> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::Invalid(vec![format!("{name}: requires 1..={MAX_POINTS}, got {n}")]));
    }
    Ok(())
}

/// Mobility parameters for `model_name`, with `step` overriding the walk step.
pub fn mobility_for(model_name: &str, radius: f64, step: f64) -> Result<MobilityParams> {
    Ok(match MobilityParams::default_for(model(model_name)?, radius) {
        MobilityParams::RandomWalk { speed, .. } => MobilityParams::RandomWalk { step, speed },
        p => p,
    })
}

/// `[v_th, p_inf]` pairs on a log-spaced threshold grid.
#[allow(clippy::too_many_arguments)]
pub fn curve(model_name: &str, n_infected: u32, radius: f64, path_loss: f64, step: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    check_points("points", points)?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Invalid(vec![format!("grid: requires 0 < lo <= hi, got {lo}..{hi}")]));
    }
    let cfg = ScenarioConfig::static_cell(n_infected, radius, path_loss, lo)
        .with_mobility(mobility_for(model_name, radius, step)?)
        .validated()?;
    let grid: Vec<f64> = (0..points)
        .map(|i| if points == 1 { lo } else { lo * (hi / lo).powf(i as f64 / (points - 1) as f64) })
        .collect();
    let res = p_inf_curve(&cfg, &grid)?;
    Ok(grid.iter().zip(&res).flat_map(|(t, r)| [*t, r.p_inf]).collect())
}

/// `[x, pdf, cdf]` triples of the stationary law, or of the nearest of `nearest` draws.
pub fn law(model_name: &str, radius: f64, step: f64, nearest: u32, points: usize) -> Result<Vec<f64>> {
    check_points("points", points)?;
    let mobility = mobility_for(model_name, radius, step)?;
    let cfg = ScenarioConfig { radius, mobility, ..ScenarioConfig::default() }.validated()?;
    let base: Box<dyn DistanceLaw> = match cfg.mobility {
        MobilityParams::RandomWalk { step, .. } => Box::new(rwk_law_cached(radius, step)?),
        MobilityParams::RandomWaypoint { .. } => Box::new(rwp_law(radius)?),
        _ => Box::new(disk_uniform_law(radius)?),
    };
    let rows = if nearest > 1 { tabulate(&nearest_of_n(base, nearest)?, points) } else { tabulate(&base, points) };
    Ok(rows.into_iter().flat_map(|(x, p, c)| [x, p, c]).collect())
}

/// `[individual, t, x, y]` records of simulated trajectories.
#[allow(clippy::too_many_arguments)]
pub fn trail(model_name: &str, radius: f64, step: f64, individuals: usize, duration: f64, dt: f64, seed: u64) -> Result<Vec<f64>> {
    let mobility = mobility_for(model_name, radius, step)?;
    let cfg = ScenarioConfig { radius, mobility, ..ScenarioConfig::default() }.validated()?;
    if !(dt > 0.0 && duration >= 0.0) {
        return Err(Error::Invalid(vec![format!("trail: requires dt > 0 and duration >= 0, got {dt}, {duration}")]));
    }
    let samples = individuals.saturating_mul((duration / dt) as usize + 1);
    check_points("individuals * samples", samples)?;
    let pts = mobility::trails(&cfg.mobility, radius, individuals, duration, dt, 0, seed)?;
    Ok(pts.into_iter().flat_map(|p| [p.individual as f64, p.t, p.position.x, p.position.y]).collect())
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn version() -> String {
    epirisk::VERSION.to_string()
}

#[wasm_bindgen(js_name = analyticCurve)]
#[allow(clippy::too_many_arguments)]
pub fn analytic_curve(model: &str, n_infected: u32, radius: f64, path_loss: f64, step: f64, lo: f64, hi: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    curve(model, n_infected, radius, path_loss, step, lo, hi, points).map_err(js)
}

#[wasm_bindgen(js_name = distanceLaw)]
pub fn distance_law(model: &str, radius: f64, step: f64, nearest: u32, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    law(model, radius, step, nearest, points).map_err(js)
}

#[wasm_bindgen]
pub fn trails(model: &str, radius: f64, step: f64, individuals: usize, duration: f64, dt: f64, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    trail(model, radius, step, individuals, duration, dt, seed).map_err(js)
}
