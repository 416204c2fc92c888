//! Infectious probability `P(I >= V_th)` in closed form up to quadrature.
//!
//! The nearest infected individual is treated exactly; the other `N - 1`
//! contribute a Gaussian with the conditional moments from [`crate::moments`]:
//!
//! ```text
//! p_inf = int f_1(r1) (1 / (V_M - V_m)) int Q((V_th - V1 r1^-eta - mu(r1)) / s(r1)) dV1 dr1
//! ```
//!
//! The inner volume integral has a closed form (the antiderivative of `Q` is
//! `x Q(x) - phi(x)`), so only the outer integral over the nearest distance is
//! adaptive. A single infected individual bypasses the Gaussian entirely.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

use crate::distributions::{disk_uniform_law, nearest_of_n, rwk_law, rwp_law, DistanceLaw, RwkLaw};
use crate::error::{Error, Result};
use crate::moments::{rwk_moments_with, rwp_moments, static_moments, MomentPair};
use crate::quadrature::{gauss_legendre, geometric_breaks, Quadrature};
use crate::scenario::{MobilityModel, MobilityParams, ScenarioConfig};

/// Upper tail of the standard normal distribution.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Analytic infectious probability with its total risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticResult {
    pub p_inf: f64,
    /// `detention_time * p_inf`.
    pub r_total: f64,
    pub model: MobilityModel,
    pub quadrature_error_estimate: f64,
    /// Set for 2 to 4 infected individuals, where the Gaussian treatment of
    /// the minor individuals is coarse.
    pub small_n: bool,
}

/// Strength above which the nearest individual alone saturates `Q`.
const OVERFLOW_STRENGTH: f64 = 1e300;

/// Error target for the outer integral; results with a larger estimate fail.
const TARGET_ERROR: f64 = 1e-8;
const ACCEPTED_ERROR: f64 = 1e-6;
const OUTER_QUAD: Quadrature = Quadrature::new(TARGET_ERROR, 1e-300, 400);

/// Average of `Q((V_th - V k - mu) / s)` over `V` uniform on `[vm, vmax]`.
fn volume_average(vth: f64, k: f64, m: &MomentPair, vm: f64, vmax: f64) -> f64 {
    if !k.is_finite() || k * vm > OVERFLOW_STRENGTH {
        return 1.0;
    }
    let step = || {
        // degenerate Gaussian: indicator of V k + mu >= V_th
        let v_star = (vth - m.mean) / k;
        ((vmax - v_star) / (vmax - vm)).clamp(0.0, 1.0)
    };
    let s = m.std_dev;
    if !(s > 0.0) {
        return step();
    }
    let x_lo = (vth - m.mean - vm * k) / s;
    let x_hi = (vth - m.mean - vmax * k) / s;
    if !x_lo.is_finite() || !x_hi.is_finite() {
        return step();
    }
    let width = x_lo - x_hi;
    if width < 1e-2 {
        static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        let (nodes, weights) = RULE.get_or_init(|| gauss_legendre(8));
        let mid = 0.5 * (x_lo + x_hi);
        let avg: f64 = nodes.iter().zip(weights).map(|(t, w)| w * q_function(mid + 0.5 * width * t)).sum();
        return (0.5 * avg).clamp(0.0, 1.0);
    }
    let g = |x: f64| x * q_function(x) - phi(x);
    ((g(x_lo) - g(x_hi)) / width).clamp(0.0, 1.0)
}

fn check(cfg: &ScenarioConfig) -> Result<()> {
    let v = cfg.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(v.into_iter().map(|v| v.to_string()).collect()))
    }
}

fn finish(cfg: &ScenarioConfig, p: f64, err: f64) -> Result<AnalyticResult> {
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::Numerical(format!("infectious probability {p} outside [0, 1]")));
    }
    let p_inf = p.clamp(0.0, 1.0);
    Ok(AnalyticResult {
        p_inf,
        r_total: cfg.detention_time * p_inf,
        model: cfg.model(),
        quadrature_error_estimate: err,
        small_n: (2..=4).contains(&cfg.n_infected),
    })
}

/// Single infected individual: `P(V r^-eta >= V_th) = E_V[F(min((V / V_th)^(1/eta), D))]`,
/// with `F` the distance CDF over `x = r / scale`.
fn single_individual<L: DistanceLaw>(cfg: &ScenarioConfig, law: &L, scale: f64) -> Result<(f64, f64)> {
    let (vm, vmax) = (cfg.vol_min, cfg.vol_max);
    let eta = cfg.path_loss;
    let hi = law.support().1;
    let reach = |v: f64| ((v / cfg.vol_threshold).powf(1.0 / eta) / scale).min(hi);
    let mut pts = vec![vm, vmax];
    let saturate = cfg.vol_threshold * (hi * scale).powf(eta);
    if saturate > vm && saturate < vmax {
        pts.insert(1, saturate);
    }
    let est = Quadrature::new(1e-12, 1e-10, 200).integrate_with_breaks(|v| law.cdf(reach(v)), &pts)?;
    Ok((est.value / (vmax - vm), est.error / (vmax - vm)))
}

/// Outer integral over the nearest distance `x` (physical distance `x * scale`).
fn nearest_integral<L, M>(cfg: &ScenarioConfig, nearest: &L, scale: f64, moments: M) -> Result<(f64, f64)>
where
    L: DistanceLaw,
    M: Fn(f64) -> Result<MomentPair>,
{
    let (vm, vmax, vth, eta) = (cfg.vol_min, cfg.vol_max, cfg.vol_threshold, cfg.path_loss);
    let hi = nearest.support().1;

    let mut pts = vec![0.0];
    pts.extend(geometric_breaks(1e-12 * hi, 1e-3 * hi, 10.0));
    pts.extend(nearest.breakpoints().into_iter().filter(|&x| x > 1e-3 * hi && x < hi));
    // where the nearest individual alone crosses the threshold for the extreme volumes
    for v in [vm, vmax] {
        let x = (v / vth).powf(1.0 / eta) / scale;
        if x > 1e-3 * hi && x < hi {
            pts.push(x);
        }
    }
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut failure: Option<Error> = None;
    let est = OUTER_QUAD.estimate(
        |x| {
            let f = nearest.pdf(x);
            if !(f > 0.0) || failure.is_some() {
                return 0.0;
            }
            let k = (x * scale).powf(-eta);
            if !k.is_finite() || k * vm > OVERFLOW_STRENGTH {
                return f;
            }
            match moments(x) {
                Ok(m) => f * volume_average(vth, k, &m, vm, vmax),
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        &pts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !est.converged && !(est.error <= ACCEPTED_ERROR) {
        return Err(Error::Quadrature { lo: 0.0, hi, value: est.value, error: est.error });
    }
    Ok((est.value, est.error))
}

/// Uniformly placed infected individuals.
pub fn p_inf_static(cfg: &ScenarioConfig) -> Result<AnalyticResult> {
    check(cfg)?;
    let disk = disk_uniform_law(cfg.radius)?;
    let (p, err) = if cfg.n_infected == 1 {
        single_individual(cfg, &disk, 1.0)?
    } else {
        let nearest = nearest_of_n(disk, cfg.n_infected)?;
        nearest_integral(cfg, &nearest, 1.0, |r1| static_moments(r1, cfg))?
    };
    finish(cfg, p, err)
}

/// Random-direction individuals. Their stationary distance law is the
/// uniform-disk law, so this is [`p_inf_static`].
pub fn p_inf_rd(cfg: &ScenarioConfig) -> Result<AnalyticResult> {
    p_inf_static(cfg)
}

/// Process-wide cache of tabulated random-walk laws keyed by `(D, W)`.
pub fn rwk_law_cached(radius: f64, step: f64) -> Result<Arc<RwkLaw>> {
    type Cache = Mutex<HashMap<(u64, u64), Arc<RwkLaw>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (radius.to_bits(), step.to_bits());
    if let Some(law) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(law.clone());
    }
    let law = Arc::new(rwk_law(radius, step)?);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, law.clone());
    Ok(law)
}

fn walk_step(cfg: &ScenarioConfig) -> Result<f64> {
    match cfg.mobility {
        MobilityParams::RandomWalk { step, .. } => Ok(step),
        _ => Err(Error::domain("mobility", format!("random-walk evaluation needs mobility.model = rwk, got {}", cfg.model().as_str()))),
    }
}

/// Random-walk individuals, using the renormalized minor law.
pub fn p_inf_rwk(cfg: &ScenarioConfig) -> Result<AnalyticResult> {
    p_inf_rwk_with(cfg, true)
}

/// Random-walk individuals. `renormalize = false` uses the truncated minor
/// density without dividing by its survival.
pub fn p_inf_rwk_with(cfg: &ScenarioConfig, renormalize: bool) -> Result<AnalyticResult> {
    check(cfg)?;
    let law = rwk_law_cached(cfg.radius, walk_step(cfg)?)?;
    let (p, err) = if cfg.n_infected == 1 {
        single_individual(cfg, &*law, 1.0)?
    } else {
        let nearest = nearest_of_n(&*law, cfg.n_infected)?;
        nearest_integral(cfg, &nearest, 1.0, |l1| rwk_moments_with(l1, cfg, &law, renormalize))?
    };
    finish(cfg, p, err)
}

/// Random-waypoint individuals. The nearest-distance law is the polynomial
/// law over normalized distance; strengths use the physical distance `u D`.
pub fn p_inf_rwp(cfg: &ScenarioConfig) -> Result<AnalyticResult> {
    check(cfg)?;
    if cfg.model() != MobilityModel::RandomWaypoint {
        return Err(Error::domain("mobility", format!("random-waypoint evaluation needs mobility.model = rwp, got {}", cfg.model().as_str())));
    }
    let unit = rwp_law(1.0)?;
    let (p, err) = if cfg.n_infected == 1 {
        single_individual(cfg, &unit, cfg.radius)?
    } else {
        let nearest = nearest_of_n(unit, cfg.n_infected)?;
        nearest_integral(cfg, &nearest, cfg.radius, |u1| rwp_moments(u1, cfg))?
    };
    finish(cfg, p, err)
}

/// Dispatches on the configured mobility model.
pub fn p_inf(cfg: &ScenarioConfig) -> Result<AnalyticResult> {
    match cfg.model() {
        MobilityModel::Static => p_inf_static(cfg),
        MobilityModel::RandomDirection => p_inf_rd(cfg),
        MobilityModel::RandomWalk => p_inf_rwk(cfg),
        MobilityModel::RandomWaypoint => p_inf_rwp(cfg),
    }
}

/// [`p_inf`] at each threshold, other parameters fixed.
pub fn p_inf_curve(cfg: &ScenarioConfig, thresholds: &[f64]) -> Result<Vec<AnalyticResult>> {
    if let MobilityParams::RandomWalk { step, .. } = cfg.mobility {
        // build the shared table once, outside the parallel section
        rwk_law_cached(cfg.radius, step)?;
    }
    let eval = |&t: &f64| p_inf(&cfg.with_threshold(t));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        thresholds.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        thresholds.iter().map(eval).collect()
    }
}

/// Total risk over the detention time: `T * p_inf`.
pub fn total_risk(cfg: &ScenarioConfig, p_inf: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_inf) {
        return Err(Error::domain("p_inf", format!("must lie in [0, 1], got {p_inf}")));
    }
    if !(cfg.detention_time >= 0.0) {
        return Err(Error::domain("detention_time", "must be nonnegative"));
    }
    Ok(cfg.detention_time * p_inf)
}
