//! Conditional mean and variance of the aggregate strength of the `N - 1`
//! minor infected individuals, given the distance of the nearest one.
//!
//! Each minor individual contributes `V * r^-eta` with `V` uniform on
//! `[vol_min, vol_max]` independent of `r`, so
//!
//! ```text
//! mean     = (N-1) E[V] E[r^-eta]
//! variance = (N-1) (E[V^2] E[r^-2eta] - E[V]^2 E[r^-eta]^2)
//! ```
//!
//! where the distance expectations are under the minor law conditioned on
//! `r >= r1`. The variance is evaluated as `Var[V] E[r^-2eta] + E[V]^2 Var[r^-eta]`
//! so the only cancellation left is inside the distance variance.

use crate::distributions::{rwp_shape, DistanceLaw, RwkLaw};
use crate::error::{Error, Result};
use crate::quadrature::{geometric_breaks, Quadrature};
use crate::scenario::ScenarioConfig;

/// Mean, variance and standard deviation of the minor-individual aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
}

impl MomentPair {
    pub const ZERO: MomentPair = MomentPair { mean: 0.0, variance: 0.0, std_dev: 0.0 };

    fn new(mean: f64, variance: f64) -> Self {
        MomentPair { mean, variance, std_dev: variance.sqrt() }
    }
}

/// Exponent magnitude below which the logarithmic limit replaces `x^a / a`.
pub const LOG_BRANCH: f64 = 1e-9;

/// Tolerance, relative to `E[r^-2eta]`, for clamping a cancelled distance
/// variance to zero. When the nearest distance approaches the radius both
/// expectations agree to many digits and their difference is rounding noise.
const VARIANCE_CLAMP: f64 = 1e-9;

/// `int_lo^hi x^(a-1) dx = (hi^a - lo^a) / a`, switching to `ln(hi/lo)` as `a -> 0`.
pub fn power_integral(lo: f64, hi: f64, a: f64) -> f64 {
    let log_ratio = (hi / lo).ln();
    if a.abs() < LOG_BRANCH {
        log_ratio
    } else {
        lo.powf(a) * libm::expm1(a * log_ratio) / a
    }
}

/// Combines distance expectations `E[r^-eta]`, `E[r^-2eta]` into the aggregate moments.
fn combine(cfg: &ScenarioConfig, e1: f64, e2: f64) -> Result<MomentPair> {
    let minors = cfg.n_infected.saturating_sub(1) as f64;
    let ev = cfg.volume_mean();
    let var_v = cfg.volume_second_moment() - ev * ev;
    let mut var_r = e2 - e1 * e1;
    if var_r < 0.0 {
        if var_r < -VARIANCE_CLAMP * e2.abs() {
            return Err(Error::Numerical(format!("negative distance variance {var_r:e} (E[r^-2eta] = {e2:e})")));
        }
        var_r = 0.0;
    }
    let mean = minors * ev * e1;
    let variance = minors * (var_v.max(0.0) * e2 + ev * ev * var_r);
    if !mean.is_finite() || !(variance >= 0.0) {
        return Err(Error::Numerical(format!("non-finite minor moments (mean {mean}, variance {variance})")));
    }
    Ok(MomentPair::new(mean, variance))
}

fn check_nearest(name: &'static str, x: f64, hi: f64) -> Result<()> {
    if x > 0.0 && x < hi {
        Ok(())
    } else {
        Err(Error::domain(name, format!("must lie in (0, {hi}), got {x}")))
    }
}

/// Minor moments for uniformly placed individuals (also the random-direction
/// stationary law), in closed form.
pub fn static_moments(r1: f64, cfg: &ScenarioConfig) -> Result<MomentPair> {
    let d = cfg.radius;
    check_nearest("r1", r1, d)?;
    if cfg.n_infected <= 1 {
        return Ok(MomentPair::ZERO);
    }
    let eta = cfg.path_loss;
    // density 2r / (D^2 - r1^2) on [r1, D]
    let norm = 2.0 / ((d - r1) * (d + r1));
    let e1 = norm * power_integral(r1, d, 2.0 - eta);
    let e2 = norm * power_integral(r1, d, 2.0 - 2.0 * eta);
    combine(cfg, e1, e2)
}

/// Quadrature settings for the mobile-law moments. Purely relative: the
/// expectations scale like `D^-2eta` and can be far below any fixed absolute floor.
const MOMENT_QUAD: Quadrature = Quadrature::new(1e-300, 1e-9, 400);

/// `int_lo^hi x^-p f(x) dx` with geometric panels near `lo`.
fn weighted_power<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, p: f64, extra: &[f64]) -> Result<f64> {
    let mut pts = geometric_breaks(lo, hi, 2.0);
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let est = MOMENT_QUAD.integrate_with_breaks(|x| x.powf(-p) * f(x), &pts)?;
    Ok(est.value)
}

/// Minor moments for random-walk individuals.
///
/// The minor law is `law` truncated to `[l1, D]` and renormalized by its
/// survival `1 - F(l1)`. With `renormalize = false` the truncated density is
/// used as is, so the distance expectations are the partial integrals
/// `int_{l1}^D l^-p f(l) dl`.
pub fn rwk_moments_with(l1: f64, cfg: &ScenarioConfig, law: &RwkLaw, renormalize: bool) -> Result<MomentPair> {
    let d = cfg.radius;
    check_nearest("l1", l1, d)?;
    if (law.radius() - d).abs() > 1e-12 * d {
        return Err(Error::domain("law", format!("tabulated for radius {}, scenario uses {d}", law.radius())));
    }
    if cfg.n_infected <= 1 {
        return Ok(MomentPair::ZERO);
    }
    let eta = cfg.path_loss;
    let pdf = |x: f64| law.pdf(x);
    let breaks = law.breakpoints();
    let survival = if renormalize { law.sf(l1) } else { 1.0 };
    if !(survival > 0.0) {
        return Err(Error::Numerical(format!("no random-walk mass beyond l1 = {l1}")));
    }
    let e1 = weighted_power(&pdf, l1, d, eta, &breaks)? / survival;
    let e2 = weighted_power(&pdf, l1, d, 2.0 * eta, &breaks)? / survival;
    combine(cfg, e1, e2)
}

/// [`rwk_moments_with`] using the renormalized minor law.
pub fn rwk_moments(l1: f64, cfg: &ScenarioConfig, law: &RwkLaw) -> Result<MomentPair> {
    rwk_moments_with(l1, cfg, law, true)
}

/// Minor moments for random-waypoint individuals. `u1` is the nearest
/// distance normalized by the radius; strengths use the physical distance `u D`.
pub fn rwp_moments(u1: f64, cfg: &ScenarioConfig) -> Result<MomentPair> {
    check_nearest("u1", u1, 1.0)?;
    if cfg.n_infected <= 1 {
        return Ok(MomentPair::ZERO);
    }
    let eta = cfg.path_loss;
    let weight = |u: f64| u * rwp_shape(u);
    let norm = weighted_power(&weight, u1, 1.0, 0.0, &[])?;
    if !(norm > 0.0) {
        return Err(Error::Numerical(format!("no random-waypoint mass beyond u1 = {u1}")));
    }
    let scale = cfg.radius.powf(-eta);
    let e1 = weighted_power(&weight, u1, 1.0, eta, &[])? / norm * scale;
    let e2 = weighted_power(&weight, u1, 1.0, 2.0 * eta, &[])? / norm * scale * scale;
    combine(cfg, e1, e2)
}
