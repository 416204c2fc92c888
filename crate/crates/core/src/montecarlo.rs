//! Direct simulation of the aggregate strength and the infection indicator.
//!
//! Two sampling modes:
//!
//! - snapshot: every trial draws `N` independent distances from the model's
//!   stationary law and `N` volumes
//! - trajectory: `N` individuals move with the configured mobility model;
//!   after the burn-in the indicator is tested at instants spaced one
//!   crossing time `D / speed` apart, across at least 30 independent
//!   replications whose spread gives the standard error
//!
//! Work is cut into chunks (snapshot) or replications (trajectory), each with
//! its own ChaCha8 stream keyed by the master seed and its index, so the
//! result does not depend on the number of worker threads.

use rand::{Rng, RngCore};

use crate::analytic::rwk_law_cached;
use crate::distributions::{rwp_law, DistanceLaw};
use crate::error::{Error, Result};
use crate::mobility::{individual_rng, sample_uniform_disk, Position, TrajectoryState};
use crate::scenario::{MobilityModel, MobilityParams, ScenarioConfig};
use crate::stats::{equal_probability_histogram, ks_statistic, Bin, Running};

/// Distances below this are clamped to it.
pub const MIN_DISTANCE: f64 = 1e-6;

/// Trials per independent snapshot stream.
const CHUNK: u64 = 4096;

/// Fewest replications used for trajectory-mode error bars.
pub const MIN_REPLICATIONS: u64 = 30;

/// `sum V_i r_i^-eta` with `r_i` the distance of position `i` to the centre.
///
/// A position exactly at the centre overflows the strength and is an error.
pub fn instantaneous_strength(positions: &[Position], volumes: &[f64], eta: f64) -> Result<f64> {
    if positions.len() != volumes.len() {
        return Err(Error::domain("volumes", format!("{} positions but {} volumes", positions.len(), volumes.len())));
    }
    let mut total = 0.0;
    for (p, v) in positions.iter().zip(volumes) {
        let r = p.norm();
        if r == 0.0 {
            return Err(Error::Numerical("strength overflow: infected individual at distance 0".into()));
        }
        total += v * r.powf(-eta);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    Snapshot,
    Trajectory,
}

impl SamplingMode {
    /// Snapshot for static and random-direction cells, trajectory otherwise.
    pub fn default_for(model: MobilityModel) -> Self {
        match model {
            MobilityModel::Static | MobilityModel::RandomDirection => SamplingMode::Snapshot,
            _ => SamplingMode::Trajectory,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::Snapshot => "snapshot",
            SamplingMode::Trajectory => "trajectory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMode {
    /// Fresh volumes at every tested instant.
    PerInstant,
    /// Each individual keeps one volume for a whole replication (trajectory mode).
    PerIndividual,
}

/// Knobs that are not part of the scenario file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// `None` picks [`SamplingMode::default_for`].
    pub mode: Option<SamplingMode>,
    pub volumes: VolumeMode,
    pub replications: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { mode: None, volumes: VolumeMode::PerInstant, replications: MIN_REPLICATIONS }
    }
}

/// Simulation estimate of the infectious probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_inf_hat: f64,
    pub std_err: f64,
    /// Normal-approximation 95% interval clipped to `[0, 1]`.
    pub ci95: (f64, f64),
    pub trials: u64,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Distances raised to [`MIN_DISTANCE`].
    pub clamp_events: u64,
}

fn interval(p: f64, se: f64) -> (f64, f64) {
    ((p - 1.96 * se).max(0.0), (p + 1.96 * se).min(1.0))
}

/// Draws stationary distances for snapshot mode.
enum Sampler {
    Disk(f64),
    Law(Box<dyn DistanceLaw>),
}

impl Sampler {
    fn for_config(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(match cfg.mobility {
            MobilityParams::Static | MobilityParams::RandomDirection { .. } => Sampler::Disk(cfg.radius),
            MobilityParams::RandomWalk { step, .. } => {
                let law = rwk_law_cached(cfg.radius, step)?;
                Sampler::Law(Box::new(law))
            }
            MobilityParams::RandomWaypoint { .. } => Sampler::Law(Box::new(rwp_law(cfg.radius)?)),
        })
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Sampler::Disk(d) => d * rng.gen::<f64>().sqrt(),
            Sampler::Law(l) => l.sample(rng),
        }
    }
}

fn volume(rng: &mut dyn RngCore, cfg: &ScenarioConfig) -> f64 {
    cfg.vol_min + (cfg.vol_max - cfg.vol_min) * rng.gen::<f64>()
}

/// Hit counts for each threshold plus clamp events.
#[derive(Debug, Clone, Default)]
struct Tally {
    instants: u64,
    hits: Vec<u64>,
    clamps: u64,
}

impl Tally {
    fn new(k: usize) -> Self {
        Tally { instants: 0, hits: vec![0; k], clamps: 0 }
    }

    fn record(&mut self, strength: f64, thresholds: &[f64]) {
        self.instants += 1;
        for (h, t) in self.hits.iter_mut().zip(thresholds) {
            if strength >= *t {
                *h += 1;
            }
        }
    }

    fn merge(mut self, other: &Tally) -> Self {
        self.instants += other.instants;
        self.clamps += other.clamps;
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        self
    }
}

fn strength_of(distance: f64, v: f64, eta: f64, clamps: &mut u64) -> f64 {
    let r = if distance < MIN_DISTANCE {
        *clamps += 1;
        MIN_DISTANCE
    } else {
        distance
    };
    v * r.powf(-eta)
}

fn snapshot_chunk(cfg: &ScenarioConfig, sampler: &Sampler, thresholds: &[f64], chunk: u64, count: u64) -> Tally {
    let mut rng = individual_rng(cfg.mc.seed, chunk);
    let mut tally = Tally::new(thresholds.len());
    for _ in 0..count {
        let mut total = 0.0;
        for _ in 0..cfg.n_infected {
            let r = sampler.draw(&mut rng);
            let v = volume(&mut rng, cfg);
            total += strength_of(r, v, cfg.path_loss, &mut tally.clamps);
        }
        tally.record(total, thresholds);
    }
    tally
}

fn trajectory_replication(cfg: &ScenarioConfig, opts: &McOptions, thresholds: &[f64], rep: u64, instants: u64) -> Tally {
    let mut rng = individual_rng(cfg.mc.seed, rep);
    let n = cfg.n_infected as usize;
    let mut people: Vec<TrajectoryState> = (0..n).map(|_| TrajectoryState::new(cfg.mobility, cfg.radius, &mut rng)).collect();
    let fixed: Vec<f64> = (0..n).map(|_| volume(&mut rng, cfg)).collect();
    let burn = cfg.mc.burn_in_steps as f64 * cfg.mc.time_step;
    let gap = cfg.radius / cfg.mobility.typical_speed().unwrap_or(1.0);
    let mut tally = Tally::new(thresholds.len());
    for p in people.iter_mut() {
        p.advance(burn, &mut rng);
    }
    for k in 0..instants {
        if k > 0 {
            for p in people.iter_mut() {
                p.advance(gap, &mut rng);
            }
        }
        let mut total = 0.0;
        for (p, &v_fixed) in people.iter().zip(&fixed) {
            let v = match opts.volumes {
                VolumeMode::PerInstant => volume(&mut rng, cfg),
                VolumeMode::PerIndividual => v_fixed,
            };
            total += strength_of(p.position.norm(), v, cfg.path_loss, &mut tally.clamps);
        }
        tally.record(total, thresholds);
    }
    tally
}

/// Runs `jobs` on up to `workers` threads, preserving job order.
fn run_jobs<T: Send, F: Fn(u64) -> T + Sync + Send>(jobs: u64, workers: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if workers > 1 && jobs > 1 {
            use rayon::prelude::*;
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(|| (0..jobs).into_par_iter().map(&f).collect());
            }
        }
    }
    let _ = workers;
    (0..jobs).map(f).collect()
}

/// Estimates at several thresholds from one shared set of samples.
pub fn estimate_p_inf_multi(cfg: &ScenarioConfig, thresholds: &[f64], opts: &McOptions) -> Result<Vec<McEstimate>> {
    // thresholds come from the caller; zero is a legitimate (certain) threshold here
    let v: Vec<String> = cfg.validate().into_iter().filter(|v| v.field != "vol_threshold").map(|v| v.to_string()).collect();
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::domain("vol_threshold", format!("must be nonnegative, got {t}")));
    }
    if cfg.mc.trials == 0 {
        return Err(Error::domain("mc.trials", "must be at least 1"));
    }
    let mode = opts.mode.unwrap_or_else(|| SamplingMode::default_for(cfg.model()));
    let trials = cfg.mc.trials;
    let k = thresholds.len();
    match mode {
        SamplingMode::Snapshot => {
            let sampler = Sampler::for_config(cfg)?;
            let chunks = trials.div_ceil(CHUNK);
            let tallies = run_jobs(chunks, cfg.mc.workers, |c| {
                let count = CHUNK.min(trials - c * CHUNK);
                snapshot_chunk(cfg, &sampler, thresholds, c, count)
            });
            let total = tallies.iter().fold(Tally::new(k), |a, t| a.merge(t));
            Ok((0..k)
                .map(|j| {
                    let p = total.hits[j] as f64 / total.instants as f64;
                    let se = (p * (1.0 - p) / total.instants as f64).sqrt();
                    McEstimate {
                        p_inf_hat: p,
                        std_err: se,
                        ci95: interval(p, se),
                        trials: total.instants,
                        seed: cfg.mc.seed,
                        mode,
                        clamp_events: total.clamps,
                    }
                })
                .collect())
        }
        SamplingMode::Trajectory => {
            let reps = opts.replications.max(MIN_REPLICATIONS).min(trials.max(MIN_REPLICATIONS));
            let per_rep = trials.div_ceil(reps).max(1);
            let tallies = run_jobs(reps, cfg.mc.workers, |r| trajectory_replication(cfg, opts, thresholds, r, per_rep));
            let clamps: u64 = tallies.iter().map(|t| t.clamps).sum();
            let instants: u64 = tallies.iter().map(|t| t.instants).sum();
            Ok((0..k)
                .map(|j| {
                    let mut batch = Running::default();
                    let mut hits = 0u64;
                    for t in &tallies {
                        hits += t.hits[j];
                        batch.push(t.hits[j] as f64 / t.instants as f64);
                    }
                    let p = hits as f64 / instants as f64;
                    let se = batch.std_err_mean();
                    McEstimate {
                        p_inf_hat: p,
                        std_err: se,
                        ci95: interval(p, se),
                        trials: instants,
                        seed: cfg.mc.seed,
                        mode,
                        clamp_events: clamps,
                    }
                })
                .collect())
        }
    }
}

/// Estimate at the configured threshold.
pub fn estimate_p_inf(cfg: &ScenarioConfig, opts: &McOptions) -> Result<McEstimate> {
    Ok(estimate_p_inf_multi(cfg, &[cfg.vol_threshold], opts)?[0])
}

/// Total-risk estimate `T * p_hat` with its error scaled by `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub risk: f64,
    pub std_err: f64,
    pub ci95: (f64, f64),
    pub p: McEstimate,
}

pub fn estimate_total_risk(cfg: &ScenarioConfig, opts: &McOptions) -> Result<RiskEstimate> {
    if !(cfg.detention_time >= 0.0) {
        return Err(Error::domain("detention_time", "must be nonnegative"));
    }
    let p = estimate_p_inf(cfg, opts)?;
    let t = cfg.detention_time;
    Ok(RiskEstimate { risk: t * p.p_inf_hat, std_err: t * p.std_err, ci95: (t * p.ci95.0, t * p.ci95.1), p })
}

/// Empirical distance law with its goodness of fit.
#[derive(Debug, Clone)]
pub struct EmpiricalLaw {
    /// Sorted sample.
    pub samples: Vec<f64>,
    pub histogram: Vec<Bin>,
    pub ks: f64,
}

/// Stationary distance samples for `model`: direct draws for a static cell,
/// otherwise post-burn-in trajectory snapshots spaced one crossing time apart
/// (burn-in of ten crossing times).
pub fn distance_samples(model: &MobilityParams, radius: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return Err(Error::domain("radius", "must be positive"));
    }
    let Some(speed) = model.typical_speed() else {
        let mut rng = individual_rng(seed, 0);
        return Ok((0..samples).map(|_| sample_uniform_disk(&mut rng, radius).norm()).collect());
    };
    let gap = radius / speed;
    let individuals = samples.clamp(1, 1000);
    let snaps = samples.div_ceil(individuals);
    let mut out = Vec::with_capacity(individuals * snaps);
    for i in 0..individuals {
        let mut rng = individual_rng(seed, i as u64);
        let mut s = TrajectoryState::new(*model, radius, &mut rng);
        s.advance(10.0 * gap, &mut rng);
        for k in 0..snaps {
            if k > 0 {
                s.advance(gap, &mut rng);
            }
            out.push(s.position.norm());
        }
    }
    out.truncate(samples);
    Ok(out)
}

/// Samples the stationary distance of `model`, bins it into `bins`
/// equal-probability bins and measures the KS distance to `law`.
pub fn empirical_distance_law<L: DistanceLaw + ?Sized>(
    model: &MobilityParams,
    radius: f64,
    samples: usize,
    seed: u64,
    law: &L,
    bins: usize,
) -> Result<EmpiricalLaw> {
    let mut xs = distance_samples(model, radius, samples, seed)?;
    let ks = ks_statistic(&mut xs, |x| law.cdf(x));
    let histogram = equal_probability_histogram(&xs, bins);
    Ok(EmpiricalLaw { samples: xs, histogram, ks })
}
