//! Command-line front end for the `epirisk` engine.
//!
//! Every command writes UTF-8 text with LF line endings, starting with the
//! comment line `# edge-epirisk v<version> <command>`.

pub mod grid;
pub mod report;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epirisk::analytic::{p_inf, p_inf_curve, rwk_law_cached};
use epirisk::distributions::{disk_uniform_law, nearest_of_n, rwp_law, tabulate, DistanceLaw};
use epirisk::mobility::trails;
use epirisk::montecarlo::{distance_samples, estimate_p_inf, estimate_p_inf_multi, McOptions, SamplingMode};
use epirisk::scenario::{parse_config, MobilityModel, MobilityParams};
use epirisk::stats::{equal_probability_histogram, ks_statistic};
use epirisk::ScenarioConfig;
use thiserror::Error;

pub use grid::Grid;
pub use report::{RiskReport, DEFAULT_WARN_THRESHOLD};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Trials below which `simulate` prints a low-trials warning.
pub const LOW_TRIALS: u64 = 100;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] epirisk::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{failed} of {rows} comparison rows failed")]
    CompareFailed { failed: usize, rows: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Engine(e) if e.is_config_error() => 2,
            CliError::Engine(_) => 3,
            CliError::CompareFailed { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "edge-epirisk", version, about = "Infectious probability in a wireless cell, analytic and simulated")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (`key = value` lines); defaults apply when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `mc.workers`.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Static,
    Rd,
    Rwk,
    Rwp,
}

impl From<ModelArg> for MobilityModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Static => MobilityModel::Static,
            ModelArg::Rd => MobilityModel::RandomDirection,
            ModelArg::Rwk => MobilityModel::RandomWalk,
            ModelArg::Rwp => MobilityModel::RandomWaypoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Snapshot,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "n_infected")]
    NInfected,
    #[value(name = "path_loss")]
    PathLoss,
    #[value(name = "vol_threshold")]
    VolThreshold,
    Radius,
    Step,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::NInfected => "n_infected",
            SweepParam::PathLoss => "path_loss",
            SweepParam::VolThreshold => "vol_threshold",
            SweepParam::Radius => "radius",
            SweepParam::Step => "step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawArg {
    /// Stationary law of the configured model.
    Stationary,
    /// Nearest of `n_infected` draws from the stationary law.
    Nearest,
    Disk,
    Rwk,
    Rwp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic infectious probability over a threshold grid.
    Analytic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Grid,
        /// Replaces the configured mobility model (with its defaults).
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Monte-Carlo estimate at the configured threshold.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Analytic against simulated probabilities; exit code 4 when any row disagrees.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Grid,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// One analytic curve per parameter value, in long format.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Grid,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Trajectories of individuals under the configured mobility model.
    Trails {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        individuals: usize,
        /// Recorded duration in seconds.
        #[arg(long, default_value_t = 100.0)]
        duration: f64,
        /// Sampling interval; defaults to `mc.time_step`.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Tabulates a distance law, or an empirical histogram with `--histogram`.
    DumpLaw {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = LawArg::Stationary)]
        law: LawArg,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Writes an equal-probability histogram of simulated distances with this many bins.
        #[arg(long)]
        histogram: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Risk report with the warning flag.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_WARN_THRESHOLD)]
        warn_threshold: f64,
        /// Adds a simulation cross-check.
        #[arg(long)]
        mc: bool,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analytic { .. } => "analytic",
            Command::Simulate { .. } => "simulate",
            Command::Compare { .. } => "compare",
            Command::Sweep { .. } => "sweep",
            Command::Trails { .. } => "trails",
            Command::DumpLaw { .. } => "dump-law",
            Command::Report { .. } => "report",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analytic { common, .. }
            | Command::Simulate { common, .. }
            | Command::Compare { common, .. }
            | Command::Sweep { common, .. }
            | Command::Trails { common, .. }
            | Command::DumpLaw { common, .. }
            | Command::Report { common, .. } => common,
        }
    }
}

pub fn header(command: &str) -> String {
    format!("# edge-epirisk v{VERSION} {command}\n")
}

/// Shortest round-trip formatting.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        None => ScenarioConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            parse_config(&text)?
        }
    };
    if let Some(seed) = common.seed {
        cfg.mc.seed = seed;
    }
    if let Some(w) = common.workers {
        cfg.mc.workers = w.max(1);
    }
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn mc_options(mode: Option<ModeArg>) -> McOptions {
    McOptions {
        mode: mode.map(|m| match m {
            ModeArg::Snapshot => SamplingMode::Snapshot,
            ModeArg::Trajectory => SamplingMode::Trajectory,
        }),
        ..McOptions::default()
    }
}

fn write_output(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Runs one command and writes its output.
pub fn run(cli: Cli) -> Result<()> {
    let cmd = &cli.command;
    let common = cmd.common();
    let cfg = load_config(common)?;
    let mut text = header(cmd.name());
    let outcome = match cmd {
        Command::Analytic { grid, model, .. } => cmd_analytic(&cfg, grid, *model, &mut text),
        Command::Simulate { mode, .. } => cmd_simulate(&cfg, *mode, &mut text),
        Command::Compare { grid, mode, .. } => cmd_compare(&cfg, grid, *mode, &mut text),
        Command::Sweep { grid, param, values, .. } => cmd_sweep(&cfg, grid, *param, values, &mut text),
        Command::Trails { individuals, duration, dt, .. } => cmd_trails(&cfg, *individuals, *duration, *dt, &mut text),
        Command::DumpLaw { law, points, histogram, samples, .. } => {
            cmd_dump_law(&cfg, *law, *points, *histogram, *samples, &mut text)
        }
        Command::Report { warn_threshold, mc, mode, .. } => cmd_report(&cfg, *warn_threshold, *mc, *mode, &mut text),
    };
    match outcome {
        // a failed comparison still produces its table
        Ok(()) | Err(CliError::CompareFailed { .. }) => {
            write_output(common, &text)?;
            outcome
        }
        Err(e) => Err(e),
    }
}

fn with_model(cfg: &ScenarioConfig, model: Option<ModelArg>) -> ScenarioConfig {
    match model.map(MobilityModel::from) {
        Some(m) if m != cfg.model() => cfg.with_mobility(MobilityParams::default_for(m, cfg.radius)),
        _ => *cfg,
    }
}

fn cmd_analytic(cfg: &ScenarioConfig, grid: &Grid, model: Option<ModelArg>, out: &mut String) -> Result<()> {
    let cfg = with_model(cfg, model);
    let thresholds = grid.points();
    let curve = p_inf_curve(&cfg, &thresholds)?;
    out.push_str("v_th,p_inf\n");
    for (t, r) in thresholds.iter().zip(&curve) {
        let _ = writeln!(out, "{},{}", num(*t), num(r.p_inf));
    }
    Ok(())
}

fn cmd_simulate(cfg: &ScenarioConfig, mode: Option<ModeArg>, out: &mut String) -> Result<()> {
    if cfg.mc.trials < LOW_TRIALS {
        eprintln!("warning: only {} trials; the standard error is unreliable", cfg.mc.trials);
    }
    let e = estimate_p_inf(&cfg.validated()?, &mc_options(mode))?;
    if e.clamp_events > 0 {
        eprintln!("warning: {} distances clamped to the minimum", e.clamp_events);
    }
    out.push_str("p_hat,std_err,ci_lo,ci_hi,trials,seed\n");
    let _ = writeln!(out, "{},{},{},{},{},{}", num(e.p_inf_hat), num(e.std_err), num(e.ci95.0), num(e.ci95.1), e.trials, e.seed);
    Ok(())
}

/// Agreement rule for one comparison row.
pub fn compare_passes(gap: f64, std_err: f64) -> bool {
    gap <= 3.0 * std_err + 0.03
}

fn cmd_compare(cfg: &ScenarioConfig, grid: &Grid, mode: Option<ModeArg>, out: &mut String) -> Result<()> {
    out.push_str("V_th,p_analytic,p_mc,std_err,gap,pass\n");
    let thresholds = grid.points();
    if thresholds.is_empty() {
        return Ok(());
    }
    let analytic = p_inf_curve(cfg, &thresholds)?;
    let mc = estimate_p_inf_multi(cfg, &thresholds, &mc_options(mode))?;
    let mut failed = 0;
    for ((t, a), m) in thresholds.iter().zip(&analytic).zip(&mc) {
        let gap = (a.p_inf - m.p_inf_hat).abs();
        let pass = compare_passes(gap, m.std_err);
        failed += usize::from(!pass);
        let _ = writeln!(out, "{},{},{},{},{},{}", num(*t), num(a.p_inf), num(m.p_inf_hat), num(m.std_err), num(gap), pass);
    }
    if failed > 0 {
        Err(CliError::CompareFailed { failed, rows: thresholds.len() })
    } else {
        Ok(())
    }
}

/// Applies one sweep value to a copy of `cfg`.
pub fn apply_sweep(cfg: &ScenarioConfig, param: SweepParam, value: f64) -> Result<ScenarioConfig> {
    let mut c = *cfg;
    match param {
        SweepParam::NInfected => {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                return Err(CliError::Usage(format!("{} must be a positive integer, got {value}", param.name())));
            }
            c.n_infected = value as u32;
        }
        SweepParam::PathLoss => c.path_loss = value,
        SweepParam::VolThreshold => c.vol_threshold = value,
        SweepParam::Radius => c.radius = value,
        SweepParam::Step => match &mut c.mobility {
            MobilityParams::RandomWalk { step, .. } => *step = value,
            MobilityParams::RandomDirection { step_max, .. } => *step_max = value,
            _ => {
                return Err(CliError::Usage(format!("`{}` does not apply to the {} model", param.name(), cfg.model().as_str())));
            }
        },
    }
    Ok(c)
}

fn cmd_sweep(cfg: &ScenarioConfig, grid: &Grid, param: SweepParam, values: &[f64], out: &mut String) -> Result<()> {
    let thresholds = grid.points();
    out.push_str("param_value,v_th,p_inf\n");
    for &v in values {
        let c = apply_sweep(cfg, param, v)?;
        let curve = p_inf_curve(&c, &thresholds)?;
        for (t, r) in thresholds.iter().zip(&curve) {
            let _ = writeln!(out, "{},{},{}", num(v), num(*t), num(r.p_inf));
        }
    }
    Ok(())
}

fn cmd_trails(cfg: &ScenarioConfig, individuals: usize, duration: f64, dt: Option<f64>, out: &mut String) -> Result<()> {
    let cfg = cfg.validated()?;
    let dt = dt.unwrap_or(cfg.mc.time_step);
    let rows = trails(&cfg.mobility, cfg.radius, individuals, duration, dt, cfg.mc.burn_in_steps, cfg.mc.seed)?;
    out.push_str("individual,step,t,x,y\n");
    for p in rows {
        let _ = writeln!(out, "{},{},{},{},{}", p.individual, p.step, num(p.t), num(p.position.x), num(p.position.y));
    }
    Ok(())
}

/// Builds the law selected by `law` for `cfg`.
pub fn select_law(cfg: &ScenarioConfig, law: LawArg) -> Result<Box<dyn DistanceLaw>> {
    let d = cfg.radius;
    let stationary = |model: MobilityParams| -> Result<Box<dyn DistanceLaw>> {
        Ok(match model {
            MobilityParams::Static | MobilityParams::RandomDirection { .. } => Box::new(disk_uniform_law(d)?),
            MobilityParams::RandomWalk { step, .. } => Box::new(rwk_law_cached(d, step)?),
            MobilityParams::RandomWaypoint { .. } => Box::new(rwp_law(d)?),
        })
    };
    Ok(match law {
        LawArg::Stationary => stationary(cfg.mobility)?,
        LawArg::Nearest => Box::new(nearest_of_n(stationary(cfg.mobility)?, cfg.n_infected)?),
        LawArg::Disk => Box::new(disk_uniform_law(d)?),
        LawArg::Rwk => {
            let step = match cfg.mobility {
                MobilityParams::RandomWalk { step, .. } => step,
                _ => epirisk::scenario::DEFAULT_RWK_STEP.min(d),
            };
            Box::new(rwk_law_cached(d, step)?)
        }
        LawArg::Rwp => Box::new(rwp_law(d)?),
    })
}

fn cmd_dump_law(
    cfg: &ScenarioConfig,
    law: LawArg,
    points: usize,
    histogram: Option<usize>,
    samples: usize,
    out: &mut String,
) -> Result<()> {
    let cfg = cfg.validated()?;
    let l = select_law(&cfg, law)?;
    match histogram {
        None => {
            if points < 2 {
                return Err(CliError::Usage("--points must be at least 2".into()));
            }
            out.push_str("x,pdf,cdf\n");
            for (x, p, c) in tabulate(&l, points) {
                let _ = writeln!(out, "{},{},{}", num(x), num(p), num(c));
            }
        }
        Some(bins) => {
            if bins == 0 || samples == 0 {
                return Err(CliError::Usage("--histogram and --samples must be positive".into()));
            }
            let mut xs = distance_samples(&cfg.mobility, cfg.radius, samples, cfg.mc.seed)?;
            let ks = ks_statistic(&mut xs, |x| l.cdf(x));
            eprintln!("ks = {ks:?}");
            out.push_str("bin_lo,bin_hi,count,density\n");
            for b in equal_probability_histogram(&xs, bins) {
                let _ = writeln!(out, "{},{},{},{}", num(b.lo), num(b.hi), b.count, num(b.density));
            }
        }
    }
    Ok(())
}

fn cmd_report(cfg: &ScenarioConfig, warn_threshold: f64, with_mc: bool, mode: Option<ModeArg>, out: &mut String) -> Result<()> {
    if !(0.0..=1.0).contains(&warn_threshold) {
        return Err(CliError::Usage(format!("--warn-threshold must lie in [0, 1], got {warn_threshold}")));
    }
    let analytic = p_inf(cfg)?;
    let mc = if with_mc { Some(estimate_p_inf(cfg, &mc_options(mode))?) } else { None };
    let report = RiskReport::new(*cfg, analytic, mc, warn_threshold);
    if report.warn {
        eprintln!("warning: infectious probability {:.4} exceeds {}", analytic.p_inf, warn_threshold);
    }
    out.push_str(&report.render());
    Ok(())
}
