//! Experiment parameters and the flat `key = value` config format.
//!
//! ```text
//! # cell geometry
//! radius = 100
//! n_infected = 20
//! path_loss = 2
//! vol_threshold = 0.1
//! mobility.model = static
//! ```
//!
//! Missing keys fall back to defaults in [`parse_config`]; [`parse_config_strict`]
//! insists on the scenario-defining keys. Virus volumes are dimensionless.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_VOL_MIN: f64 = 0.5;
pub const DEFAULT_VOL_MAX: f64 = 1.5;
pub const DEFAULT_RADIUS: f64 = 100.0;
pub const DEFAULT_N_INFECTED: u32 = 20;
pub const DEFAULT_PATH_LOSS: f64 = 2.5;
pub const DEFAULT_VOL_THRESHOLD: f64 = 0.01;
pub const DEFAULT_RWK_STEP: f64 = 20.0;
pub const DEFAULT_SPEED: f64 = 3.0;
pub const DEFAULT_RD_PAUSE: f64 = 0.1;

/// Keys accepted by the config parser, in serialization order.
pub const KEYS: [&str; 19] = [
    "radius",
    "n_infected",
    "vol_min",
    "vol_max",
    "path_loss",
    "vol_threshold",
    "detention_time",
    "mobility.model",
    "mobility.step",
    "mobility.speed",
    "mobility.speed_min",
    "mobility.speed_max",
    "mobility.pause_min",
    "mobility.pause_max",
    "mc.trials",
    "mc.burn_in_steps",
    "mc.time_step",
    "mc.seed",
    "mc.workers",
];

const STRICT_KEYS: [&str; 6] = ["radius", "n_infected", "path_loss", "vol_threshold", "detention_time", "mobility.model"];

/// Mobility model tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MobilityModel {
    Static,
    RandomDirection,
    RandomWalk,
    RandomWaypoint,
}

impl MobilityModel {
    pub fn as_str(self) -> &'static str {
        match self {
            MobilityModel::Static => "static",
            MobilityModel::RandomDirection => "rd",
            MobilityModel::RandomWalk => "rwk",
            MobilityModel::RandomWaypoint => "rwp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Some(MobilityModel::Static),
            "rd" => Some(MobilityModel::RandomDirection),
            "rwk" => Some(MobilityModel::RandomWalk),
            "rwp" => Some(MobilityModel::RandomWaypoint),
            _ => None,
        }
    }
}

impl fmt::Display for MobilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mobility model with its parameters (lengths in m, speeds in m/s, pauses in s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityParams {
    Static,
    /// Random direction; legs are uniform on `(0, step_max]` and each turning
    /// point carries a pause drawn uniformly from `[pause_min, pause_max]`.
    RandomDirection { speed: f64, step_max: f64, pause_min: f64, pause_max: f64 },
    /// Random walk with fixed leg length `step`.
    RandomWalk { step: f64, speed: f64 },
    /// Random waypoint with per-leg speed and pause drawn uniformly.
    RandomWaypoint { speed_min: f64, speed_max: f64, pause_min: f64, pause_max: f64 },
}

impl MobilityParams {
    pub fn model(&self) -> MobilityModel {
        match self {
            MobilityParams::Static => MobilityModel::Static,
            MobilityParams::RandomDirection { .. } => MobilityModel::RandomDirection,
            MobilityParams::RandomWalk { .. } => MobilityModel::RandomWalk,
            MobilityParams::RandomWaypoint { .. } => MobilityModel::RandomWaypoint,
        }
    }

    /// Default parameters for `model` in a cell of radius `radius`.
    pub fn default_for(model: MobilityModel, radius: f64) -> Self {
        match model {
            MobilityModel::Static => MobilityParams::Static,
            MobilityModel::RandomDirection => MobilityParams::RandomDirection {
                speed: DEFAULT_SPEED,
                step_max: radius,
                pause_min: DEFAULT_RD_PAUSE,
                pause_max: DEFAULT_RD_PAUSE,
            },
            MobilityModel::RandomWalk => MobilityParams::RandomWalk { step: DEFAULT_RWK_STEP, speed: DEFAULT_SPEED },
            MobilityModel::RandomWaypoint => {
                MobilityParams::RandomWaypoint { speed_min: 1.0, speed_max: 5.0, pause_min: 0.0, pause_max: 1.0 }
            }
        }
    }

    /// Representative (mean) speed, used to size mixing times.
    pub fn typical_speed(&self) -> Option<f64> {
        match *self {
            MobilityParams::Static => None,
            MobilityParams::RandomDirection { speed, .. } | MobilityParams::RandomWalk { speed, .. } => Some(speed),
            MobilityParams::RandomWaypoint { speed_min, speed_max, .. } => Some(0.5 * (speed_min + speed_max)),
        }
    }

    fn violations(&self, radius: f64, out: &mut Vec<Violation>) {
        let mut positive = |field: &'static str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                out.push(Violation::new(field, format!("{field} > 0")));
            }
        };
        match *self {
            MobilityParams::Static => {}
            MobilityParams::RandomDirection { speed, step_max, .. } => {
                positive("mobility.speed", speed);
                positive("mobility.step", step_max);
            }
            MobilityParams::RandomWalk { step, speed } => {
                positive("mobility.speed", speed);
                positive("mobility.step", step);
            }
            MobilityParams::RandomWaypoint { speed_min, speed_max, .. } => {
                positive("mobility.speed_min", speed_min);
                positive("mobility.speed_max", speed_max);
                if speed_min > speed_max {
                    out.push(Violation::new("mobility.speed_min", "speed_min <= speed_max"));
                }
            }
        }
        if let MobilityParams::RandomDirection { pause_min, pause_max, .. }
        | MobilityParams::RandomWaypoint { pause_min, pause_max, .. } = *self
        {
            if !(pause_min >= 0.0) {
                out.push(Violation::new("mobility.pause_min", "pause_min >= 0"));
            }
            if !(pause_min <= pause_max) || !pause_max.is_finite() {
                out.push(Violation::new("mobility.pause_min", "pause_min <= pause_max"));
            }
        }
        if let MobilityParams::RandomWalk { step, .. } = *self {
            if step >= radius {
                out.push(Violation::new("mobility.step", "step < radius"));
            }
        }
    }
}

/// Monte-Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub burn_in_steps: u64,
    /// Trajectory time step in seconds.
    pub time_step: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { trials: 100_000, burn_in_steps: 2_000, time_step: 0.1, seed: 0, workers: 1 }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// Cell radius `D` in meters.
    pub radius: f64,
    /// Number of infected individuals `N`.
    pub n_infected: u32,
    pub vol_min: f64,
    pub vol_max: f64,
    /// Path-loss exponent `eta`.
    pub path_loss: f64,
    pub vol_threshold: f64,
    /// Detention time `T` in seconds.
    pub detention_time: f64,
    pub mobility: MobilityParams,
    pub mc: McSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            n_infected: DEFAULT_N_INFECTED,
            vol_min: DEFAULT_VOL_MIN,
            vol_max: DEFAULT_VOL_MAX,
            path_loss: DEFAULT_PATH_LOSS,
            vol_threshold: DEFAULT_VOL_THRESHOLD,
            detention_time: 0.0,
            mobility: MobilityParams::Static,
            mc: McSettings::default(),
        }
    }
}

impl ScenarioConfig {
    /// Static cell with default volumes and MC settings.
    pub fn static_cell(n_infected: u32, radius: f64, path_loss: f64, vol_threshold: f64) -> Self {
        Self { radius, n_infected, path_loss, vol_threshold, ..Self::default() }
    }

    pub fn with_mobility(mut self, mobility: MobilityParams) -> Self {
        self.mobility = mobility;
        self
    }

    pub fn with_threshold(mut self, vol_threshold: f64) -> Self {
        self.vol_threshold = vol_threshold;
        self
    }

    pub fn model(&self) -> MobilityModel {
        self.mobility.model()
    }

    /// `E[V]` for the uniform volume law.
    pub fn volume_mean(&self) -> f64 {
        0.5 * (self.vol_min + self.vol_max)
    }

    /// `E[V^2]` for the uniform volume law.
    pub fn volume_second_moment(&self) -> f64 {
        (self.vol_min * self.vol_min + self.vol_min * self.vol_max + self.vol_max * self.vol_max) / 3.0
    }

    /// Every violated invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Non-fatal remarks (currently: path loss outside `[2, 7]`).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !(2.0..=7.0).contains(&self.path_loss) {
            w.push(format!("path_loss = {} lies outside the usual range [2, 7]", self.path_loss));
        }
        w
    }

    /// Returns `self` if valid, otherwise an [`Error::Invalid`] listing every violation.
    pub fn validated(self) -> Result<Self> {
        let v = validate(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(v.into_iter().map(|v| v.to_string()).collect()))
        }
    }

    /// Serializes to the config format; [`parse_config`] reads it back unchanged.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("radius", fmt_f64(self.radius));
        put("n_infected", self.n_infected.to_string());
        put("vol_min", fmt_f64(self.vol_min));
        put("vol_max", fmt_f64(self.vol_max));
        put("path_loss", fmt_f64(self.path_loss));
        put("vol_threshold", fmt_f64(self.vol_threshold));
        put("detention_time", fmt_f64(self.detention_time));
        put("mobility.model", self.model().as_str().to_string());
        match self.mobility {
            MobilityParams::Static => {}
            MobilityParams::RandomDirection { speed, step_max, pause_min, pause_max } => {
                put("mobility.step", fmt_f64(step_max));
                put("mobility.speed", fmt_f64(speed));
                put("mobility.pause_min", fmt_f64(pause_min));
                put("mobility.pause_max", fmt_f64(pause_max));
            }
            MobilityParams::RandomWalk { step, speed } => {
                put("mobility.step", fmt_f64(step));
                put("mobility.speed", fmt_f64(speed));
            }
            MobilityParams::RandomWaypoint { speed_min, speed_max, pause_min, pause_max } => {
                put("mobility.speed_min", fmt_f64(speed_min));
                put("mobility.speed_max", fmt_f64(speed_max));
                put("mobility.pause_min", fmt_f64(pause_min));
                put("mobility.pause_max", fmt_f64(pause_max));
            }
        }
        put("mc.trials", self.mc.trials.to_string());
        put("mc.burn_in_steps", self.mc.burn_in_steps.to_string());
        put("mc.time_step", fmt_f64(self.mc.time_step));
        put("mc.seed", self.mc.seed.to_string());
        put("mc.workers", self.mc.workers.to_string());
        s
    }
}

fn fmt_f64(x: f64) -> String {
    // `{:?}` is the shortest representation that round-trips
    format!("{x:?}")
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: String,
}

impl Violation {
    fn new(field: &'static str, rule: impl Into<String>) -> Self {
        Self { field, rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: requires {}", self.field, self.rule)
    }
}

/// Checks every invariant of `cfg` and returns all violations.
pub fn validate(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(cfg.radius > 0.0 && cfg.radius.is_finite()) {
        out.push(Violation::new("radius", "radius > 0"));
    }
    if cfg.n_infected < 1 {
        out.push(Violation::new("n_infected", "n_infected >= 1"));
    }
    if !(cfg.vol_min > 0.0) {
        out.push(Violation::new("vol_min", "vol_min > 0"));
    }
    if !(cfg.vol_min < cfg.vol_max) || !cfg.vol_max.is_finite() {
        out.push(Violation::new("vol_min", "vol_min < vol_max"));
    }
    if !cfg.path_loss.is_finite() || cfg.path_loss <= 0.0 {
        out.push(Violation::new("path_loss", "path_loss > 0"));
    }
    if !(cfg.vol_threshold > 0.0) {
        out.push(Violation::new("vol_threshold", "vol_threshold > 0"));
    }
    if !(cfg.detention_time >= 0.0) || !cfg.detention_time.is_finite() {
        out.push(Violation::new("detention_time", "detention_time >= 0"));
    }
    cfg.mobility.violations(cfg.radius, &mut out);
    if cfg.mc.trials < 1 {
        out.push(Violation::new("mc.trials", "trials >= 1"));
    }
    if !(cfg.mc.time_step > 0.0) || !cfg.mc.time_step.is_finite() {
        out.push(Violation::new("mc.time_step", "time_step > 0"));
    }
    out
}

struct RawDoc<'a> {
    entries: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> RawDoc<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse { line, message: format!("expected `key = value`, found `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::Parse { line, message: format!("unknown key `{key}`") });
            };
            if value.is_empty() {
                return Err(Error::Parse { line, message: format!("missing value for `{key}`") });
            }
            if entries.insert(known, (line, value)).is_some() {
                return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self { entries })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(&(line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Parse { line, message: format!("cannot parse `{v}` for `{key}`") }),
        }
    }

    fn num(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get::<f64>(key)?.unwrap_or(default))
    }
}

/// Parses a config document, filling absent keys with defaults, then validates.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_impl(text, false)
}

/// Like [`parse_config`] but requires the scenario-defining keys
/// (`radius`, `n_infected`, `path_loss`, `vol_threshold`, `detention_time`, `mobility.model`).
pub fn parse_config_strict(text: &str) -> Result<ScenarioConfig> {
    parse_impl(text, true)
}

fn parse_impl(text: &str, strict: bool) -> Result<ScenarioConfig> {
    let doc = RawDoc::parse(text)?;
    if strict {
        let missing: Vec<String> = STRICT_KEYS
            .iter()
            .filter(|k| !doc.entries.contains_key(*k))
            .map(|k| format!("{k}: missing (required in strict mode)"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Invalid(missing));
        }
    }

    let d = ScenarioConfig::default();
    let radius = doc.num("radius", d.radius)?;
    let model = match doc.entries.get("mobility.model") {
        None => MobilityModel::Static,
        Some(&(line, v)) => MobilityModel::parse(v)
            .ok_or_else(|| Error::Parse { line, message: format!("unknown mobility model `{v}` (static, rd, rwk, rwp)") })?,
    };
    let mobility = match MobilityParams::default_for(model, radius) {
        MobilityParams::Static => MobilityParams::Static,
        MobilityParams::RandomDirection { speed, step_max, pause_min, pause_max } => MobilityParams::RandomDirection {
            speed: doc.num("mobility.speed", speed)?,
            step_max: doc.num("mobility.step", step_max)?,
            pause_min: doc.num("mobility.pause_min", pause_min)?,
            pause_max: doc.num("mobility.pause_max", pause_max)?,
        },
        MobilityParams::RandomWalk { step, speed } => MobilityParams::RandomWalk {
            step: doc.num("mobility.step", step)?,
            speed: doc.num("mobility.speed", speed)?,
        },
        MobilityParams::RandomWaypoint { speed_min, speed_max, pause_min, pause_max } => {
            MobilityParams::RandomWaypoint {
                speed_min: doc.num("mobility.speed_min", speed_min)?,
                speed_max: doc.num("mobility.speed_max", speed_max)?,
                pause_min: doc.num("mobility.pause_min", pause_min)?,
                pause_max: doc.num("mobility.pause_max", pause_max)?,
            }
        }
    };

    let mc = McSettings {
        trials: doc.get("mc.trials")?.unwrap_or(d.mc.trials),
        burn_in_steps: doc.get("mc.burn_in_steps")?.unwrap_or(d.mc.burn_in_steps),
        time_step: doc.num("mc.time_step", d.mc.time_step)?,
        seed: doc.get("mc.seed")?.unwrap_or(d.mc.seed),
        workers: doc.get("mc.workers")?.unwrap_or(d.mc.workers),
    };

    ScenarioConfig {
        radius,
        n_infected: doc.get("n_infected")?.unwrap_or(d.n_infected),
        vol_min: doc.num("vol_min", d.vol_min)?,
        vol_max: doc.num("vol_max", d.vol_max)?,
        path_loss: doc.num("path_loss", d.path_loss)?,
        vol_threshold: doc.num("vol_threshold", d.vol_threshold)?,
        detention_time: doc.num("detention_time", d.detention_time)?,
        mobility,
        mc,
    }
    .validated()
}
