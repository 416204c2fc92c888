use std::fmt::Write as _;

use epirisk::analytic::AnalyticResult;
use epirisk::montecarlo::McEstimate;
use epirisk::ScenarioConfig;

pub const DEFAULT_WARN_THRESHOLD: f64 = 0.5;

/// Analytic result, optional simulation cross-check and the warning flag.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub config: ScenarioConfig,
    pub analytic: AnalyticResult,
    pub mc: Option<McEstimate>,
    /// `|p_analytic - p_mc|`, present with a simulation.
    pub agreement: Option<f64>,
    pub warn_threshold: f64,
    pub warn: bool,
}

impl RiskReport {
    pub fn new(config: ScenarioConfig, analytic: AnalyticResult, mc: Option<McEstimate>, warn_threshold: f64) -> Self {
        let agreement = mc.map(|m| (analytic.p_inf - m.p_inf_hat).abs());
        let warn = analytic.p_inf > warn_threshold;
        RiskReport { config, analytic, mc, agreement, warn_threshold, warn }
    }

    /// Sectioned `key = value` text; the `[config]` section is a valid config file.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[config]");
        s.push_str(&self.config.to_config_string());
        let a = &self.analytic;
        let _ = writeln!(s, "[analytic]");
        let _ = writeln!(s, "model = {}", a.model.as_str());
        let _ = writeln!(s, "p_inf = {:?}", a.p_inf);
        let _ = writeln!(s, "r_total = {:?}", a.r_total);
        let _ = writeln!(s, "quadrature_error_estimate = {:?}", a.quadrature_error_estimate);
        let _ = writeln!(s, "small_n = {}", a.small_n);
        if let Some(m) = &self.mc {
            let _ = writeln!(s, "[mc]");
            let _ = writeln!(s, "mode = {}", m.mode.as_str());
            let _ = writeln!(s, "p_hat = {:?}", m.p_inf_hat);
            let _ = writeln!(s, "std_err = {:?}", m.std_err);
            let _ = writeln!(s, "ci_lo = {:?}", m.ci95.0);
            let _ = writeln!(s, "ci_hi = {:?}", m.ci95.1);
            let _ = writeln!(s, "trials = {}", m.trials);
            let _ = writeln!(s, "seed = {}", m.seed);
            let _ = writeln!(s, "clamp_events = {}", m.clamp_events);
        }
        let _ = writeln!(s, "[summary]");
        if let Some(g) = self.agreement {
            let _ = writeln!(s, "agreement = {g:?}");
        }
        let _ = writeln!(s, "warn_threshold = {:?}", self.warn_threshold);
        let _ = writeln!(s, "warn = {}", self.warn);
        s
    }
}
