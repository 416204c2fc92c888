use std::fmt;
use std::str::FromStr;

/// Threshold grid `lo:hi:steps[:log]`: `steps` points from `lo` to `hi`
/// inclusive, linearly or geometrically spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub log: bool,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if i == n - 1 {
                        self.hi
                    } else if self.log {
                        self.lo * (self.hi / self.lo).powf(t)
                    } else {
                        self.lo + (self.hi - self.lo) * t
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.get(3) {
            None => false,
            Some(&"log") => true,
            Some(&"lin") => false,
            Some(other) => return Err(format!("unknown spacing `{other}`, expected `log`")),
        };
        if parts.len() < 3 || parts.len() > 4 {
            return Err(format!("expected lo:hi:steps[:log], got `{s}`"));
        }
        let num = |p: &str, name: &str| p.trim().parse::<f64>().map_err(|_| format!("cannot parse {name} `{p}`"));
        let lo = num(parts[0], "lo")?;
        let hi = num(parts[1], "hi")?;
        let steps = parts[2].trim().parse::<usize>().map_err(|_| format!("cannot parse steps `{}`", parts[2]))?;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(format!("need finite lo <= hi, got {lo}:{hi}"));
        }
        if lo < 0.0 {
            return Err(format!("thresholds must be nonnegative, got lo = {lo}"));
        }
        if log && lo <= 0.0 {
            return Err("log spacing needs lo > 0".into());
        }
        Ok(Grid { lo, hi, steps, log })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}{}", self.lo, self.hi, self.steps, if self.log { ":log" } else { "" })
    }
}
