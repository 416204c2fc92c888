//! Goodness-of-fit helpers: one-sample Kolmogorov-Smirnov, histograms and
//! running moments.

/// Two-sided one-sample KS statistic `sup |F_n(x) - F(x)|`.
///
/// Sorts `samples` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// Two-sample KS statistic. Sorts both slices in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One histogram bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// `count / (total * width)`.
    pub density: f64,
}

/// Histogram whose bin edges are empirical quantiles, so every bin holds
/// (nearly) the same number of samples. `samples` must be sorted.
pub fn equal_probability_histogram(sorted: &[f64], bins: usize) -> Vec<Bin> {
    if sorted.is_empty() || bins == 0 {
        return Vec::new();
    }
    let n = sorted.len();
    let mut edges: Vec<f64> = (0..=bins)
        .map(|k| {
            let idx = (k * (n - 1)) / bins;
            sorted[idx]
        })
        .collect();
    edges.dedup();
    let total = n as f64;
    let mut out = Vec::with_capacity(edges.len().saturating_sub(1));
    let mut start = 0usize;
    for (k, w) in edges.windows(2).enumerate() {
        let last = k + 2 == edges.len();
        let end = if last { n } else { sorted.partition_point(|&x| x < w[1]) };
        let count = (end - start) as u64;
        let width = w[1] - w[0];
        let density = if width > 0.0 { count as f64 / (total * width) } else { 0.0 };
        out.push(Bin { lo: w[0], hi: w[1], count, density });
        start = end;
    }
    out
}

/// Welford accumulator for mean, variance and the fourth central moment.
#[derive(Debug, Clone, Copy, Default)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance, `sqrt((m4 - s^4) / n)`.
    pub fn std_err_variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m4 = self.m4 / n;
        let s2 = self.m2 / n;
        ((m4 - s2 * s2).max(0.0) / n).sqrt()
    }
}
