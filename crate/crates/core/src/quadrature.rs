//! Adaptive Gauss-Kronrod (G10/K21) integration and fixed Gauss-Legendre rules.
//!
//! The adaptive driver keeps a list of panels and repeatedly bisects the one
//! with the largest error estimate until the summed error meets
//! `max(abs_tol, rel_tol * |I|)` or the subdivision budget is spent. Callers
//! hand in breakpoints wherever the integrand has kinks or steep power-law
//! behaviour so the initial panels already resolve them.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One application of the 21-point Kronrod rule on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub error: f64,
}

/// Evaluates the G10/K21 pair on `[a, b]` with QUADPACK-style error scaling.
#[allow(clippy::needless_range_loop)]
pub fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += WG[j] * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let raw_err = ((res_kronrod - res_gauss) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    let mut err = raw_err;
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Panel { lo: a, hi: b, value: res_kronrod * half, error: err }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(1e-10, 1e-6, 60)
    }
}

impl Quadrature {
    pub const fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Self {
        Self { abs_tol, rel_tol, max_subdivisions }
    }

    /// Integrates over `[a, b]`, failing if the error target is not met.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]` with the given interior breakpoints.
    ///
    /// `points` must be nondecreasing; zero-width panels are skipped.
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        let est = self.estimate(f, points);
        if est.converged {
            Ok(est)
        } else {
            Err(Error::Quadrature {
                lo: points.first().copied().unwrap_or(0.0),
                hi: points.last().copied().unwrap_or(0.0),
                value: est.value,
                error: est.error,
            })
        }
    }

    /// Like [`Quadrature::integrate_with_breaks`] but always returns the best
    /// estimate, flagging convergence instead of failing.
    pub fn estimate<F: FnMut(f64) -> f64>(&self, mut f: F, points: &[f64]) -> Estimate {
        let mut panels: Vec<Panel> = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| gauss_kronrod_21(&mut f, w[0], w[1]))
            .collect();
        if panels.is_empty() {
            return Estimate { value: 0.0, error: 0.0, subdivisions: 0, converged: true };
        }

        let mut subdivisions = 0;
        loop {
            let value: f64 = panels.iter().map(|p| p.value).sum();
            let error: f64 = panels.iter().map(|p| p.error).sum();
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if !value.is_finite() {
                return Estimate { value, error: f64::INFINITY, subdivisions, converged: false };
            }
            if error <= target {
                return Estimate { value, error, subdivisions, converged: true };
            }
            if subdivisions >= self.max_subdivisions {
                return Estimate { value, error, subdivisions, converged: false };
            }

            // worst panel that can still be split meaningfully
            let worst = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    let mid = 0.5 * (p.lo + p.hi);
                    mid > p.lo && mid < p.hi && (p.hi - p.lo) > 1e3 * f64::EPSILON * p.hi.abs().max(p.lo.abs())
                })
                .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
                .map(|(i, _)| i);
            let Some(i) = worst else {
                return Estimate { value, error, subdivisions, converged: error <= 10.0 * target };
            };

            let p = panels.swap_remove(i);
            let mid = 0.5 * (p.lo + p.hi);
            panels.push(gauss_kronrod_21(&mut f, p.lo, mid));
            panels.push(gauss_kronrod_21(&mut f, mid, p.hi));
            subdivisions += 1;
        }
    }
}

/// Geometric breakpoints `lo, lo*r, lo*r^2, ..., hi` for integrands with
/// power-law behaviour near a small positive lower limit.
pub fn geometric_breaks(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    debug_assert!(lo > 0.0 && ratio > 1.0);
    let mut pts = vec![lo];
    let mut x = lo * ratio;
    while x < hi {
        pts.push(x);
        x *= ratio;
    }
    pts.push(hi);
    pts
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
