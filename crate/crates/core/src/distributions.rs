//! Distance laws between the susceptible individual (at the cell centre) and
//! an infected individual.
//!
//! Every law implements [`DistanceLaw`]: a density, a CDF, a quantile function
//! and a sampler over a bounded support. Concrete laws:
//!
//! - [`DiskUniform`]: uniform position in the disk, `f(r) = 2r / D^2`
//! - [`NearestOfN`]: minimum of `N` i.i.d. draws from a base law
//! - [`MinorGivenNearestDisk`]: uniform position conditioned on `r >= r1`
//! - [`Truncated`]: any law conditioned on `x >= lo`
//! - [`RwkLaw`]: random-walk endpoint law, tabulated from the lens-area marginalization
//! - [`RwpLaw`]: random-waypoint polynomial law
//! - [`RwpMinorGivenNearest`]: exact random-waypoint law conditioned on `u >= u1` (unit disk)

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, Quadrature};

/// A probability law on a bounded distance interval.
pub trait DistanceLaw: Send + Sync {
    /// Closed support `[lo, hi]`.
    fn support(&self) -> (f64, f64);

    /// Density; zero outside the support.
    fn pdf(&self, x: f64) -> f64;

    /// Cumulative distribution; 0 below and 1 above the support.
    fn cdf(&self, x: f64) -> f64;

    /// Survival function `1 - F(x)`. Laws override this where the complement
    /// can be computed without cancellation.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Inverse CDF by bisection.
    fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Draws one distance by inversion.
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.gen();
        self.quantile(u)
    }

    /// Interior points where the density changes character (kinks, steep
    /// ramps). Integrators split there.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        vec![lo, hi]
    }
}

macro_rules! forward_law {
    ($($ptr:ty),*) => {$(
        impl<T: DistanceLaw + ?Sized> DistanceLaw for $ptr {
            fn support(&self) -> (f64, f64) {
                (**self).support()
            }
            fn pdf(&self, x: f64) -> f64 {
                (**self).pdf(x)
            }
            fn cdf(&self, x: f64) -> f64 {
                (**self).cdf(x)
            }
            fn sf(&self, x: f64) -> f64 {
                (**self).sf(x)
            }
            fn quantile(&self, p: f64) -> f64 {
                (**self).quantile(p)
            }
            fn sample(&self, rng: &mut dyn RngCore) -> f64 {
                (**self).sample(rng)
            }
            fn breakpoints(&self) -> Vec<f64> {
                (**self).breakpoints()
            }
        }
    )*};
}

forward_law!(&T, Box<T>, std::sync::Arc<T>);

/// Tabulates `law` on `points` evenly spaced points spanning its support,
/// returning `(x, pdf, cdf)` rows.
pub fn tabulate<L: DistanceLaw + ?Sized>(law: &L, points: usize) -> Vec<(f64, f64, f64)> {
    let (lo, hi) = law.support();
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let x = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            (x, law.pdf(x), law.cdf(x))
        })
        .collect()
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("radius", format!("must be positive, got {radius}")))
    }
}

// ---------------------------------------------------------------------------
// Uniform disk

/// Distance of a point uniform in a disk of radius `D` to its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskUniform {
    radius: f64,
}

/// `f(r) = 2r / D^2` on `(0, D]`.
pub fn disk_uniform_law(radius: f64) -> Result<DiskUniform> {
    check_radius(radius)?;
    Ok(DiskUniform { radius })
}

impl DiskUniform {
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl DistanceLaw for DiskUniform {
    fn support(&self) -> (f64, f64) {
        (0.0, self.radius)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x > self.radius {
            0.0
        } else {
            2.0 * x / (self.radius * self.radius)
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        let t = (x / self.radius).clamp(0.0, 1.0);
        t * t
    }
    fn sf(&self, x: f64) -> f64 {
        let t = (x / self.radius).clamp(0.0, 1.0);
        (1.0 - t) * (1.0 + t)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.radius * p.clamp(0.0, 1.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Order statistic

/// Law of the minimum of `n` independent draws from `base`.
#[derive(Debug, Clone)]
pub struct NearestOfN<L> {
    base: L,
    n: u32,
}

/// `f_1(x) = N (1 - F(x))^(N-1) f(x)`.
pub fn nearest_of_n<L: DistanceLaw>(base: L, n: u32) -> Result<NearestOfN<L>> {
    if n == 0 {
        return Err(Error::domain("n", "need at least one individual"));
    }
    Ok(NearestOfN { base, n })
}

impl<L> NearestOfN<L> {
    pub fn base(&self) -> &L {
        &self.base
    }
    pub fn n(&self) -> u32 {
        self.n
    }
}

impl<L: DistanceLaw> DistanceLaw for NearestOfN<L> {
    fn support(&self) -> (f64, f64) {
        self.base.support()
    }
    fn pdf(&self, x: f64) -> f64 {
        let f = self.base.pdf(x);
        if f == 0.0 {
            return 0.0;
        }
        if self.n == 1 {
            return f;
        }
        let s = self.base.sf(x).clamp(0.0, 1.0);
        self.n as f64 * s.powi(self.n as i32 - 1) * f
    }
    fn cdf(&self, x: f64) -> f64 {
        if self.n == 1 {
            return self.base.cdf(x);
        }
        1.0 - self.sf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.base.sf(x).clamp(0.0, 1.0).powi(self.n as i32)
    }
    fn quantile(&self, p: f64) -> f64 {
        if self.n == 1 {
            return self.base.quantile(p);
        }
        // F_1^-1(p) = F^-1(1 - (1-p)^(1/n))
        let q = -libm::expm1(libm::log1p(-p.clamp(0.0, 1.0)) / self.n as f64);
        self.base.quantile(q)
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.base.breakpoints();
        let (lo, hi) = self.support();
        for p in [1e-9, 1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0 - 1e-4, 1.0 - 1e-8] {
            let x = self.quantile(p);
            if x > lo && x < hi {
                pts.push(x);
            }
        }
        sort_dedup(&mut pts);
        pts
    }
}

fn sort_dedup(pts: &mut Vec<f64>) {
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
}

// ---------------------------------------------------------------------------
// Conditional minor laws

/// Uniform-disk distance conditioned on exceeding the nearest distance `r1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorGivenNearestDisk {
    r1: f64,
    radius: f64,
}

/// `f(r | r1) = 2r / (D^2 - r1^2)` on `[r1, D]`.
pub fn minor_given_nearest_disk(r1: f64, radius: f64) -> Result<MinorGivenNearestDisk> {
    check_radius(radius)?;
    if !(r1 >= 0.0 && r1 < radius) {
        return Err(Error::domain("r1", format!("must lie in [0, {radius}), got {r1}")));
    }
    Ok(MinorGivenNearestDisk { r1, radius })
}

impl DistanceLaw for MinorGivenNearestDisk {
    fn support(&self) -> (f64, f64) {
        (self.r1, self.radius)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x < self.r1 || x > self.radius {
            0.0
        } else {
            2.0 * x / ((self.radius - self.r1) * (self.radius + self.r1))
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(self.r1, self.radius);
        (x - self.r1) * (x + self.r1) / ((self.radius - self.r1) * (self.radius + self.r1))
    }
    fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        (self.r1 * self.r1 + p * (self.radius - self.r1) * (self.radius + self.r1)).sqrt()
    }
}

/// `base` conditioned on `x >= lo` (renormalized by the survival `1 - F(lo)`).
#[derive(Debug, Clone)]
pub struct Truncated<L> {
    base: L,
    lo: f64,
    survival: f64,
}

pub fn truncated_above<L: DistanceLaw>(base: L, lo: f64) -> Result<Truncated<L>> {
    let survival = base.sf(lo);
    if !(survival > 0.0) {
        return Err(Error::domain("lo", format!("no probability mass above {lo}")));
    }
    Ok(Truncated { base, lo, survival })
}

impl<L: DistanceLaw> DistanceLaw for Truncated<L> {
    fn support(&self) -> (f64, f64) {
        (self.lo, self.base.support().1)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x < self.lo {
            0.0
        } else {
            self.base.pdf(x) / self.survival
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            0.0
        } else {
            (1.0 - self.base.sf(x) / self.survival).clamp(0.0, 1.0)
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= self.lo {
            1.0
        } else {
            (self.base.sf(x) / self.survival).clamp(0.0, 1.0)
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.base.breakpoints().into_iter().filter(|&x| x > self.lo).collect();
        pts.push(self.lo);
        sort_dedup(&mut pts);
        pts
    }
}

// ---------------------------------------------------------------------------
// Random walk

const ACOS_CLAMP: f64 = 1e-12;

fn clamped_acos(arg: f64) -> Result<f64> {
    if arg.abs() <= 1.0 {
        Ok(arg.acos())
    } else if arg.abs() <= 1.0 + ACOS_CLAMP {
        Ok(arg.signum().acos())
    } else {
        Err(Error::Numerical(format!("arccos argument {arg} outside [-1, 1]: inconsistent lens geometry")))
    }
}

/// Probability that a point uniform in the disk of radius `step` around a
/// start point at distance `z` from the centre lies within distance `l` of
/// the centre (intersection area of the two disks over `pi W^2`).
pub fn rwk_conditional_cdf(l: f64, z: f64, step: f64) -> Result<f64> {
    if !(l >= 0.0) || !(z >= 0.0) || !(step > 0.0) {
        return Err(Error::domain("l, z, step", format!("need l >= 0, z >= 0, step > 0 (got {l}, {z}, {step})")));
    }
    let w = step;
    if l >= z + w {
        return Ok(1.0);
    }
    if z < w && l <= w - z {
        return Ok((l / w) * (l / w));
    }
    if z >= w && l <= z - w {
        return Ok(0.0);
    }
    let theta1 = clamped_acos((w * w + z * z - l * l) / (2.0 * w * z))?;
    let theta2 = clamped_acos((l * l + z * z - w * w) / (2.0 * l * z))?;
    let area = w * w * theta1 + l * l * theta2 - z * w * theta1.sin();
    Ok((area / (PI * w * w)).clamp(0.0, 1.0))
}

const RWK_QUAD: Quadrature = Quadrature::new(1e-14, 1e-12, 400);

/// Marginal CDF of the random-walk distance: the lens probability averaged
/// over a uniform start, `int_0^D F(l | z) 2z / D^2 dz`. Support `[0, D + W]`;
/// the mass beyond `D` belongs to legs that would leave the cell.
pub fn rwk_marginal_cdf(l: f64, radius: f64, step: f64) -> Result<f64> {
    check_radius(radius)?;
    if !(step > 0.0) {
        return Err(Error::domain("step", "must be positive"));
    }
    if l <= 0.0 {
        return Ok(0.0);
    }
    if l >= radius + step {
        return Ok(1.0);
    }
    let mut pts = vec![0.0, radius];
    for p in [l - step, l + step, step - l, step] {
        if p > 0.0 && p < radius {
            pts.push(p);
        }
    }
    sort_dedup(&mut pts);
    let mut failure = None;
    let est = RWK_QUAD.estimate(
        |z| match rwk_conditional_cdf(l, z, step) {
            Ok(c) => c * 2.0 * z / (radius * radius),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &pts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !est.converged && est.error > 1e-9 {
        return Err(Error::Quadrature { lo: 0.0, hi: radius, value: est.value, error: est.error });
    }
    Ok(est.value.clamp(0.0, 1.0))
}

/// Number of grid cells used to tabulate [`RwkLaw`].
pub const RWK_GRID_CELLS: usize = 2000;

/// Random-walk distance law: the lens-area marginal conditioned on staying in
/// the cell (`l <= D`), tabulated on a uniform grid and interpolated with
/// cubic Hermite splines (values from quadrature, slopes from a central
/// difference of the quadrature CDF with step `1e-4 D`).
#[derive(Debug, Clone)]
pub struct RwkLaw {
    radius: f64,
    step: f64,
    h: f64,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    mass_within_radius: f64,
}

/// Builds [`RwkLaw`] for a cell of radius `radius` and leg length `step < radius`.
pub fn rwk_law(radius: f64, step: f64) -> Result<RwkLaw> {
    check_radius(radius)?;
    if !(step > 0.0 && step < radius) {
        return Err(Error::domain("step", format!("need 0 < step < radius, got {step}")));
    }
    let n = RWK_GRID_CELLS;
    let h = radius / n as f64;
    let fd = 1e-4 * radius;
    let mut raw_cdf = Vec::with_capacity(n + 1);
    let mut raw_pdf = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = if i == n { radius } else { i as f64 * h };
        raw_cdf.push(rwk_marginal_cdf(x, radius, step)?);
        let d = if x < fd {
            // F ~ c x^2 near the centre; the one-sided quotient is exact for that shape
            let f2 = rwk_marginal_cdf(fd, radius, step)?;
            2.0 * f2 * x / (fd * fd)
        } else {
            (rwk_marginal_cdf(x + fd, radius, step)? - rwk_marginal_cdf(x - fd, radius, step)?) / (2.0 * fd)
        };
        raw_pdf.push(d.max(0.0));
    }
    let mass = raw_cdf[n];
    let cdf = raw_cdf.iter().map(|c| c / mass).collect();
    let pdf = raw_pdf.iter().map(|d| d / mass).collect();
    Ok(RwkLaw { radius, step, h, cdf, pdf, mass_within_radius: mass })
}

impl RwkLaw {
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    /// Raw marginal CDF at `l = D`: probability that an unconstrained leg ends inside the cell.
    pub fn mass_within_radius(&self) -> f64 {
        self.mass_within_radius
    }

    fn cell(&self, x: f64) -> (usize, f64) {
        let n = self.cdf.len() - 1;
        let i = ((x / self.h) as usize).min(n - 1);
        (i, (x - i as f64 * self.h) / self.h)
    }
}

impl DistanceLaw for RwkLaw {
    fn support(&self) -> (f64, f64) {
        (0.0, self.radius)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x > self.radius {
            return 0.0;
        }
        let (i, t) = self.cell(x);
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.pdf[i] * self.h, self.pdf[i + 1] * self.h);
        // derivative of the cubic Hermite basis
        let t2 = t * t;
        let d = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1;
        (d / self.h).max(0.0)
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.radius {
            return 1.0;
        }
        let (i, t) = self.cell(x);
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.pdf[i] * self.h, self.pdf[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        v.clamp(0.0, 1.0)
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.radius];
        for p in [self.step, 2.0 * self.step, self.radius - self.step] {
            if p > 0.0 && p < self.radius {
                pts.push(p);
            }
        }
        sort_dedup(&mut pts);
        pts
    }
}

// ---------------------------------------------------------------------------
// Random waypoint

/// Polynomial density coefficients over `u = r / D`, powers 1, 3, 5.
pub const RWP_PDF_COEFFS: [f64; 3] = [324.0 / 73.0, -420.0 / 73.0, 96.0 / 73.0];
/// Polynomial CDF coefficients over `u = r / D`, powers 2, 4, 6.
pub const RWP_CDF_COEFFS: [f64; 3] = [162.0 / 73.0, -105.0 / 73.0, 16.0 / 73.0];

/// Random-waypoint stationary distance law (polynomial fit) in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpLaw {
    radius: f64,
}

/// `f(r) = (1/D) sum_i B_i (r/D)^(2i+1)`, `F(r) = sum_j C_j (r/D)^(2j+2)`.
pub fn rwp_law(radius: f64) -> Result<RwpLaw> {
    check_radius(radius)?;
    Ok(RwpLaw { radius })
}

impl RwpLaw {
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl DistanceLaw for RwpLaw {
    fn support(&self) -> (f64, f64) {
        (0.0, self.radius)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x > self.radius {
            return 0.0;
        }
        let u = x / self.radius;
        let u2 = u * u;
        let [b1, b3, b5] = RWP_PDF_COEFFS;
        (u * (b1 + u2 * (b3 + u2 * b5)) / self.radius).max(0.0)
    }
    fn cdf(&self, x: f64) -> f64 {
        let u = (x / self.radius).clamp(0.0, 1.0);
        let u2 = u * u;
        let [c2, c4, c6] = RWP_CDF_COEFFS;
        (u2 * (c2 + u2 * (c4 + u2 * c6))).clamp(0.0, 1.0)
    }
    fn sf(&self, x: f64) -> f64 {
        // 1 - F = w^2 (57 + 16 w) / 73 with w = 1 - u^2, free of cancellation near D
        let u = (x / self.radius).clamp(0.0, 1.0);
        let w = (1.0 - u) * (1.0 + u);
        (w * w * (57.0 + 16.0 * w) / 73.0).clamp(0.0, 1.0)
    }
}

/// Number of Gauss-Legendre nodes used for the angular integral in [`rwp_shape`].
pub const RWP_ANGULAR_ORDER: usize = 64;
const RWP_GRID_CELLS: usize = 8192;

/// `h(u) = 2 (1 - u^2) int_0^pi sqrt(1 - u^2 cos^2 phi) dphi` evaluated by
/// fixed-order Gauss-Legendre quadrature.
pub fn rwp_shape(u: f64) -> f64 {
    // squared cosines at the nodes mapped onto [0, pi/2]; the integrand is symmetric about pi/2
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let rule = RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(RWP_ANGULAR_ORDER);
        nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| {
                let c = (0.25 * PI * (x + 1.0)).cos();
                (c * c, 0.5 * PI * w)
            })
            .collect()
    });
    let u = u.clamp(0.0, 1.0);
    let u2 = u * u;
    let s: f64 = rule.iter().map(|(c2, w)| w * (1.0 - u2 * c2).max(0.0).sqrt()).sum();
    2.0 * (1.0 - u2) * s
}

/// Cached table of `h` and of the cumulative weight `int_0^u t h(t) dt`.
struct RwpTable {
    h: Vec<f64>,
    cum: Vec<f64>,
}

fn rwp_table() -> &'static RwpTable {
    static TABLE: OnceLock<RwpTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = RWP_GRID_CELLS;
        let h: Vec<f64> = (0..=n).map(|i| rwp_shape(i as f64 / n as f64)).collect();
        let mut cum = vec![0.0; n + 1];
        let q = Quadrature::new(1e-15, 1e-13, 20);
        for i in 0..n {
            let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            let part = q.estimate(|t| t * rwp_shape(t), &[a, b]).value;
            cum[i + 1] = cum[i] + part;
        }
        RwpTable { h, cum }
    })
}

/// `h(u)` from the cached grid (linear interpolation).
pub fn rwp_shape_cached(u: f64) -> f64 {
    let t = rwp_table();
    let n = RWP_GRID_CELLS;
    let x = u.clamp(0.0, 1.0) * n as f64;
    let i = (x as usize).min(n - 1);
    let f = x - i as f64;
    t.h[i] * (1.0 - f) + t.h[i + 1] * f
}

/// `int_0^u t h(t) dt` from the cached table, Simpson-corrected within a cell.
pub fn rwp_weight_integral(u: f64) -> f64 {
    let t = rwp_table();
    let n = RWP_GRID_CELLS;
    let u = u.clamp(0.0, 1.0);
    let x = u * n as f64;
    let i = (x as usize).min(n - 1);
    let a = i as f64 / n as f64;
    if u <= a {
        return t.cum[i];
    }
    let m = 0.5 * (a + u);
    let g = |s: f64| s * rwp_shape_cached(s);
    t.cum[i] + (u - a) / 6.0 * (g(a) + 4.0 * g(m) + g(u))
}

/// Normalising constant `int_0^1 u h(u) du` (= 64/45).
pub fn rwp_total_weight() -> f64 {
    rwp_weight_integral(1.0)
}

/// Exact random-waypoint stationary density over normalized distance `u in [0, 1]`.
pub fn rwp_exact_pdf(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    u * rwp_shape(u) / rwp_total_weight()
}

/// Exact random-waypoint law (unit disk) conditioned on `u >= u1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpMinorGivenNearest {
    u1: f64,
    base: f64,
    norm: f64,
}

/// `f(u | u1) = u h(u) / int_{u1}^1 t h(t) dt` on `[u1, 1]`.
pub fn rwp_minor_given_nearest(u1: f64) -> Result<RwpMinorGivenNearest> {
    if !(0.0..1.0).contains(&u1) {
        return Err(Error::domain("u1", format!("must lie in [0, 1), got {u1}")));
    }
    let base = rwp_weight_integral(u1);
    let norm = rwp_total_weight() - base;
    Ok(RwpMinorGivenNearest { u1, base, norm })
}

impl RwpMinorGivenNearest {
    pub fn nearest(&self) -> f64 {
        self.u1
    }
    /// `int_{u1}^1 t h(t) dt`.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }
}

impl DistanceLaw for RwpMinorGivenNearest {
    fn support(&self) -> (f64, f64) {
        (self.u1, 1.0)
    }
    fn pdf(&self, u: f64) -> f64 {
        if u < self.u1 || u > 1.0 {
            0.0
        } else {
            u * rwp_shape_cached(u) / self.norm
        }
    }
    fn cdf(&self, u: f64) -> f64 {
        if u <= self.u1 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            ((rwp_weight_integral(u) - self.base) / self.norm).clamp(0.0, 1.0)
        }
    }
}
