//! Trajectory generators for infected individuals moving inside the cell.
//!
//! All models keep positions in the closed disk of radius `D`:
//!
//! - random direction: uniform heading, leg length uniform on `(0, step_max]`,
//!   optional pause between legs; legs that hit the boundary reflect specularly
//! - random walk: uniform heading, leg length exactly `W`; a heading that
//!   would leave the disk is redrawn up to 64 times, then the leg reflects
//! - random waypoint: waypoint uniform in the disk, speed uniform per leg,
//!   pause uniform on arrival; legs are chords so they never leave
//!
//! [`TrajectoryState::advance`] is event-driven: one call may span several
//! legs and pauses, so large time steps are exact.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::MobilityParams;

/// Planar position relative to the cell centre.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    /// Distance to the cell centre.
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Point uniform in the disk of radius `radius`.
pub fn sample_uniform_disk(rng: &mut dyn RngCore, radius: f64) -> Position {
    let r = radius * rng.gen::<f64>().sqrt();
    let a = rng.gen::<f64>() * TAU;
    Position::new(r * a.cos(), r * a.sin())
}

/// Redraw budget for random-walk headings that would leave the disk.
pub const HEADING_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Moving,
    Paused,
}

/// Kinematic state of one individual.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub position: Position,
    /// Radians in `[0, 2 pi)`.
    pub heading: f64,
    pub remaining_leg: f64,
    pub phase: Phase,
    pub pause_left: f64,
    /// Speed on the current leg.
    pub speed: f64,
    pub model: MobilityParams,
    pub radius: f64,
}

fn uniform(rng: &mut dyn RngCore, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + (hi - lo) * rng.gen::<f64>()
    } else {
        lo
    }
}

impl TrajectoryState {
    /// Starts at `position` and draws the first leg.
    pub fn at(model: MobilityParams, radius: f64, position: Position, rng: &mut dyn RngCore) -> Self {
        let mut s = TrajectoryState {
            position,
            heading: 0.0,
            remaining_leg: 0.0,
            phase: Phase::Moving,
            pause_left: 0.0,
            speed: 0.0,
            model,
            radius,
        };
        s.new_leg(rng);
        s
    }

    /// Starts uniformly in the disk and draws the first leg.
    pub fn new(model: MobilityParams, radius: f64, rng: &mut dyn RngCore) -> Self {
        let p = sample_uniform_disk(rng, radius);
        Self::at(model, radius, p, rng)
    }

    fn direction(&self) -> (f64, f64) {
        (self.heading.cos(), self.heading.sin())
    }

    fn set_direction(&mut self, dx: f64, dy: f64) {
        self.heading = dy.atan2(dx).rem_euclid(TAU);
        if self.heading >= TAU {
            self.heading = 0.0;
        }
    }

    fn new_leg(&mut self, rng: &mut dyn RngCore) {
        self.phase = Phase::Moving;
        self.pause_left = 0.0;
        match self.model {
            MobilityParams::Static => {
                self.remaining_leg = 0.0;
                self.speed = 0.0;
            }
            MobilityParams::RandomDirection { speed, step_max, .. } => {
                self.heading = rng.gen::<f64>() * TAU;
                self.remaining_leg = step_max * (1.0 - rng.gen::<f64>());
                self.speed = speed;
            }
            MobilityParams::RandomWalk { step, speed } => {
                let d2 = self.radius * self.radius;
                for _ in 0..HEADING_REDRAWS {
                    self.heading = rng.gen::<f64>() * TAU;
                    let (dx, dy) = self.direction();
                    let (ex, ey) = (self.position.x + step * dx, self.position.y + step * dy);
                    if ex * ex + ey * ey <= d2 {
                        break;
                    }
                }
                self.remaining_leg = step;
                self.speed = speed;
            }
            MobilityParams::RandomWaypoint { speed_min, speed_max, .. } => {
                let w = sample_uniform_disk(rng, self.radius);
                let (dx, dy) = (w.x - self.position.x, w.y - self.position.y);
                self.remaining_leg = dx.hypot(dy);
                if self.remaining_leg > 0.0 {
                    self.set_direction(dx, dy);
                }
                self.speed = uniform(rng, speed_min, speed_max);
            }
        }
    }

    fn end_leg(&mut self, rng: &mut dyn RngCore) {
        let pause = match self.model {
            MobilityParams::RandomDirection { pause_min, pause_max, .. }
            | MobilityParams::RandomWaypoint { pause_min, pause_max, .. } => uniform(rng, pause_min, pause_max),
            _ => 0.0,
        };
        if pause > 0.0 {
            self.phase = Phase::Paused;
            self.pause_left = pause;
            self.remaining_leg = 0.0;
        } else {
            self.new_leg(rng);
        }
    }

    /// Moves `dist` along the heading, reflecting specularly off the boundary.
    fn travel(&mut self, mut dist: f64) {
        let d = self.radius;
        for _ in 0..1000 {
            let (dx, dy) = self.direction();
            let (ex, ey) = (self.position.x + dist * dx, self.position.y + dist * dy);
            if ex.hypot(ey) <= d {
                self.position = Position::new(ex, ey);
                return;
            }
            // first boundary crossing along the ray
            let b = self.position.x * dx + self.position.y * dy;
            let c = self.position.x * self.position.x + self.position.y * self.position.y - d * d;
            let s = (-b + (b * b - c.min(0.0)).max(0.0).sqrt()).clamp(0.0, dist);
            let (hx, hy) = (self.position.x + s * dx, self.position.y + s * dy);
            let (nx, ny) = (hx / hx.hypot(hy), hy / hx.hypot(hy));
            self.position = Position::new(d * nx, d * ny);
            let dot = dx * nx + dy * ny;
            self.set_direction(dx - 2.0 * dot * nx, dy - 2.0 * dot * ny);
            dist -= s;
            if dist <= 0.0 {
                return;
            }
        }
        self.contain();
    }

    fn contain(&mut self) {
        let r = self.position.norm();
        if r > self.radius {
            self.position.x *= self.radius / r;
            self.position.y *= self.radius / r;
        }
    }

    /// Advances the state by `dt` seconds.
    pub fn advance(&mut self, dt: f64, rng: &mut dyn RngCore) {
        if matches!(self.model, MobilityParams::Static) {
            return;
        }
        let mut t = dt;
        let mut guard = 0usize;
        while t > 0.0 && guard < 1_000_000 {
            guard += 1;
            match self.phase {
                Phase::Paused => {
                    if self.pause_left > t {
                        self.pause_left -= t;
                        return;
                    }
                    t -= self.pause_left;
                    self.new_leg(rng);
                }
                Phase::Moving => {
                    let reach = self.speed * t;
                    if reach < self.remaining_leg {
                        self.travel(reach);
                        self.remaining_leg -= reach;
                        t = 0.0;
                    } else {
                        let leg = self.remaining_leg;
                        self.travel(leg);
                        t -= leg / self.speed;
                        self.remaining_leg = 0.0;
                        self.end_leg(rng);
                    }
                }
            }
        }
        self.contain();
    }
}

/// Functional form of [`TrajectoryState::advance`].
pub fn step(state: &TrajectoryState, dt: f64, rng: &mut dyn RngCore) -> TrajectoryState {
    let mut s = state.clone();
    s.advance(dt, rng);
    s
}

/// RNG stream for individual `index` under master seed `seed`.
pub fn individual_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulates `n_individuals` independent trajectories starting uniformly in
/// the disk. Runs `burn_in` steps of `dt` first, then returns the positions
/// at `t = 0, dt, ..., floor(duration / dt) dt` (outer index = step).
pub fn simulate_positions(
    model: &MobilityParams,
    radius: f64,
    n_individuals: usize,
    duration: f64,
    dt: f64,
    burn_in: u64,
    seed: u64,
) -> Result<Vec<Vec<Position>>> {
    if !(radius > 0.0) || !(dt > 0.0) || !(duration >= 0.0) {
        return Err(Error::domain("simulate_positions", "need radius > 0, dt > 0 and duration >= 0"));
    }
    let steps = (duration / dt + 1e-9).floor() as usize;
    let mut frames = vec![Vec::with_capacity(n_individuals); steps + 1];
    for i in 0..n_individuals {
        let mut rng = individual_rng(seed, i as u64);
        let mut s = TrajectoryState::new(*model, radius, &mut rng);
        for _ in 0..burn_in {
            s.advance(dt, &mut rng);
        }
        frames[0].push(s.position);
        for frame in frames.iter_mut().skip(1) {
            s.advance(dt, &mut rng);
            frame.push(s.position);
        }
    }
    Ok(frames)
}

/// One row of a trail dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailPoint {
    pub individual: usize,
    pub step: usize,
    pub t: f64,
    pub position: Position,
}

/// Flattens [`simulate_positions`] into individual-major rows.
pub fn trails(
    model: &MobilityParams,
    radius: f64,
    n_individuals: usize,
    duration: f64,
    dt: f64,
    burn_in: u64,
    seed: u64,
) -> Result<Vec<TrailPoint>> {
    let frames = simulate_positions(model, radius, n_individuals, duration, dt, burn_in, seed)?;
    let mut out = Vec::with_capacity(frames.len() * n_individuals);
    for i in 0..n_individuals {
        for (k, frame) in frames.iter().enumerate() {
            out.push(TrailPoint { individual: i, step: k, t: k as f64 * dt, position: frame[i] });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(99)
    }

    #[test]
    fn disk_samples_stay_inside_and_center() {
        let mut r = rng();
        let n = 200_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..n {
            let p = sample_uniform_disk(&mut r, 3.0);
            assert!(p.norm() <= 3.0);
            sx += p.x;
            sy += p.y;
        }
        let tol = 3.0 * 3.0 / (2.0 * n as f64).sqrt();
        assert!((sx / n as f64).abs() < tol && (sy / n as f64).abs() < tol);
    }

    #[test]
    fn mid_leg_step_moves_exactly() {
        let mut r = rng();
        let model = MobilityParams::RandomWalk { step: 20.0, speed: 3.0 };
        let mut s = TrajectoryState::at(model, 100.0, Position::new(0.0, 0.0), &mut r);
        let (h, p) = (s.heading, s.position);
        s.advance(0.5, &mut r);
        assert!((s.position.x - (p.x + 1.5 * h.cos())).abs() < 1e-12);
        assert!((s.position.y - (p.y + 1.5 * h.sin())).abs() < 1e-12);
        assert!((s.remaining_leg - 18.5).abs() < 1e-12);
    }

    #[test]
    fn paused_state_only_counts_down() {
        let mut r = rng();
        let model = MobilityParams::RandomWaypoint { speed_min: 1.0, speed_max: 5.0, pause_min: 0.0, pause_max: 1.0 };
        let mut s = TrajectoryState::new(model, 100.0, &mut r);
        s.phase = Phase::Paused;
        s.pause_left = 2.0;
        let p = s.position;
        s.advance(0.5, &mut r);
        assert_eq!(s.position, p);
        assert!((s.pause_left - 1.5).abs() < 1e-15);
    }

    #[test]
    fn reflection_keeps_leg_length() {
        let mut r = rng();
        let model = MobilityParams::RandomDirection { speed: 1.0, step_max: 100.0, pause_min: 0.0, pause_max: 0.0 };
        let mut s = TrajectoryState::at(model, 10.0, Position::new(9.0, 0.0), &mut r);
        s.heading = 0.0;
        s.remaining_leg = 50.0;
        s.advance(3.0, &mut r);
        // 1 m to the wall, 2 m back along the diameter
        assert!((s.position.x - 8.0).abs() < 1e-9 && s.position.y.abs() < 1e-9);
        assert!((s.heading - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_yields_initial_positions() {
        let m = MobilityParams::RandomWalk { step: 20.0, speed: 3.0 };
        let f = simulate_positions(&m, 100.0, 1, 0.0, 0.1, 0, 1).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].len(), 1);
    }

    #[test]
    fn trails_are_deterministic() {
        let m = MobilityParams::RandomWaypoint { speed_min: 1.0, speed_max: 5.0, pause_min: 0.0, pause_max: 1.0 };
        let a = trails(&m, 100.0, 3, 10.0, 0.1, 5, 42).unwrap();
        let b = trails(&m, 100.0, 3, 10.0, 0.1, 5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3 * 101);
    }
}
