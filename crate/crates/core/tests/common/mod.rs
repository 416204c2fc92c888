//! Independent samplers used as oracles. They rebuild each law from its
//! geometric definition and share no code with the library's laws.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point uniform in the disk by rejection from the bounding square.
pub fn disk_point(rng: &mut ChaCha8Rng, d: f64) -> (f64, f64) {
    loop {
        let (x, y): (f64, f64) = (rng.gen_range(-d..d), rng.gen_range(-d..d));
        if x * x + y * y <= d * d {
            return (x, y);
        }
    }
}

/// One random-walk leg: uniform start, endpoint uniform in the step disk
/// around it, kept only if it stays inside the cell.
pub fn walk_endpoint(rng: &mut ChaCha8Rng, d: f64, w: f64) -> f64 {
    loop {
        let (x, y) = disk_point(rng, d);
        let (dx, dy) = disk_point(rng, w);
        let r = (x + dx).hypot(y + dy);
        if r <= d {
            return r;
        }
    }
}

/// Stationary random-waypoint position in the unit disk: a leg chosen with
/// probability proportional to its length, then a uniform point on it.
pub fn waypoint_stationary(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let (ax, ay) = disk_point(rng, 1.0);
        let (bx, by) = disk_point(rng, 1.0);
        let len = (bx - ax).hypot(by - ay);
        if rng.gen::<f64>() * 2.0 < len {
            let t: f64 = rng.gen();
            return (ax + t * (bx - ax)).hypot(ay + t * (by - ay));
        }
    }
}

pub fn volume(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}
