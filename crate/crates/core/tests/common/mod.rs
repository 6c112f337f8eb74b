#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmark::{GpsPoint, Trajectory};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A wiggly path near Porto with 5 s sampling.
pub fn wiggle(id: &str, n: usize, seed: u64) -> Trajectory {
    let mut r = rng(seed);
    let (lat0, lon0) = (41.15 + r.random_range(-0.05..0.05), -8.61 + r.random_range(-0.05..0.05));
    let (a, b) = (r.random_range(0.1..0.5), r.random_range(0.1..0.5));
    let pts = (0..n)
        .map(|i| {
            let f = i as f64;
            GpsPoint::new(
                lat0 + f * 1.2e-4 + (f * a).sin() * 3e-4,
                lon0 + f * 0.8e-4 + (f * b).cos() * 4e-4,
                1_400_000_000 + i as i64 * 5,
            )
            .unwrap()
        })
        .collect();
    Trajectory::new(id, pts).unwrap()
}

pub fn max_displacement_deg(a: &Trajectory, b: &Trajectory) -> f64 {
    a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| (p.lat - q.lat).hypot(p.lon - q.lon))
        .fold(0.0, f64::max)
}

/// Three-sigma binomial band around `n * p`.
pub fn binomial_band(n: usize, p: f64) -> (f64, f64) {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (mean - 3.0 * sd, mean + 3.0 * sd)
}
