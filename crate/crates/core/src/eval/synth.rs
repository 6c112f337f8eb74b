//! Synthetic vehicle trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GpsPoint, Trajectory, EARTH_RADIUS_M};

/// Shape of the generated random walks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Start positions are drawn uniformly from `[lat_min, lat_max] x [lon_min, lon_max]`.
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub tick_s: i64,
    /// Bounds on the distance travelled per tick, meters.
    pub step_min_m: f64,
    pub step_max_m: f64,
    /// Per-tick heading change standard deviation, radians.
    pub turn_std_rad: f64,
    /// Per-tick speed change standard deviation, meters per tick.
    pub step_jitter_m: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            lat_min: 51.0,
            lat_max: 53.5,
            lon_min: 8.0,
            lon_max: 14.5,
            tick_s: 5,
            step_min_m: 5.0,
            step_max_m: 30.0,
            turn_std_rad: 0.15,
            step_jitter_m: 2.0,
        }
    }
}

/// `count` heading-persistent random walks of `size` points each, with the default shape.
pub fn synth_trajectories(count: usize, size: usize, seed: u64) -> Result<Vec<Trajectory>> {
    synth_with(&SynthConfig::default(), count, size, seed)
}

pub fn synth_with(
    cfg: &SynthConfig,
    count: usize,
    size: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if size < 16 {
        return Err(Error::domain(format!(
            "synthetic trajectories need at least 16 points, got {size}"
        )));
    }
    if !(cfg.step_min_m > 0.0 && cfg.step_min_m <= cfg.step_max_m) || cfg.tick_s <= 0 {
        return Err(Error::domain("invalid synthetic step or tick configuration"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let turn = Normal::new(0.0, cfg.turn_std_rad).map_err(|e| Error::domain(e.to_string()))?;
    let jitter = Normal::new(0.0, cfg.step_jitter_m).map_err(|e| Error::domain(e.to_string()))?;

    (0..count)
        .map(|i| {
            let mut lat = rng.random_range(cfg.lat_min..=cfg.lat_max);
            let mut lon = rng.random_range(cfg.lon_min..=cfg.lon_max);
            let mut heading = rng.random_range(0.0..std::f64::consts::TAU);
            let mut step = rng.random_range(cfg.step_min_m..=cfg.step_max_m);
            let t0: i64 = rng.random_range(1_560_000_000..1_570_000_000);
            let mut points = Vec::with_capacity(size);
            for j in 0..size {
                points.push(GpsPoint::new(lat, lon, t0 + j as i64 * cfg.tick_s)?);
                heading += turn.sample(&mut rng);
                step = (step + jitter.sample(&mut rng)).clamp(cfg.step_min_m, cfg.step_max_m);
                lat += (step * heading.cos() / EARTH_RADIUS_M).to_degrees();
                lon += (step * heading.sin() / (EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees();
            }
            Trajectory::new(format!("syn{i:05}"), points)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::haversine;

    #[test]
    fn shape_and_step_bounds() {
        let cfg = SynthConfig::default();
        let ts = synth_trajectories(20, 256, 1).unwrap();
        assert_eq!(ts.len(), 20);
        for t in &ts {
            assert_eq!(t.len(), 256);
            for w in t.points().windows(2) {
                let d = haversine(&w[0], &w[1]);
                assert!(d >= cfg.step_min_m * 0.99 && d <= cfg.step_max_m * 1.01, "{d}");
                assert_eq!(w[1].t - w[0].t, cfg.tick_s);
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(synth_trajectories(5, 32, 9).unwrap(), synth_trajectories(5, 32, 9).unwrap());
        assert_ne!(synth_trajectories(5, 32, 9).unwrap(), synth_trajectories(5, 32, 10).unwrap());
    }

    #[test]
    fn rejects_tiny_size() {
        assert!(synth_trajectories(1, 8, 0).is_err());
    }
}
