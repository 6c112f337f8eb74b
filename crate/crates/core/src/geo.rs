//! Trajectory model and the geodesic helpers everything else is built on.
//!
//! Positions are kept in decimal degrees. The watermark works directly on raw
//! coordinates, so nothing here projects or rescales them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius used by every distance computation.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Default modification threshold, in meters.
pub const DEFAULT_SIGMA_M: f64 = 10.0;

/// A timestamped GPS fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsPoint {
    pub lat: f64,
    pub lon: f64,
    /// Seconds since the epoch.
    pub t: i64,
}

impl GpsPoint {
    pub fn new(lat: f64, lon: f64, t: i64) -> Result<Self> {
        let p = GpsPoint { lat, lon, t };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(Error::Range { lat, lon })
        }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

/// A sequence of GPS fixes with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: String,
    points: Vec<GpsPoint>,
}

impl Trajectory {
    /// Builds a trajectory, checking coordinate ranges, ordering and a minimum size of two.
    pub fn new(id: impl Into<String>, points: Vec<GpsPoint>) -> Result<Self> {
        let id = id.into();
        if points.len() < 2 {
            return Err(Error::domain(format!(
                "trajectory {id:?} has {} point(s), need at least 2",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_valid()) {
            return Err(Error::Range {
                lat: p.lat,
                lon: p.lon,
            });
        }
        if let Some(w) = points.windows(2).find(|w| w[0].t >= w[1].t) {
            return Err(Error::domain(format!(
                "trajectory {id:?}: timestamps not strictly increasing ({} then {})",
                w[0].t, w[1].t
            )));
        }
        Ok(Trajectory { id, points })
    }

    /// Same id, new points.
    pub fn with_points(&self, points: Vec<GpsPoint>) -> Result<Self> {
        Trajectory::new(self.id.clone(), points)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[GpsPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn timestamps(&self) -> Vec<i64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn into_points(self) -> Vec<GpsPoint> {
        self.points
    }
}

/// Coordinates as complex numbers: real part latitude, imaginary part longitude.
pub type ComplexSeq = Vec<Complex64>;

/// Great-circle distance in meters.
pub fn haversine(p: &GpsPoint, q: &GpsPoint) -> f64 {
    let (phi1, phi2) = (p.lat.to_radians(), q.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (q.lon - p.lon).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.clamp(0.0, 1.0).sqrt().asin()
}

/// Distance between two point sequences.
///
/// Equal lengths use the mean haversine distance over aligned indices. Unequal
/// lengths use the symmetric mean nearest-neighbor distance: the larger of the
/// A-to-B and B-to-A mean nearest distances.
pub fn path_distance(a: &[GpsPoint], b: &[GpsPoint]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("distance of an empty trajectory"));
    }
    Ok(path_distance_bounded(a, b, f64::INFINITY).expect("unbounded distance is always computed"))
}

/// Like [`path_distance`] but gives up with `None` as soon as the result is
/// certain to exceed `bound`. Inputs must be non-empty.
pub(crate) fn path_distance_bounded(a: &[GpsPoint], b: &[GpsPoint], bound: f64) -> Option<f64> {
    if a.len() == b.len() {
        let budget = bound * a.len() as f64;
        let mut sum = 0.0;
        for (p, q) in a.iter().zip(b) {
            sum += haversine(p, q);
            if sum > budget {
                return None;
            }
        }
        return Some(sum / a.len() as f64);
    }
    let ab = mean_nearest_bounded(a, b, bound)?;
    let ba = mean_nearest_bounded(b, a, bound)?;
    Some(ab.max(ba))
}

fn mean_nearest_bounded(from: &[GpsPoint], to: &[GpsPoint], bound: f64) -> Option<f64> {
    let budget = bound * from.len() as f64;
    let mut sum = 0.0;
    for p in from {
        sum += to
            .iter()
            .map(|q| haversine(p, q))
            .fold(f64::INFINITY, f64::min);
        if sum > budget {
            return None;
        }
    }
    Some(sum / from.len() as f64)
}

/// Trajectory-level distance used for the modification threshold and for
/// candidate selection. Symmetric, and zero for identical trajectories.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    path_distance_bounded(a.points(), b.points(), f64::INFINITY)
        .expect("unbounded distance is always computed")
}

/// True when `b` stays within `sigma_m` meters of `a`.
pub fn is_sigma_modification(a: &Trajectory, b: &Trajectory, sigma_m: f64) -> Result<bool> {
    if sigma_m.is_nan() || sigma_m < 0.0 {
        return Err(Error::domain(format!(
            "modification threshold must be non-negative, got {sigma_m}"
        )));
    }
    Ok(trajectory_distance(a, b) <= sigma_m)
}

pub fn to_complex(points: &[GpsPoint]) -> ComplexSeq {
    points.iter().map(|p| Complex64::new(p.lat, p.lon)).collect()
}

/// Inverse of [`to_complex`]; fails if lengths differ or a value leaves the valid coordinate range.
pub fn from_complex(values: &[Complex64], timestamps: &[i64]) -> Result<Vec<GpsPoint>> {
    if values.len() != timestamps.len() {
        return Err(Error::domain(format!(
            "{} complex values but {} timestamps",
            values.len(),
            timestamps.len()
        )));
    }
    values
        .iter()
        .zip(timestamps)
        .map(|(c, &t)| GpsPoint::new(c.re, c.im, t))
        .collect()
}

/// Full-size blocks of a trajectory plus the leftover tail.
#[derive(Debug, Clone, Copy)]
pub struct Segments<'a> {
    pub blocks: &'a [GpsPoint],
    pub block_size: usize,
    pub tail: &'a [GpsPoint],
}

impl<'a> Segments<'a> {
    pub fn block_count(&self) -> usize {
        self.blocks.len() / self.block_size
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'a, GpsPoint> {
        self.blocks.chunks_exact(self.block_size)
    }
}

/// Splits `points` into `len / block_size` contiguous blocks; the remainder becomes the tail.
pub fn segment(points: &[GpsPoint], block_size: usize) -> Result<Segments<'_>> {
    if block_size < 2 {
        return Err(Error::domain(format!(
            "block size must be at least 2, got {block_size}"
        )));
    }
    if points.len() < block_size {
        return Err(Error::domain(format!(
            "trajectory of size {} is shorter than one block of {block_size}",
            points.len()
        )));
    }
    let full = points.len() - points.len() % block_size;
    let (blocks, tail) = points.split_at(full);
    Ok(Segments {
        blocks,
        block_size,
        tail,
    })
}
