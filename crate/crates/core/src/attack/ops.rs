//! The individual trajectory attacks. Every function is deterministic in its seed
//! and returns its input unchanged at the identity parameter.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geo::{GpsPoint, Trajectory};
use crate::watermark::{embed, generate_watermark, WatermarkParams};

use super::rdp::rdp;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("probability must lie in [0, 1], got {p}")))
    }
}

fn check_snr(snr_db: f64) -> Result<()> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        Err(Error::domain(format!("invalid SNR {snr_db} dB")))
    } else {
        Ok(())
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn shift(p: &GpsPoint, d: Complex64) -> GpsPoint {
    GpsPoint {
        lat: p.lat + d.re,
        lon: p.lon + d.im,
        t: p.t,
    }
}

/// Convex combination `lambda * a + (1 - lambda) * b` with `lambda` taken from
/// where `t` falls between the two anchors' timestamps.
fn interpolate_at(a: &GpsPoint, b: &GpsPoint, t: i64) -> GpsPoint {
    let lambda = (b.t - t) as f64 / (b.t - a.t) as f64;
    GpsPoint {
        lat: lambda * a.lat + (1.0 - lambda) * b.lat,
        lon: lambda * a.lon + (1.0 - lambda) * b.lon,
        t,
    }
}

/// Additive Gaussian white noise with standard deviation `std_deg` on both coordinates.
pub fn agwn(t: &Trajectory, std_deg: f64, seed: u64) -> Result<Trajectory> {
    if !(std_deg >= 0.0 && std_deg.is_finite()) {
        return Err(Error::domain(format!("noise std must be finite and >= 0, got {std_deg}")));
    }
    if std_deg == 0.0 {
        return Ok(t.clone());
    }
    let mut rng = rng(seed);
    let pts = t
        .points()
        .iter()
        .map(|p| shift(p, complex_normal(&mut rng) * std_deg))
        .collect();
    t.with_points(pts)
}

/// Mean squared magnitude of the mean-centred complex coordinates.
pub fn centered_power(points: &[GpsPoint]) -> f64 {
    let n = points.len() as f64;
    let mean = points
        .iter()
        .map(|p| Complex64::new(p.lat, p.lon))
        .sum::<Complex64>()
        / n;
    points
        .iter()
        .map(|p| (Complex64::new(p.lat, p.lon) - mean).norm_sqr())
        .sum::<f64>()
        / n
}

/// Complex Gaussian noise for every point, rescaled so its empirical power is
/// exactly the centred signal power divided by `10^(snr_db/10)`.
fn snr_noise(t: &Trajectory, snr_db: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    let signal = centered_power(t.points());
    if signal == 0.0 {
        return Err(Error::domain(format!(
            "trajectory {:?} is constant; SNR is undefined",
            t.id()
        )));
    }
    let target = signal / 10f64.powf(snr_db / 10.0);
    let raw: Vec<Complex64> = (0..t.len()).map(|_| complex_normal(rng)).collect();
    let raw_power = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() / raw.len() as f64;
    let scale = (target / raw_power).sqrt();
    Ok(raw.into_iter().map(|z| z * scale).collect())
}

/// Gaussian noise scaled to the requested signal-to-noise ratio, added to every point.
pub fn asnr(t: &Trajectory, snr_db: f64, seed: u64) -> Result<Trajectory> {
    aosnr(t, 1.0, snr_db, seed)
}

/// SNR-scaled noise added only to points selected with probability `p`.
///
/// The noise vector is drawn exactly as in [`asnr`], so `p = 1` reproduces it.
pub fn aosnr(t: &Trajectory, p: f64, snr_db: f64, seed: u64) -> Result<Trajectory> {
    check_probability(p)?;
    check_snr(snr_db)?;
    if p == 0.0 || snr_db == f64::INFINITY {
        return Ok(t.clone());
    }
    let mut rng = rng(seed);
    let noise = snr_noise(t, snr_db, &mut rng)?;
    let pts = t
        .points()
        .iter()
        .zip(noise)
        .map(|(pt, z)| if rng.random_bool(p) { shift(pt, z) } else { *pt })
        .collect();
    t.with_points(pts)
}

/// Double embedding: watermarks the already watermarked trajectory again with
/// a fresh random watermark drawn from `seed`.
pub fn dea(t: &Trajectory, params: &WatermarkParams, seed: u64) -> Result<Trajectory> {
    let spec = generate_watermark(t.len() / params.block_size, params, seed)?;
    embed(t, &spec)
}

/// Replaces points selected with probability `p` by their predecessor's
/// pre-attack coordinates. The first point is never selected.
pub fn rrp(t: &Trajectory, p: f64, seed: u64) -> Result<Trajectory> {
    check_probability(p)?;
    let mut rng = rng(seed);
    let src = t.points();
    let mut pts = src.to_vec();
    for j in 1..src.len() {
        if rng.random_bool(p) {
            pts[j].lat = src[j - 1].lat;
            pts[j].lon = src[j - 1].lon;
        }
    }
    t.with_points(pts)
}

/// Replaces points whose `selected` flag is set by the time-proportional
/// convex combination of the nearest unselected point on each side.
/// Endpoints must not be selected.
fn replace_on_path(t: &Trajectory, selected: &[bool]) -> Result<Trajectory> {
    let src = t.points();
    debug_assert!(!selected[0] && !selected[src.len() - 1]);
    let mut pts = src.to_vec();
    let mut prev = 0;
    let mut j = 1;
    while j < src.len() {
        if !selected[j] {
            prev = j;
            j += 1;
            continue;
        }
        let next = (j..src.len()).find(|&k| !selected[k]).expect("last point is unselected");
        for k in j..next {
            pts[k] = interpolate_at(&src[prev], &src[next], src[k].t);
        }
        j = next;
    }
    t.with_points(pts)
}

/// Replaces interior points selected with probability `p` by a convex
/// combination of their nearest unselected neighbours.
pub fn rrpp(t: &Trajectory, p: f64, seed: u64) -> Result<Trajectory> {
    check_probability(p)?;
    let mut rng = rng(seed);
    let n = t.len();
    let selected: Vec<bool> = (0..n)
        .map(|j| {
            let draw = rng.random_bool(p);
            j != 0 && j != n - 1 && draw
        })
        .collect();
    replace_on_path(t, &selected)
}

/// Moves every point that RDP would drop onto the chord between its enclosing skeleton points.
pub fn rnspp(t: &Trajectory, epsilon_m: f64) -> Result<Trajectory> {
    if epsilon_m.is_nan() || epsilon_m < 0.0 {
        return Err(Error::domain(format!("RDP tolerance must be >= 0, got {epsilon_m}")));
    }
    if epsilon_m == 0.0 {
        return Ok(t.clone());
    }
    let mut selected = vec![true; t.len()];
    for k in rdp(t.points(), epsilon_m) {
        selected[k] = false;
    }
    replace_on_path(t, &selected)
}

/// Inserts, with probability `p` per gap, the midpoint of two consecutive
/// points. Gaps of one second or less are left alone.
pub fn lia(t: &Trajectory, p: f64, seed: u64) -> Result<Trajectory> {
    check_probability(p)?;
    let mut rng = rng(seed);
    let src = t.points();
    let mut pts = Vec::with_capacity(src.len() * 2);
    for w in src.windows(2) {
        pts.push(w[0]);
        let draw = rng.random_bool(p);
        if draw && w[1].t - w[0].t >= 2 {
            pts.push(GpsPoint {
                lat: (w[0].lat + w[1].lat) / 2.0,
                lon: (w[0].lon + w[1].lon) / 2.0,
                t: w[0].t + (w[1].t - w[0].t) / 2,
            });
        }
    }
    pts.push(src[src.len() - 1]);
    t.with_points(pts)
}

/// Drops interior points with probability `p`; both endpoints survive.
pub fn crop(t: &Trajectory, p: f64, seed: u64) -> Result<Trajectory> {
    check_probability(p)?;
    let mut rng = rng(seed);
    let n = t.len();
    let pts = t
        .points()
        .iter()
        .enumerate()
        .filter(|&(j, _)| {
            let draw = rng.random_bool(p);
            j == 0 || j == n - 1 || !draw
        })
        .map(|(_, p)| *p)
        .collect();
    t.with_points(pts)
}

/// Cropping, then Gaussian noise, then random point replacement, each with its own sub-seed.
pub fn hybrid(
    t: &Trajectory,
    crop_p: f64,
    std_deg: f64,
    rrp_p: f64,
    seed: u64,
) -> Result<Trajectory> {
    let mut seeds = rng(seed);
    let (s1, s2, s3) = (seeds.next_u64(), seeds.next_u64(), seeds.next_u64());
    let cropped = crop(t, crop_p, s1)?;
    let noisy = agwn(&cropped, std_deg, s2)?;
    rrp(&noisy, rrp_p, s3)
}
