use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine, path_distance_bounded, segment, to_complex, GpsPoint, Trajectory};
use crate::spectral::fft_forward;

use super::WatermarkSpec;

/// Default acceptance threshold on the mean block correlation.
pub const DEFAULT_TAU: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub candidate_id: String,
    pub aligned_size: usize,
    pub per_block_ncc: Vec<f64>,
    pub mean_ncc: f64,
    pub tau: f64,
    pub accepted: bool,
}

/// Picks the stored original closest to `suspect` under
/// [`trajectory_distance`](crate::geo::trajectory_distance). Ties go to the
/// lexicographically smallest id.
pub fn select_candidate<'a, I>(suspect: &Trajectory, store: I) -> Result<&'a Trajectory>
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let first = suspect.points()[0];
    let mut candidates: Vec<(f64, &Trajectory)> = store
        .into_iter()
        .map(|t| (haversine(&first, &t.points()[0]), t))
        .collect();
    if candidates.is_empty() {
        return Err(Error::domain("candidate selection over an empty store"));
    }
    // Visiting likely matches first lets the bounded distance prune the rest early.
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<(f64, &Trajectory)> = None;
    for (_, cand) in candidates {
        let bound = best.map_or(f64::INFINITY, |b| b.0);
        let Some(d) = path_distance_bounded(suspect.points(), cand.points(), bound) else {
            continue;
        };
        best = match best {
            Some((bd, bt)) if d > bd || (d == bd && bt.id() <= cand.id()) => Some((bd, bt)),
            _ => Some((d, cand)),
        };
    }
    Ok(best.expect("store is non-empty").1)
}

/// Resizes `suspect` to the size of `original`.
///
/// A larger suspect is thinned by an order-preserving greedy match: each
/// original point takes the nearest suspect point after the previous match
/// that still leaves enough points for the remaining originals. A smaller
/// suspect is padded by giving each original point its nearest suspect point,
/// duplicates allowed; that output carries the original's timestamps.
pub fn align_size(suspect: &Trajectory, original: &Trajectory) -> Result<Trajectory> {
    let (s, o) = (suspect.points(), original.points());
    if s.len() == o.len() {
        return Ok(suspect.clone());
    }
    let points: Vec<GpsPoint> = if s.len() > o.len() {
        let mut next = 0usize;
        let mut out = Vec::with_capacity(o.len());
        for (i, op) in o.iter().enumerate() {
            let last_allowed = s.len() - (o.len() - i);
            let k = (next..=last_allowed)
                .min_by(|&a, &b| haversine(op, &s[a]).total_cmp(&haversine(op, &s[b])))
                .expect("window is never empty");
            out.push(s[k]);
            next = k + 1;
        }
        out
    } else {
        o.iter()
            .map(|op| {
                let nearest = s
                    .iter()
                    .min_by(|a, b| haversine(op, a).total_cmp(&haversine(op, b)))
                    .expect("suspect is non-empty");
                GpsPoint { t: op.t, ..*nearest }
            })
            .collect()
    };
    suspect.with_points(points)
}

/// Recovers one real-valued watermark estimate per block as
/// `(suspect amplitude - original amplitude) / strength`.
pub fn extract(
    aligned: &Trajectory,
    original: &Trajectory,
    spec: &WatermarkSpec,
) -> Result<Vec<Vec<f64>>> {
    if aligned.len() != original.len() {
        return Err(Error::domain(format!(
            "cannot extract: aligned size {} differs from original size {}",
            aligned.len(),
            original.len()
        )));
    }
    if spec.strength.is_nan() || spec.strength <= 0.0 {
        return Err(Error::domain("cannot extract with zero watermark strength"));
    }
    let suspect_blocks = segment(aligned.points(), spec.block_size)?;
    let original_blocks = segment(original.points(), spec.block_size)?;
    suspect_blocks
        .iter()
        .zip(original_blocks.iter())
        .map(|(sb, ob)| {
            let suspect_amp = fft_forward(&to_complex(sb))?.amplitude;
            let original_amp = fft_forward(&to_complex(ob))?.amplitude;
            Ok(suspect_amp
                .iter()
                .zip(&original_amp)
                .map(|(a_hat, a)| (a_hat - a) / spec.strength)
                .collect())
        })
        .collect()
}

/// Normalized cross-correlation (cosine similarity). A zero vector correlates 0 with anything.
pub fn ncc(w: &[f64], w_prime: &[f64]) -> f64 {
    assert_eq!(w.len(), w_prime.len(), "ncc of vectors with different lengths");
    let dot: f64 = w.iter().zip(w_prime).map(|(a, b)| a * b).sum();
    let nw: f64 = w.iter().map(|a| a * a).sum();
    let nwp: f64 = w_prime.iter().map(|b| b * b).sum();
    let denom = (nw * nwp).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (dot / denom).clamp(-1.0, 1.0)
}

/// Verifies `suspect` against a known original: align, extract, correlate, and threshold.
pub fn verify_against(
    suspect: &Trajectory,
    original: &Trajectory,
    spec: &WatermarkSpec,
    tau: f64,
) -> Result<VerificationReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    let aligned = align_size(suspect, original)?;
    let extracted = extract(&aligned, original, spec)?;
    if extracted.len() != spec.block_count() {
        return Err(Error::domain(format!(
            "original {:?} has {} blocks but the watermark has {}",
            original.id(),
            extracted.len(),
            spec.block_count()
        )));
    }
    let per_block_ncc: Vec<f64> = extracted
        .iter()
        .zip(&spec.per_block)
        .map(|(wp, w)| {
            let w: Vec<f64> = w.iter().map(|&v| f64::from(v)).collect();
            ncc(&w, wp)
        })
        .collect();
    let mean_ncc = per_block_ncc.iter().sum::<f64>() / per_block_ncc.len() as f64;
    Ok(VerificationReport {
        candidate_id: original.id().to_string(),
        aligned_size: aligned.len(),
        per_block_ncc,
        mean_ncc,
        tau,
        accepted: mean_ncc > tau,
    })
}

/// Full verification: pick the closest stored original, then [`verify_against`] it.
pub fn verify<'a, I>(
    suspect: &Trajectory,
    store: I,
    spec: &WatermarkSpec,
    tau: f64,
) -> Result<VerificationReport>
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let original = select_candidate(suspect, store)?;
    verify_against(suspect, original, spec, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::trajectory_distance;
    use crate::watermark::{embed, generate_watermark, WatermarkParams};

    fn walk(id: &str, n: usize, lat0: f64, lon0: f64) -> Trajectory {
        let pts = (0..n)
            .map(|i| {
                let f = i as f64;
                GpsPoint::new(
                    lat0 + f * 1.1e-4 + (f * 0.3).sin() * 3e-4,
                    lon0 + f * 0.9e-4 + (f * 0.17).cos() * 4e-4,
                    i as i64 * 5,
                )
                .unwrap()
            })
            .collect();
        Trajectory::new(id, pts).unwrap()
    }

    fn spec_for(t: &Trajectory, seed: u64) -> WatermarkSpec {
        let p = WatermarkParams::default();
        generate_watermark(t.len() / p.block_size, &p, seed).unwrap()
    }

    #[test]
    fn ncc_identities() {
        let w = [1.0, -1.0, 0.0, 1.0];
        assert_eq!(ncc(&w, &w), 1.0);
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        assert_eq!(ncc(&w, &neg), -1.0);
        assert_eq!(ncc(&[1.0, 1.0], &[1.0, -1.0]), 0.0);
        assert_eq!(ncc(&[0.0, 0.0], &[1.0, -1.0]), 0.0);
    }

    #[test]
    fn noiseless_roundtrip() {
        let t = walk("a", 64, 41.15, -8.61);
        let spec = spec_for(&t, 5);
        let wm = embed(&t, &spec).unwrap();
        let got = extract(&wm, &t, &spec).unwrap();
        for (g, w) in got.iter().zip(&spec.per_block) {
            for (a, &b) in g.iter().zip(w) {
                assert!((a - f64::from(b)).abs() < 1e-6, "{a} vs {b}");
            }
        }
        let r = verify(&wm, [&t], &spec, DEFAULT_TAU).unwrap();
        assert!(r.accepted);
        assert!(r.mean_ncc >= 0.999);
    }

    #[test]
    fn unwatermarked_extracts_zero_and_is_rejected() {
        let t = walk("a", 64, 41.15, -8.61);
        let spec = spec_for(&t, 5);
        for w in extract(&t, &t, &spec).unwrap() {
            assert!(w.iter().all(|&v| v == 0.0));
        }
        let r = verify_against(&t, &t, &spec, DEFAULT_TAU).unwrap();
        assert_eq!(r.mean_ncc, 0.0);
        assert!(!r.accepted);
    }

    #[test]
    fn strength_linearity() {
        let t = walk("a", 48, 41.15, -8.61);
        let spec = spec_for(&t, 9);
        let wm = embed(&t, &spec.with_strength(2.0 * spec.strength)).unwrap();
        for (g, w) in extract(&wm, &t, &spec).unwrap().iter().zip(&spec.per_block) {
            for (a, &b) in g.iter().zip(w) {
                assert!((a - 2.0 * f64::from(b)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn extract_rejects_bad_inputs() {
        let t = walk("a", 48, 41.15, -8.61);
        let short = walk("b", 32, 41.15, -8.61);
        let spec = spec_for(&t, 1);
        assert!(extract(&short, &t, &spec).is_err());
        assert!(extract(&t, &t, &spec.with_strength(0.0)).is_err());
        assert!(verify_against(&t, &t, &spec, 1.5).is_err());
    }

    #[test]
    fn candidate_selection() {
        let t = walk("orig", 64, 41.15, -8.61);
        let others: Vec<_> = (0..5)
            .map(|i| walk(&format!("x{i}"), 64, 41.16 + i as f64 * 0.01, -8.61))
            .collect();
        let spec = spec_for(&t, 2);
        let wm = embed(&t, &spec).unwrap();
        let store: Vec<&Trajectory> = others.iter().chain([&t]).collect();
        // exhaustive oracle
        let oracle = store
            .iter()
            .min_by(|a, b| trajectory_distance(&wm, a).total_cmp(&trajectory_distance(&wm, b)))
            .unwrap();
        let got = select_candidate(&wm, store.iter().copied()).unwrap();
        assert_eq!(got.id(), "orig");
        assert_eq!(got.id(), oracle.id());

        assert_eq!(select_candidate(&wm, [&others[3]]).unwrap().id(), "x3");
        assert_eq!(select_candidate(&t, store.iter().copied()).unwrap().id(), "orig");
        assert!(select_candidate(&wm, Vec::<&Trajectory>::new()).is_err());
    }

    #[test]
    fn candidate_ties_break_on_id() {
        let a = walk("b", 32, 41.0, 8.0);
        let b = walk("a", 32, 41.0, 8.0);
        assert_eq!(select_candidate(&a, [&a, &b]).unwrap().id(), "a");
        assert_eq!(select_candidate(&a, [&b, &a]).unwrap().id(), "a");
    }

    #[test]
    fn align_equal_is_identity() {
        let t = walk("a", 20, 41.0, 8.0);
        let o = walk("o", 20, 41.0001, 8.0);
        assert_eq!(align_size(&t, &o).unwrap(), t);
    }

    #[test]
    fn align_removes_inserted_midpoint() {
        let o = walk("o", 20, 41.0, 8.0);
        let mut pts = o.points().to_vec();
        let (p, q) = (pts[7], pts[8]);
        // nudge timestamps so a midpoint fits
        let mut pts2: Vec<GpsPoint> = pts.iter().map(|p| GpsPoint { t: p.t * 2, ..*p }).collect();
        pts2.insert(
            8,
            GpsPoint::new((p.lat + q.lat) / 2.0, (p.lon + q.lon) / 2.0, p.t * 2 + 1).unwrap(),
        );
        pts.clear();
        let suspect = Trajectory::new("s", pts2).unwrap();
        let aligned = align_size(&suspect, &o).unwrap();
        assert_eq!(aligned.len(), o.len());
        for (a, b) in aligned.points().iter().zip(o.points()) {
            assert_eq!((a.lat, a.lon), (b.lat, b.lon));
        }
    }

    #[test]
    fn align_fills_cropped_slot_with_nearest() {
        let o = walk("o", 20, 41.0, 8.0);
        let mut pts = o.points().to_vec();
        pts.remove(10);
        let suspect = Trajectory::new("s", pts.clone()).unwrap();
        let aligned = align_size(&suspect, &o).unwrap();
        assert_eq!(aligned.len(), 20);
        // brute-force oracle: slot 10 gets whichever surviving point is nearest
        let target = o.points()[10];
        let nearest = pts
            .iter()
            .min_by(|a, b| haversine(&target, a).total_cmp(&haversine(&target, b)))
            .unwrap();
        assert_eq!((aligned.points()[10].lat, aligned.points()[10].lon), (nearest.lat, nearest.lon));
        assert_eq!(aligned.timestamps(), o.timestamps());
        for i in (0..20).filter(|&i| i != 10) {
            assert_eq!(aligned.points()[i].lat, o.points()[i].lat);
        }
    }
}
