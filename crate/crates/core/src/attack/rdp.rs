//! Ramer-Douglas-Peucker simplification on geographic coordinates.

use crate::geo::{haversine, GpsPoint, EARTH_RADIUS_M};

/// Distance in meters from `p` to the chord `a`-`b`.
///
/// The chord is treated as a straight segment in an equirectangular plane
/// centred on it; the closest point on the segment is mapped back to degrees
/// and measured with haversine.
pub fn chord_distance(p: &GpsPoint, a: &GpsPoint, b: &GpsPoint) -> f64 {
    let k = ((a.lat + b.lat) / 2.0).to_radians().cos();
    let to_plane = |q: &GpsPoint| {
        (
            (q.lon - a.lon).to_radians() * k * EARTH_RADIUS_M,
            (q.lat - a.lat).to_radians() * EARTH_RADIUS_M,
        )
    };
    let (bx, by) = to_plane(b);
    let (px, py) = to_plane(p);
    let len2 = bx * bx + by * by;
    let u = if len2 == 0.0 {
        0.0
    } else {
        ((px * bx + py * by) / len2).clamp(0.0, 1.0)
    };
    let foot = GpsPoint {
        lat: a.lat + u * (b.lat - a.lat),
        lon: a.lon + u * (b.lon - a.lon),
        t: p.t,
    };
    haversine(p, &foot)
}

/// Indices of the points kept by RDP with tolerance `epsilon_m` meters, ascending.
///
/// Endpoints are always kept. A tolerance of zero keeps every point.
pub fn rdp(points: &[GpsPoint], epsilon_m: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 || epsilon_m <= 0.0 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((start, end)) = stack.pop() {
        if end <= start + 1 {
            continue;
        }
        let (a, b) = (&points[start], &points[end]);
        let (idx, dmax) = (start + 1..end)
            .map(|i| (i, chord_distance(&points[i], a, b)))
            .fold((start, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if dmax > epsilon_m {
            keep[idx] = true;
            stack.push((start, idx));
            stack.push((idx, end));
        }
    }
    keep.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lat: f64, lon: f64, t: i64) -> GpsPoint {
        GpsPoint { lat, lon, t }
    }

    #[test]
    fn collinear_keeps_endpoints() {
        let pts: Vec<_> = (0..10).map(|i| p(41.0 + i as f64 * 1e-4, -8.0, i)).collect();
        assert_eq!(rdp(&pts, 1.0), vec![0, 9]);
        assert_eq!(rdp(&pts, 0.0), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn keeps_a_corner() {
        let pts = [p(0.0, 0.0, 0), p(0.0, 0.001, 1), p(0.001, 0.001, 2)];
        assert_eq!(rdp(&pts, 5.0), vec![0, 1, 2]);
        assert_eq!(rdp(&pts, 1e6), vec![0, 2]);
    }

    #[test]
    fn chord_distance_perpendicular() {
        // 1e-4 deg of latitude off an east-west chord on the equator
        let d = chord_distance(&p(1e-4, 0.0005, 0), &p(0.0, 0.0, 0), &p(0.0, 0.001, 0));
        assert!((d - 11.119).abs() < 0.01, "{d}");
        // beyond the end of the chord the endpoint is nearest
        let d = chord_distance(&p(0.0, 0.002, 0), &p(0.0, 0.0, 0), &p(0.0, 0.001, 0));
        assert!((d - 111.19).abs() < 0.1, "{d}");
    }
}
