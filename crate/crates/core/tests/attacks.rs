mod common;

use common::{binomial_band, wiggle};
use rand::Rng;
use trajmark::attack::{
    agwn, asnr, chord_distance, constrain, crop, hybrid, lia, rdp, rnspp, rrp, rrpp, Attack,
    AttackConfig, AttackKind, AttackTable,
};
use trajmark::eval::synth_trajectories;
use trajmark::geo::{haversine, trajectory_distance};
use trajmark::watermark::{embed, generate_watermark, WatermarkParams};
use trajmark::{Error, GpsPoint, Trajectory};

fn watermarked(seed: u64) -> Trajectory {
    let t = &synth_trajectories(1, 256, seed).unwrap()[0];
    embed(t, &generate_watermark(16, &WatermarkParams::default(), seed).unwrap()).unwrap()
}

fn changed_points(a: &Trajectory, b: &Trajectory) -> usize {
    a.points().iter().zip(b.points()).filter(|(p, q)| p != q).count()
}

#[test]
fn every_attack_is_identity_at_its_identity_parameter() {
    let t = watermarked(1);
    for kind in AttackKind::ALL {
        let out = Attack::identity(kind).apply(&t, 5).unwrap();
        if kind == AttackKind::Dea {
            // zero-strength re-embedding goes through the transform
            assert!(trajectory_distance(&t, &out) < 1e-6);
        } else {
            assert_eq!(out, t, "{kind}");
        }
    }
}

#[test]
fn every_attack_is_deterministic_and_keeps_time_order() {
    let table = AttackTable::default();
    let t = watermarked(2);
    for attack in table.ordered() {
        let a = attack.apply(&t, 42).unwrap();
        let b = attack.apply(&t, 42).unwrap();
        assert_eq!(a, b, "{}", attack.kind());
        assert!(a.points().windows(2).all(|w| w[0].t < w[1].t));
        match attack.kind() {
            AttackKind::Lia => assert!(a.len() >= t.len()),
            AttackKind::Crop | AttackKind::Hybrid => assert!(a.len() <= t.len()),
            _ => assert_eq!(a.len(), t.len(), "{}", attack.kind()),
        }
        if attack.kind() != AttackKind::Rnspp {
            assert_ne!(attack.apply(&t, 43).unwrap(), a, "{}", attack.kind());
        }
    }
}

#[test]
fn agwn_displacement_matches_monte_carlo() {
    let t = watermarked(3);
    let std = 2e-5;
    let out = agwn(&t, std, 9).unwrap();
    let d = trajectory_distance(&t, &out);
    // Monte-Carlo oracle for the mean haversine length of the same noise
    let mut r = common::rng(1234);
    let normal = rand_distr::Normal::new(0.0, std).unwrap();
    let trials = 20_000;
    let mut acc = 0.0;
    for i in 0..trials {
        let p = t.points()[i % t.len()];
        let q = GpsPoint {
            lat: p.lat + r.sample(normal),
            lon: p.lon + r.sample(normal),
            t: p.t,
        };
        acc += haversine(&p, &q);
    }
    let oracle = acc / trials as f64;
    assert!((d - oracle).abs() / oracle < 0.15, "{d} vs {oracle}");
    assert!(d < 10.0);
}

#[test]
fn asnr_vanishes_at_high_snr() {
    let t = watermarked(4);
    // noise std is sqrt(P / 10^(snr/10)); a few km of extent puts 150 dB near 1e-5 m
    for (snr, bound) in [(150.0, 1e-3), (200.0, 1e-6)] {
        let out = asnr(&t, snr, 1).unwrap();
        for (p, q) in t.points().iter().zip(out.points()) {
            assert!(haversine(p, q) < bound, "{snr} dB");
        }
    }
}

#[test]
fn selection_fractions_follow_the_binomial() {
    let t = watermarked(5);
    let p = 0.3;
    let (mut rrp_hits, mut crop_hits, mut aosnr_hits, mut lia_hits) = (0, 0, 0, 0);
    let runs = 20;
    for seed in 0..runs {
        rrp_hits += changed_points(&t, &rrp(&t, p, seed).unwrap());
        crop_hits += t.len() - crop(&t, p, seed).unwrap().len();
        aosnr_hits += changed_points(
            &t,
            &Attack::Aosnr { p, snr_db: 40.0 }.apply(&t, seed).unwrap(),
        );
        lia_hits += lia(&t, p, seed).unwrap().len() - t.len();
    }
    let n = t.len() * runs as usize;
    let check = |hits: usize, trials: usize, name: &str| {
        let (lo, hi) = binomial_band(trials, p);
        assert!((lo..=hi).contains(&(hits as f64)), "{name}: {hits} not in [{lo}, {hi}]");
    };
    check(rrp_hits, n - runs as usize, "rrp");
    check(crop_hits, n - 2 * runs as usize, "crop");
    check(aosnr_hits, n, "aosnr");
    check(lia_hits, n - runs as usize, "lia");
}

#[test]
fn rrpp_replacements_lie_on_their_anchor_segments() {
    let t = wiggle("w", 200, 6);
    for seed in 0..10 {
        let out = rrpp(&t, 0.3, seed).unwrap();
        let unchanged: Vec<usize> = (0..t.len()).filter(|&j| out.points()[j] == t.points()[j]).collect();
        for j in 0..t.len() {
            if out.points()[j] == t.points()[j] {
                continue;
            }
            let prev = *unchanged.iter().rev().find(|&&k| k < j).unwrap();
            let next = *unchanged.iter().find(|&&k| k > j).unwrap();
            let d = chord_distance(&out.points()[j], &t.points()[prev], &t.points()[next]);
            assert!(d < 1e-3, "point {j} is {d} m off its chord");
        }
    }
}

#[test]
fn rdp_removed_points_are_within_tolerance() {
    let mut r = common::rng(7);
    for _ in 0..20 {
        let pts: Vec<GpsPoint> = (0..150)
            .map(|i| GpsPoint {
                lat: 48.0 + i as f64 * 1e-4 + r.random_range(-1e-4..1e-4),
                lon: 11.0 + r.random_range(-1e-4..1e-4),
                t: i,
            })
            .collect();
        let eps = r.random_range(1.0..20.0);
        let kept = rdp(&pts, eps);
        assert_eq!((kept[0], *kept.last().unwrap()), (0, 149));
        for pair in kept.windows(2) {
            for j in pair[0] + 1..pair[1] {
                assert!(chord_distance(&pts[j], &pts[pair[0]], &pts[pair[1]]) <= eps);
            }
        }
    }
}

#[test]
fn rnspp_flattens_a_zigzag() {
    // 2 m zig-zag around a straight east-west line
    let pts: Vec<GpsPoint> = (0..64)
        .map(|i| GpsPoint {
            lat: 45.0 + if i % 2 == 0 { 9e-6 } else { -9e-6 },
            lon: 7.0 + i as f64 * 1e-4,
            t: i * 5,
        })
        .collect();
    let t = Trajectory::new("z", pts).unwrap();
    let out = rnspp(&t, 5.0).unwrap();
    assert_eq!(out.len(), t.len());
    let ends = (t.points()[0], t.points()[63]);
    for p in out.points() {
        assert!(chord_distance(p, &ends.0, &ends.1) < 1e-3);
    }
    assert!(trajectory_distance(&t, &out) <= 5.0);
}

#[test]
fn lia_inserts_exact_midpoints() {
    let t = wiggle("w", 50, 8);
    let out = lia(&t, 0.5, 3).unwrap();
    let mut k = 0;
    for p in out.points() {
        if k < t.len() && *p == t.points()[k] {
            k += 1;
        } else {
            let (a, b) = (t.points()[k - 1], t.points()[k]);
            assert_eq!(p.lat, (a.lat + b.lat) / 2.0);
            assert_eq!(p.lon, (a.lon + b.lon) / 2.0);
        }
    }
    assert_eq!(k, t.len());
}

#[test]
fn hybrid_is_a_sigma_modification_under_defaults() {
    let table = AttackTable::default();
    let attack = table.get(AttackKind::Hybrid);
    for seed in 0..20 {
        let t = watermarked(100 + seed);
        let out = attack.apply(&t, seed).unwrap();
        assert!(constrain(&t, out, table.sigma_m).is_ok());
    }
    let t = watermarked(9);
    assert_eq!(hybrid(&t, 0.0, 0.0, 0.0, 77).unwrap(), t);
}

#[test]
fn constrain_flags_large_shifts() {
    let t = watermarked(10);
    assert!(constrain(&t, t.clone(), 10.0).is_ok());
    // ~20 m north
    let shifted = t
        .with_points(t.points().iter().map(|p| GpsPoint { lat: p.lat + 1.8e-4, ..*p }).collect())
        .unwrap();
    match constrain(&t, shifted, 10.0) {
        Err(Error::ConstraintViolation { distance, sigma }) => {
            assert!(distance > 19.0 && sigma == 10.0);
        }
        other => panic!("expected a violation, got {other:?}"),
    }
    assert!(constrain(&t, t.clone(), 0.0).is_err());

    let cfg = AttackConfig {
        attack: Attack::Agwn { std_deg: 1e-3 },
        sigma_m: 10.0,
        seed: 1,
    };
    assert!(matches!(cfg.run(&t), Err(Error::ConstraintViolation { .. })));
}
