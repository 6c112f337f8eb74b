mod common;

use trajmark::attack::{Attack, AttackKind, AttackTable};
use trajmark::eval::{
    load_csv, run_experiment, synth_trajectories, write_csv, ExperimentConfig, TrajectoryStore,
};
use trajmark::watermark::{embed, generate_watermark, WatermarkParams, DEFAULT_TAU};

#[test]
fn csv_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let ts = synth_trajectories(5, 40, 3).unwrap();
    let wm: Vec<_> = ts
        .iter()
        .map(|t| embed(t, &generate_watermark(2, &WatermarkParams::default(), 1).unwrap()).unwrap())
        .collect();
    write_csv(&path, &wm).unwrap();
    assert_eq!(load_csv(&path).unwrap(), wm);
}

#[test]
fn store_roundtrip_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let ts = synth_trajectories(8, 64, 5).unwrap();
    let mut store = TrajectoryStore::new();
    let mut marked = Vec::new();
    for (i, t) in ts.iter().enumerate() {
        let spec = generate_watermark(4, &WatermarkParams::default(), i as u64).unwrap();
        marked.push(embed(t, &spec).unwrap());
        store.insert(t.clone(), spec).unwrap();
    }
    store.save(dir.path()).unwrap();
    let loaded = TrajectoryStore::open(dir.path()).unwrap();
    assert_eq!(loaded.len(), 8);
    for t in &ts {
        assert_eq!(loaded.original(t.id()).unwrap(), t);
        assert_eq!(loaded.spec(t.id()), store.spec(t.id()));
    }
    for (t, m) in ts.iter().zip(&marked) {
        let r = loaded.verify(m, DEFAULT_TAU).unwrap();
        assert_eq!(r.candidate_id, t.id());
        assert!(r.accepted);
    }
    assert!(TrajectoryStore::new().verify(&marked[0], DEFAULT_TAU).is_err());
}

#[test]
fn store_rejects_mismatched_spec() {
    let t = synth_trajectories(1, 64, 1).unwrap().remove(0);
    let spec = generate_watermark(3, &WatermarkParams::default(), 0).unwrap();
    assert!(TrajectoryStore::new().insert(t, spec).is_err());
}

fn small_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        dataset_id: "synthetic".into(),
        watermark: WatermarkParams::default(),
        attacks: AttackTable::default(),
        tau: DEFAULT_TAU,
        master_seed: seed,
    }
}

#[test]
fn experiment_is_deterministic_and_consistent() {
    let ds = synth_trajectories(12, 256, 21).unwrap();
    let a = run_experiment(&ds, &small_config(5)).unwrap();
    let b = run_experiment(&ds, &small_config(5)).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.baseline.rate, 1.0);
    assert_eq!(a.attacks.len(), 10);
    for r in &a.attacks {
        assert_eq!(r.tp + r.fn_ + r.dropped, ds.len());
        assert_eq!(r.rate, r.tp as f64 / (r.tp + r.fn_) as f64);
    }
    assert!(a.table().contains("AGWN") && a.table().contains("Avg."));
}

#[test]
fn violating_attacks_fall_back_to_weaker_parameters() {
    let ds = synth_trajectories(4, 64, 2).unwrap();
    let mut cfg = small_config(1);
    // strong enough to break 10 m on the first draw
    *cfg.attacks.attacks.iter_mut().find(|a| a.kind() == AttackKind::Agwn).unwrap() =
        Attack::Agwn { std_deg: 5e-4 };
    let r = run_experiment(&ds, &cfg).unwrap();
    let agwn = r.attack(AttackKind::Agwn).unwrap();
    assert_eq!(agwn.fallbacks, ds.len());
    assert_eq!(agwn.dropped, 0);
    assert!(agwn.mean_distance_m <= 10.0);
}
