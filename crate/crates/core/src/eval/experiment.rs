//! Recognition-rate experiment: watermark a dataset, attack every copy with
//! every configured attack, and count how often verification still succeeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{constrain, Attack, AttackKind, AttackTable};
use crate::error::{Error, Result};
use crate::geo::{segment, trajectory_distance, Trajectory};
use crate::watermark::{embed, generate_watermark, WatermarkParams};

use super::store::TrajectoryStore;

/// `TP / (TP + FN)` over the verification outcomes of watermarked inputs.
pub fn recognition_rate(accepted: &[bool]) -> Result<f64> {
    if accepted.is_empty() {
        return Err(Error::domain("recognition rate of an empty result set"));
    }
    let tp = accepted.iter().filter(|&&a| a).count();
    Ok(tp as f64 / accepted.len() as f64)
}

/// SplitMix64 finalizer over a seed and a pair of stream labels.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_SPEC: u64 = 0;
const STREAM_ATTACK: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    /// `None` for the unattacked baseline.
    pub kind: Option<AttackKind>,
    pub params: BTreeMap<String, f64>,
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub rate: f64,
    pub mean_ncc: f64,
    /// Mean distance between the watermarked and the attacked trajectory, meters.
    pub mean_distance_m: f64,
    /// Samples that had to be re-drawn with a weaker attack.
    pub fallbacks: usize,
    /// Samples that still broke the threshold after every fallback; excluded from TP/FN.
    pub dropped: usize,
}

impl AttackResult {
    pub fn label(&self) -> &'static str {
        self.kind.map_or("none", |k| k.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset_id: String,
    pub master_seed: u64,
    pub trajectories: usize,
    pub watermark: WatermarkParams,
    pub tau: f64,
    pub sigma_m: f64,
    pub mean_embed_distance_m: f64,
    pub max_embed_distance_m: f64,
    /// Embeddings that moved a trajectory further than sigma.
    pub embed_violations: usize,
    pub baseline: AttackResult,
    pub attacks: Vec<AttackResult>,
    /// Mean recognition rate over the attack columns.
    pub average_rate: f64,
    /// Wall-clock time; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub duration_s: f64,
}

impl ExperimentReport {
    pub fn attack(&self, kind: AttackKind) -> Option<&AttackResult> {
        self.attacks.iter().find(|a| a.kind == Some(kind))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Recognition rates in percent, one row, attacks as columns.
    pub fn table(&self) -> String {
        let mut head = format!("{:<12}", "Dataset");
        let mut row = format!("{:<12}", truncate(&self.dataset_id, 12));
        for a in &self.attacks {
            let w = a.label().len().max(6);
            write!(head, " {:>w$}", a.label()).unwrap();
            write!(row, " {:>w$.1}", a.rate * 100.0).unwrap();
        }
        write!(head, " {:>6}", "Avg.").unwrap();
        write!(row, " {:>6.1}", self.average_rate * 100.0).unwrap();
        format!(
            "{head}\n{row}\n\nno attack: {:.1}%  trajectories: {}  tau: {}  sigma: {} m\n",
            self.baseline.rate * 100.0,
            self.trajectories,
            self.tau,
            self.sigma_m
        )
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset_id: String,
    pub watermark: WatermarkParams,
    pub attacks: AttackTable,
    pub tau: f64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    accepted: bool,
    ncc: f64,
    distance_m: f64,
    fallbacks: usize,
    dropped: bool,
}

/// Attacks `watermarked` with `attack`, re-drawing with a weaker attack while
/// the result breaks the threshold.
fn attack_within_sigma(
    watermarked: &Trajectory,
    attack: &Attack,
    sigma_m: f64,
    max_fallbacks: u32,
    seed_of: impl Fn(u64) -> u64,
) -> Result<(Option<Trajectory>, usize)> {
    let mut current = attack.clone();
    for attempt in 0..=max_fallbacks {
        let attacked = current.apply(watermarked, seed_of(u64::from(attempt)))?;
        match constrain(watermarked, attacked, sigma_m) {
            Ok(t) => return Ok((Some(t), attempt as usize)),
            Err(Error::ConstraintViolation { distance, .. }) => {
                log::debug!(
                    "{} on {:?}: distance {distance:.2} m exceeds {sigma_m} m, weakening",
                    current.kind(),
                    watermarked.id()
                );
                current = current.weakened();
            }
            Err(e) => return Err(e),
        }
    }
    log::warn!(
        "{} on {:?}: still above {sigma_m} m after {max_fallbacks} fallbacks; sample dropped",
        attack.kind(),
        watermarked.id()
    );
    Ok((None, max_fallbacks as usize + 1))
}

fn tally(kind: Option<AttackKind>, attack: Option<&Attack>, outcomes: &[Outcome]) -> AttackResult {
    let kept: Vec<&Outcome> = outcomes.iter().filter(|o| !o.dropped).collect();
    let tp = kept.iter().filter(|o| o.accepted).count();
    let n = kept.len().max(1) as f64;
    AttackResult {
        kind,
        params: attack.map(Attack::params).unwrap_or_default(),
        tp,
        fn_: kept.len() - tp,
        rate: if kept.is_empty() { 0.0 } else { tp as f64 / kept.len() as f64 },
        mean_ncc: kept.iter().map(|o| o.ncc).sum::<f64>() / n,
        mean_distance_m: kept.iter().map(|o| o.distance_m).sum::<f64>() / n,
        fallbacks: outcomes.iter().filter(|o| o.fallbacks > 0).count(),
        dropped: outcomes.len() - kept.len(),
    }
}

/// Runs the full attack matrix over `dataset`.
///
/// Every trajectory gets its own random watermark; all originals go into one
/// store so candidate selection has to find the right one among them.
pub fn run_experiment(dataset: &[Trajectory], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    if dataset.is_empty() {
        return Err(Error::domain("experiment over an empty dataset"));
    }
    cfg.watermark.validate()?;
    let sigma_m = cfg.attacks.sigma_m;

    let mut store = TrajectoryStore::new();
    let mut watermarked = Vec::with_capacity(dataset.len());
    for (i, t) in dataset.iter().enumerate() {
        let blocks = segment(t.points(), cfg.watermark.block_size)?.block_count();
        let seed = derive_seed(cfg.master_seed, STREAM_SPEC, i as u64);
        let spec = generate_watermark(blocks, &cfg.watermark, seed)?;
        watermarked.push(embed(t, &spec)?);
        store.insert(t.clone(), spec)?;
    }
    let embed_distances: Vec<f64> = dataset
        .iter()
        .zip(&watermarked)
        .map(|(t, w)| trajectory_distance(t, w))
        .collect();
    let embed_violations = embed_distances.iter().filter(|&&d| d > sigma_m).count();
    if embed_violations > 0 {
        log::warn!("{embed_violations} embedding(s) exceed sigma = {sigma_m} m");
    }

    let attacks = cfg.attacks.ordered();
    // outcomes[i][0] is the unattacked baseline, then one per attack
    let outcomes: Vec<Vec<Outcome>> = watermarked
        .par_iter()
        .enumerate()
        .map(|(i, wm)| {
            let mut row = Vec::with_capacity(attacks.len() + 1);
            let r = store.verify(wm, cfg.tau)?;
            row.push(Outcome {
                accepted: r.accepted,
                ncc: r.mean_ncc,
                ..Default::default()
            });
            for (a, attack) in attacks.iter().enumerate() {
                let base = derive_seed(cfg.master_seed, STREAM_ATTACK, i as u64);
                let (attacked, fallbacks) = attack_within_sigma(
                    wm,
                    attack,
                    sigma_m,
                    cfg.attacks.max_fallbacks,
                    |attempt| derive_seed(base, a as u64, attempt),
                )?;
                let outcome = match attacked {
                    None => Outcome {
                        dropped: true,
                        fallbacks,
                        ..Default::default()
                    },
                    Some(t) => {
                        let r = store.verify(&t, cfg.tau)?;
                        Outcome {
                            accepted: r.accepted,
                            ncc: r.mean_ncc,
                            distance_m: trajectory_distance(wm, &t),
                            fallbacks,
                            dropped: false,
                        }
                    }
                };
                row.push(outcome);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let column = |c: usize| -> Vec<Outcome> { outcomes.iter().map(|row| row[c]).collect() };
    let baseline = tally(None, None, &column(0));
    let results: Vec<AttackResult> = attacks
        .iter()
        .enumerate()
        .map(|(a, attack)| tally(Some(attack.kind()), Some(attack), &column(a + 1)))
        .collect();
    let average_rate = results.iter().map(|r| r.rate).sum::<f64>() / results.len() as f64;

    Ok(ExperimentReport {
        dataset_id: cfg.dataset_id.clone(),
        master_seed: cfg.master_seed,
        trajectories: dataset.len(),
        watermark: cfg.watermark,
        tau: cfg.tau,
        sigma_m,
        mean_embed_distance_m: embed_distances.iter().sum::<f64>() / embed_distances.len() as f64,
        max_embed_distance_m: embed_distances.iter().copied().fold(0.0, f64::max),
        embed_violations,
        baseline,
        attacks: results,
        average_rate,
        duration_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        let mut v = vec![true; 99];
        v.push(false);
        assert_eq!(recognition_rate(&v).unwrap(), 0.99);
        assert_eq!(recognition_rate(&[true; 5]).unwrap(), 1.0);
        assert_eq!(recognition_rate(&[false; 5]).unwrap(), 0.0);
        assert!(recognition_rate(&[]).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
    }
}
