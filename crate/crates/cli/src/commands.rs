use std::fs;
use std::path::Path;

use serde_json::json;
use trajmark::attack::{constrain, AttackKind, AttackTable};
use trajmark::eval::{
    derive_seed, load_csv, load_porto, run_experiment, synth_trajectories, write_csv,
    ExperimentConfig, TrajectoryStore,
};
use trajmark::geo::{segment, trajectory_distance};
use trajmark::watermark::{embed as embed_one, generate_watermark, WatermarkParams, WatermarkSpec};
use trajmark::{Error, Trajectory};

use crate::exit;
use crate::{AttackArgs, DatasetFormat, EmbedArgs, EvaluateArgs, KeygenArgs, VerifyArgs, WatermarkOpts};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: exit::USAGE,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        println!("seed: {s} (drawn; pass --seed {s} to reproduce)");
        s
    })
}

fn echo(params: serde_json::Value) {
    println!("params: {params}");
}

/// Refuses to clobber an existing file unless forced, and never writes over an input.
fn check_output(path: &Path, inputs: &[&Path], force: bool) -> Result<(), Failure> {
    let same = |a: &Path, b: &Path| match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if inputs.iter().any(|i| same(path, i)) {
        return Err(Failure::usage(format!("{} is also an input", path.display())));
    }
    if path.exists() && !force {
        return Err(Failure::usage(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(())
}

fn params_from(opts: &WatermarkOpts) -> Result<WatermarkParams, Failure> {
    let p = WatermarkParams {
        block_size: opts.block_size,
        strength: opts.strength,
        nonzero_count: opts.nnz,
    };
    p.validate()?;
    Ok(p)
}

pub fn keygen(a: KeygenArgs) -> CmdResult {
    check_output(&a.out, &[], a.force)?;
    let params = params_from(&a.watermark)?;
    let seed = seed_or_fresh(a.seed);
    echo(json!({
        "blocks": a.blocks,
        "block_size": params.block_size,
        "nonzero_count": params.nonzero_count,
        "strength": params.strength,
        "seed": seed,
    }));
    let spec = generate_watermark(a.blocks, &params, seed)?;
    spec.save(&a.out)?;
    println!("wrote {}", a.out.display());
    Ok(exit::OK)
}

pub fn embed(a: EmbedArgs) -> CmdResult {
    check_output(&a.output, &[&a.input], a.force)?;
    if a.sigma.is_nan() || a.sigma <= 0.0 {
        return Err(Failure::usage("--sigma must be positive"));
    }
    let trajectories = load_csv(&a.input)?;
    let shared = match &a.spec {
        Some(path) => {
            if a.block_size.is_some() || a.nnz.is_some() {
                return Err(Failure::usage("--block-size and --nnz come from --spec"));
            }
            let spec = WatermarkSpec::load(path)?;
            Some(match a.strength {
                Some(s) => spec.with_strength(s),
                None => spec,
            })
        }
        None => None,
    };
    let params = match &shared {
        Some(spec) => spec.params(),
        None => WatermarkParams {
            block_size: a.block_size.unwrap_or(16),
            nonzero_count: a.nnz.unwrap_or(10),
            strength: a.strength.unwrap_or(0.0003),
        },
    };
    params.validate()?;
    let seed = match &shared {
        Some(spec) => spec.seed,
        None => seed_or_fresh(a.seed),
    };
    echo(json!({
        "block_size": params.block_size,
        "nonzero_count": params.nonzero_count,
        "strength": params.strength,
        "seed": seed,
        "spec": a.spec.as_ref().map(|p| p.display().to_string()),
        "sigma_m": a.sigma,
    }));

    let index = a.store.join("index.json");
    let mut store = if index.exists() {
        TrajectoryStore::open(&a.store)?
    } else {
        TrajectoryStore::new()
    };

    let mut marked = Vec::new();
    let mut violations = 0;
    for (i, t) in trajectories.iter().enumerate() {
        let result = (|| -> trajmark::Result<(Trajectory, WatermarkSpec)> {
            let spec = match &shared {
                Some(spec) => spec.clone(),
                None => {
                    let blocks = segment(t.points(), params.block_size)?.block_count();
                    generate_watermark(blocks, &params, derive_seed(seed, 0, i as u64))?
                }
            };
            Ok((embed_one(t, &spec)?, spec))
        })();
        match result {
            Ok((w, spec)) => {
                if store.original(t.id()).is_some() && !a.force {
                    return Err(Failure::usage(format!(
                        "store already holds {:?}; pass --force to replace it",
                        t.id()
                    )));
                }
                let d = trajectory_distance(t, &w);
                let ok = d <= a.sigma;
                violations += usize::from(!ok);
                println!(
                    "{}\tD={d:.3} m\t{}",
                    t.id(),
                    if ok { "ok" } else { "SIGMA VIOLATION" }
                );
                store.insert(t.clone(), spec)?;
                marked.push(w);
            }
            Err(e) => eprintln!("{}\tfailed: {e}", t.id()),
        }
    }
    if marked.is_empty() {
        return Err(Failure {
            code: exit::EMBED_FAILED,
            msg: "no trajectory could be watermarked".into(),
        });
    }
    write_csv(&a.output, &marked)?;
    store.save(&a.store)?;
    println!(
        "watermarked {}/{} trajectories into {}; store {} holds {}",
        marked.len(),
        trajectories.len(),
        a.output.display(),
        a.store.display(),
        store.len()
    );
    Ok(if violations > 0 { exit::EMBED_SIGMA } else { exit::OK })
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    if !(a.tau > 0.0 && a.tau < 1.0) {
        return Err(Failure::usage("--tau must lie in (0, 1)"));
    }
    echo(json!({ "tau": a.tau, "store": a.store.display().to_string() }));
    if !a.store.join("index.json").exists() {
        return Err(Failure::usage(format!("no store at {}", a.store.display())));
    }
    let store = TrajectoryStore::open(&a.store)?;
    if store.is_empty() {
        return Err(Failure::usage("store is empty"));
    }
    let suspects = load_csv(&a.suspect)?;
    let mut rejected = 0;
    for s in &suspects {
        let r = store.verify(s, a.tau)?;
        rejected += usize::from(!r.accepted);
        if a.json {
            println!("{}", json!({ "suspect": s.id(), "report": r }));
        } else {
            println!(
                "{}\tcandidate={}\tmean_ncc={:.4}\t{}",
                s.id(),
                r.candidate_id,
                r.mean_ncc,
                if r.accepted { "ACCEPT" } else { "REJECT" }
            );
        }
    }
    println!("{}/{} accepted", suspects.len() - rejected, suspects.len());
    Ok(if rejected > 0 { exit::REJECTED } else { exit::OK })
}

fn load_table(config: Option<&Path>) -> Result<AttackTable, Failure> {
    Ok(match config {
        Some(p) => AttackTable::load(p)?,
        None => AttackTable::default(),
    })
}

pub fn attack(a: AttackArgs) -> CmdResult {
    let kind: AttackKind = a.kind.parse().map_err(Failure::from)?;
    check_output(&a.output, &[&a.input], a.force)?;
    let table = load_table(a.config.as_deref())?;
    let mut attack = table.get(kind).clone();
    for kv in &a.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--param {kv:?} is not KEY=VALUE")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("--param {kv:?}: value is not a number")))?;
        attack.set_param(k.trim(), v)?;
    }
    let sigma = a.sigma.unwrap_or(table.sigma_m);
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Failure::usage("--sigma must be positive"));
    }
    let seed = seed_or_fresh(a.seed);
    echo(json!({
        "kind": kind.name(),
        "params": attack.params(),
        "sigma_m": sigma,
        "seed": seed,
    }));

    let input = load_csv(&a.input)?;
    let mut out = Vec::with_capacity(input.len());
    let mut violations = 0;
    for (i, t) in input.iter().enumerate() {
        let attacked = attack.apply(t, derive_seed(seed, 0, i as u64))?;
        let d = trajectory_distance(t, &attacked);
        let status = match constrain(t, attacked.clone(), sigma) {
            Ok(_) => "ok",
            Err(Error::ConstraintViolation { .. }) => {
                violations += 1;
                "SIGMA VIOLATION"
            }
            Err(e) => return Err(e.into()),
        };
        println!("{}\tD={d:.3} m\t{status}", t.id());
        out.push(attacked);
    }
    write_csv(&a.output, &out)?;
    println!("wrote {} trajectories to {}", out.len(), a.output.display());
    Ok(if violations > 0 { exit::ATTACK_SIGMA } else { exit::OK })
}

fn load_dataset(a: &EvaluateArgs, seed: u64) -> Result<Vec<Trajectory>, Failure> {
    let input = || {
        a.input
            .as_deref()
            .ok_or_else(|| Failure::usage("--input is required for this dataset"))
    };
    let mut ts = match a.dataset {
        DatasetFormat::Csv => load_csv(input()?)?,
        DatasetFormat::Porto => {
            let load = load_porto(input()?)?;
            if load.skipped > 0 {
                println!("skipped {} unusable trips", load.skipped);
            }
            load.trajectories
        }
        DatasetFormat::Synthetic => synth_trajectories(a.count, a.size, seed)?,
    };
    if let Some(n) = a.truncate {
        ts = ts
            .into_iter()
            .filter(|t| t.len() >= n)
            .map(|t| {
                let pts = t.points()[..n].to_vec();
                t.with_points(pts)
            })
            .collect::<trajmark::Result<_>>()?;
    }
    let min = a.watermark.block_size;
    let before = ts.len();
    ts.retain(|t| t.len() >= min);
    if ts.len() < before {
        println!("dropped {} trajectories shorter than {min} points", before - ts.len());
    }
    if let Some(n) = a.limit {
        ts.truncate(n);
    }
    if ts.is_empty() {
        return Err(Failure::usage("dataset holds no usable trajectories"));
    }
    Ok(ts)
}

pub fn evaluate(a: EvaluateArgs) -> CmdResult {
    let json_path = a.report.join("report.json");
    let table_path = a.report.join("table.txt");
    for p in [&json_path, &table_path] {
        check_output(p, &[], a.force)?;
    }
    let watermark = params_from(&a.watermark)?;
    let attacks = load_table(a.config.as_deref())?;
    let seed = seed_or_fresh(a.seed);
    let dataset_id = match (&a.dataset, &a.input) {
        (DatasetFormat::Synthetic, _) => format!("synthetic-{}x{}", a.count, a.size),
        (_, Some(p)) => p.display().to_string(),
        (_, None) => String::new(),
    };
    echo(json!({
        "dataset": dataset_id,
        "watermark": watermark,
        "tau": a.tau,
        "sigma_m": attacks.sigma_m,
        "max_fallbacks": attacks.max_fallbacks,
        "attacks": attacks.ordered().iter().map(|x| json!({"kind": x.kind().name(), "params": x.params()})).collect::<Vec<_>>(),
        "seed": seed,
    }));
    let ts = load_dataset(&a, seed)?;
    let cfg = ExperimentConfig {
        dataset_id,
        watermark,
        attacks,
        tau: a.tau,
        master_seed: seed,
    };
    let report = run_experiment(&ts, &cfg)?;
    let table = report.table();
    fs::create_dir_all(&a.report).map_err(|e| Failure::usage(format!("{}: {e}", a.report.display())))?;
    for (path, body) in [(&json_path, report.to_json()), (&table_path, table.clone())] {
        fs::write(path, body).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    print!("{table}");
    println!(
        "{} trajectories in {:.1} s; reports in {}",
        report.trajectories,
        report.duration_s,
        a.report.display()
    );
    Ok(exit::OK)
}
