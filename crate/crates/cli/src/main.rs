use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const OK: u8 = 0;
    pub const REJECTED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const EMBED_SIGMA: u8 = 3;
    pub const EMBED_FAILED: u8 = 4;
    pub const ATTACK_SIGMA: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "trajmark", version, about = "Watermark GPS trajectories in the frequency domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random watermark spec.
    Keygen(KeygenArgs),
    /// Watermark every trajectory of a CSV file and register the originals.
    Embed(EmbedArgs),
    /// Check suspect trajectories against a store.
    Verify(VerifyArgs),
    /// Apply one attack to every trajectory of a CSV file.
    Attack(AttackArgs),
    /// Run the full attack matrix over a dataset.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, clap::Args)]
pub struct WatermarkOpts {
    #[arg(long, default_value_t = 16)]
    pub block_size: usize,
    #[arg(long, default_value_t = 10)]
    pub nnz: usize,
    #[arg(long, default_value_t = 0.0003)]
    pub strength: f64,
}

#[derive(Debug, clap::Args)]
pub struct KeygenArgs {
    /// Number of blocks, i.e. floor(trajectory size / block size).
    #[arg(long)]
    pub blocks: usize,
    #[command(flatten)]
    pub watermark: WatermarkOpts,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, clap::Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Apply this spec to every trajectory. Without it each trajectory gets
    /// its own spec drawn from --seed.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub nnz: Option<usize>,
    /// Overrides the strength of the spec.
    #[arg(long)]
    pub strength: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suspect: PathBuf,
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub tau: f64,
    /// Print full reports as JSON lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, clap::Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub kind: String,
    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Attack table to take defaults from.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetFormat {
    /// Generic `id,timestamp,lat,lon` CSV.
    Csv,
    /// Porto taxi CSV with a POLYLINE column.
    Porto,
    /// Generated random walks.
    Synthetic,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    #[arg(long, value_enum)]
    pub dataset: DatasetFormat,
    /// Dataset file, required unless --dataset synthetic.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Attack table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving report.json and table.txt.
    #[arg(long)]
    pub report: PathBuf,
    /// Use at most this many trajectories.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Keep the first N points of each trajectory and drop shorter ones.
    #[arg(long)]
    pub truncate: Option<usize>,
    /// Synthetic dataset size.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Synthetic trajectory length.
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[command(flatten)]
    pub watermark: WatermarkOpts,
    #[arg(long, default_value_t = 0.85)]
    pub tau: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub force: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(a) => commands::keygen(a),
        Command::Embed(a) => commands::embed(a),
        Command::Verify(a) => commands::verify(a),
        Command::Attack(a) => commands::attack(a),
        Command::Evaluate(a) => commands::evaluate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
