mod commands;
mod error;
mod manifest;
mod plot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ectmol::dataset::TargetTransform;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "ectmol", version, about = "ECT descriptors for molecules given as SMILES")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse SMILES and print graph counts (after adding hydrogens).
    Parse(ParseArgs),
    /// Compute ECT features for every molecule in a CSV.
    Ect(EctArgs),
    /// Cross-validate ridge regression on a feature file.
    Cv(CvArgs),
    /// Draw one ECC curve or a full ECT heatmap as SVG.
    Plot(PlotArgs),
    /// Cross-validate over a grid of direction and threshold counts.
    Sweep(SweepArgs),
    /// Write a synthetic dataset whose target depends on ring count and size.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformArg {
    Log10,
    Identity,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ColumnArgs {
    #[arg(long, default_value = "smiles")]
    pub smiles_column: String,
    #[arg(long, default_value = "target")]
    pub target_column: String,
    /// Identifier column; falls back to `mol_id`, then to the row index.
    #[arg(long)]
    pub id_column: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TargetArgs {
    #[arg(long, value_enum, default_value_t = TransformArg::Log10)]
    pub target_transform: TransformArg,
    /// Same as `--target-transform log10`.
    #[arg(long, conflicts_with = "target_transform")]
    pub log10_target: bool,
}

impl TargetArgs {
    pub fn transform(&self) -> TargetTransform {
        match (self.log10_target, self.target_transform) {
            (true, _) | (false, TransformArg::Log10) => TargetTransform::Log10,
            (false, TransformArg::Identity) => TargetTransform::Identity,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParseArgs {
    /// SMILES string to parse.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    pub smiles: Option<String>,
    /// File with one SMILES per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EctArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Feature table path; sidecars `<out>.manifest.json`, `<out>.norm.json`
    /// and `<out>.ingest.json` are written next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = ectmol::ect::DEFAULT_DIRECTIONS)]
    pub dirs: usize,
    #[arg(long, default_value_t = ectmol::ect::DEFAULT_THRESHOLDS)]
    pub thresholds: usize,
    /// Direction sampling seed.
    #[arg(long, env = "ECTMOL_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub columns: ColumnArgs,
    /// Keep only the largest fragment of multi-component SMILES.
    #[arg(long)]
    pub largest_component: bool,
    /// Drop unparsable SMILES (listed in the ingest report) instead of failing.
    #[arg(long)]
    pub skip_invalid: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CvArgs {
    /// ECT feature file (CSV or binary).
    #[arg(long)]
    pub features: PathBuf,
    /// Fingerprint matrix appended to the features (CSV by id, or binary).
    #[arg(long)]
    pub fingerprint: Option<PathBuf>,
    /// Dataset CSV supplying the targets.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, default_value_t = ectmol::regression::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Fold shuffle seed.
    #[arg(long, env = "ECTMOL_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = ectmol::regression::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub columns: ColumnArgs,
    /// JSON report path; an aligned text table goes to the same path with
    /// a `.txt` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long)]
    pub smiles: String,
    /// Plot the ECC along this direction.
    #[arg(long, required_unless_present = "heatmap", conflicts_with = "heatmap")]
    pub direction_index: Option<usize>,
    /// Plot the whole transform as a direction × threshold grid.
    #[arg(long)]
    pub heatmap: bool,
    #[arg(long, default_value_t = 10)]
    pub dirs: usize,
    #[arg(long, default_value_t = 20)]
    pub thresholds: usize,
    #[arg(long, env = "ECTMOL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Normalization statistics from an `ect` run; without it the molecule
    /// is scaled on its own.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Comma-separated positive counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CountList(pub Vec<usize>);

fn parse_count_list(s: &str) -> Result<CountList, String> {
    s.split(',')
        .map(|item| match item.trim().parse::<usize>() {
            Ok(0) => Err("counts must be positive".to_string()),
            Ok(v) => Ok(v),
            Err(_) => Err(format!("{item:?} is not a positive integer")),
        })
        .collect::<Result<_, _>>()
        .map(CountList)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated direction counts, e.g. `20,30,50`.
    #[arg(long, value_parser = parse_count_list)]
    pub dirs_list: CountList,
    /// Comma-separated threshold counts, e.g. `8,16`.
    #[arg(long, value_parser = parse_count_list)]
    pub thresholds_list: CountList,
    /// Direction sampling seed.
    #[arg(long, env = "ECTMOL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Fold shuffle seed.
    #[arg(long, default_value_t = 42)]
    pub cv_seed: u64,
    #[arg(long, default_value_t = ectmol::regression::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = ectmol::regression::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub columns: ColumnArgs,
    #[arg(long)]
    pub largest_component: bool,
    /// Sweep table (CSV).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, env = "ECTMOL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Standard deviation of the Gaussian target noise.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(error::EXIT_USAGE as u8),
            };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(error::EXIT_USAGE as u8);
        }
    };
    let jobs = cli.jobs.map(|n| n as usize);
    let result = pool.install(|| match &cli.command {
        Command::Parse(a) => commands::parse(a, jobs),
        Command::Ect(a) => commands::ect(a, jobs),
        Command::Cv(a) => commands::cv(a, jobs),
        Command::Plot(a) => commands::plot(a, jobs),
        Command::Sweep(a) => commands::sweep(a, jobs),
        Command::Synth(a) => commands::synth(a, jobs),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
