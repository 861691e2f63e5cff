use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vdialogue_core::ahp::{self, PairwiseMatrix, WeightMethod, WeightVector};
use vdialogue_core::evaluate::{evaluate_records, EvalOptions};
use vdialogue_core::ingest::{read_records, JoinPolicy, Records, Role};
use vdialogue_core::leaderboard::{self, RenderOptions, SortKey, TableFormat};
use vdialogue_core::manifest::default_manifest;
use vdialogue_core::task::catalogued_candidate_set_size;
use vdialogue_core::vdscore::{aggregate, derive_task_weights};
use vdialogue_core::{LeaderboardEntry, MetricReport, ScoreManifest, TaskKind};

/// Evaluation harness for multimodal dialogue benchmarks.
#[derive(Parser, Debug)]
#[command(name = "vdialogue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a prediction file against gold records and emit a metric report.
    Eval(EvalArgs),
    /// Derive weights from a pairwise comparison matrix and check its consistency.
    Ahp(AhpArgs),
    /// Aggregate a directory of metric reports into the composite score.
    Vdscore(VdscoreArgs),
    /// Maintain an append-only leaderboard.
    #[command(subcommand)]
    Leaderboard(LeaderboardCommand),
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// One of response_generation, intent_prediction, retrieval_t2i, retrieval_i2t, state_tracking.
    task: TaskKind,
    /// Dataset label written into the report.
    dataset: String,
    gold: PathBuf,
    pred: PathBuf,
    /// Recall cut-offs for retrieval tasks.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    /// Intent scores strictly above this count as positive.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Score gold records without a prediction as wrong instead of failing.
    #[arg(long)]
    missing_as_wrong: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AhpArgs {
    /// JSON matrix file: {"labels": [...], "entries": [[...], ...]}.
    #[arg(required_unless_present = "canonical", conflicts_with = "canonical")]
    matrix: Option<PathBuf>,
    /// Use the built-in five-task judgment matrix.
    #[arg(long)]
    canonical: bool,
    #[arg(long, default_value_t = WeightMethod::ColumnMean)]
    method: WeightMethod,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WeightSource {
    /// Weights stored in the manifest.
    Published,
    /// Weights derived from a comparison matrix.
    Derived,
}

#[derive(Args, Debug)]
struct WeightArgs {
    /// TOML or JSON manifest; defaults to the built-in five-task layout.
    #[arg(long, env = "VDIALOGUE_MANIFEST")]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WeightSource::Published)]
    weights: WeightSource,
    /// Matrix for --weights derived; defaults to the built-in one.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, default_value_t = WeightMethod::ColumnMean)]
    method: WeightMethod,
    /// Accept derived weights from an inconsistent matrix.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct VdscoreArgs {
    reports: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LeaderboardCommand {
    /// Score a reports directory and append it to the store.
    Add(AddArgs),
    /// Render the store as a ranked table.
    Show(ShowArgs),
}

#[derive(Args, Debug)]
struct AddArgs {
    store: PathBuf,
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    name: String,
    #[command(flatten)]
    weights: WeightArgs,
    /// RFC 3339 timestamp to record instead of the current time.
    #[arg(long, value_parser = parse_timestamp)]
    timestamp: Option<DateTime<Utc>>,
}

#[derive(Args, Debug)]
struct ShowArgs {
    store: PathBuf,
    #[arg(long, default_value = "markdown")]
    format: TableFormat,
    /// vdscore, a task name, or task/dataset/metric.
    #[arg(long, default_value = "vdscore")]
    sort: SortKey,
    /// Show every run instead of the latest per model.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, chrono::ParseError> {
    DateTime::parse_from_rfc3339(s).map(|t| t.with_timezone(&Utc))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_manifest(path: Option<&Path>) -> Result<ScoreManifest> {
    match path {
        Some(path) => ScoreManifest::load(path).with_context(|| format!("loading manifest {}", path.display())),
        None => Ok(default_manifest()),
    }
}

fn resolve_weights(args: &WeightArgs, manifest: &ScoreManifest) -> Result<WeightVector> {
    match args.weights {
        WeightSource::Published => Ok(WeightVector::new(manifest.weights().to_vec())?),
        WeightSource::Derived => {
            let matrix = match &args.matrix {
                Some(path) => PairwiseMatrix::load(path)?,
                None => ahp::canonical_matrix(),
            };
            let (weights, report) = derive_task_weights(&matrix, args.method, args.force)?;
            if !report.consistent {
                eprintln!("warning: using weights from an inconsistent matrix (CR = {:.4})", report.cr);
            }
            Ok(weights)
        }
    }
}

fn eval(args: EvalArgs) -> Result<()> {
    let gold = read_records(&args.gold, args.task, Role::Gold)?;
    let pred = read_records(&args.pred, args.task, Role::Prediction)?;
    if let Records::RetrievalGold(records) = &gold {
        let catalogued = catalogued_candidate_set_size(args.task, &args.dataset);
        if let (Some(first), Some(expected)) = (records.first(), catalogued) {
            let z = first.candidate_set_size();
            if z != expected {
                eprintln!(
                    "warning: {} candidate sets have {z} entries; {} is catalogued with {expected}",
                    args.dataset, args.dataset
                );
            }
        }
    }
    let options = EvalOptions {
        ks: args.ks,
        threshold: args.threshold,
        policy: if args.missing_as_wrong { JoinPolicy::MissingAsWrong } else { JoinPolicy::Strict },
    };
    let evaluation = evaluate_records(args.task, &args.dataset, gold, pred, &options)?;
    if evaluation.missing_predictions > 0 {
        eprintln!(
            "warning: {} gold records had no prediction and were scored as wrong",
            evaluation.missing_predictions
        );
    }
    emit(args.out.as_deref(), &evaluation.report.to_json())
}

fn run_ahp(args: AhpArgs) -> Result<()> {
    let matrix = match &args.matrix {
        Some(path) => PairwiseMatrix::load(path)?,
        None => ahp::canonical_matrix(),
    };
    let summary = ahp::analyze(&matrix, args.method)?;
    if !summary.consistency.consistent {
        eprintln!("warning: judgments are inconsistent (CR = {:.4})", summary.consistency.cr);
    }
    emit(args.out.as_deref(), &summary.to_json())
}

fn read_reports(dir: &Path) -> Result<Vec<MetricReport>> {
    MetricReport::read_dir(dir).with_context(|| format!("reading reports from {}", dir.display()))
}

fn run_vdscore(args: VdscoreArgs) -> Result<()> {
    let manifest = load_manifest(args.weights.manifest.as_deref())?;
    let weights = resolve_weights(&args.weights, &manifest)?;
    let reports = read_reports(&args.reports)?;
    let result = aggregate(&reports, &manifest, &weights)?;
    emit(args.out.as_deref(), &result.to_json())
}

fn add(args: AddArgs) -> Result<()> {
    let manifest = load_manifest(args.weights.manifest.as_deref())?;
    let weights = resolve_weights(&args.weights, &manifest)?;
    let reports = read_reports(&args.reports)?;
    let timestamp = args.timestamp.unwrap_or_else(Utc::now);
    let entry = LeaderboardEntry::build(args.name, timestamp, reports, &manifest, &weights)?;
    leaderboard::append(&args.store, &entry, &manifest)?;
    eprintln!("added {} (VDscore {:.1}) to {}", entry.model_name, entry.vdscore.value, args.store.display());
    Ok(())
}

fn show(args: ShowArgs) -> Result<()> {
    let options = RenderOptions { format: args.format, sort: args.sort, all: args.all };
    let table = leaderboard::render_store(&args.store, &options)?;
    emit(args.out.as_deref(), &table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => eval(args),
        Command::Ahp(args) => run_ahp(args),
        Command::Vdscore(args) => run_vdscore(args),
        Command::Leaderboard(LeaderboardCommand::Add(args)) => add(args),
        Command::Leaderboard(LeaderboardCommand::Show(args)) => show(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
