//! `hieval`: batch evaluation of hierarchical classifiers.
//!
//! Two subcommands: `evaluate` scores one model's predictions against ground
//! truth over a class taxonomy; `compare` scores several models side by side
//! and ranks them by a chosen metric. Exit codes: 0 on success, 2 on any
//! input problem (bad flags, unreadable or malformed files), 1 on internal
//! failures.

mod replay;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hieval::dataset::{
    self, evaluate_model, infer_kind, DatasetError, EvalOptions, EvaluationRun, PredictionMap,
    TruthMap,
};
use hieval::metrics::flat_metrics;
use hieval::taxonomy::{ProblemKind, Taxonomy};
use table::ModelRow;

#[derive(Parser)]
#[command(
    name = "hieval",
    version,
    about = "Hierarchical classification evaluation: confusion-matrix measures over tree and DAG taxonomies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one model's predictions against ground truth
    Evaluate(EvaluateArgs),
    /// Evaluate several models and rank them by a metric
    Compare(CompareArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Taxonomy file, one `parent<TAB>child` edge per line
    #[arg(long, value_name = "FILE")]
    taxonomy: PathBuf,
    /// Ground-truth file, `record<TAB>class1;class2;...`
    #[arg(long, value_name = "FILE")]
    truth: PathBuf,
    /// Prediction file, `record<TAB>path1;path2;...` with paths like `R>A>A1`
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Model name in the report (default: prediction file stem)
    #[arg(long, value_name = "NAME")]
    name: Option<String>,
    /// Weight of hierarchical precision in the hF score
    #[arg(long, value_name = "F", default_value_t = 1.0, value_parser = parse_beta)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    format: OutputFormat,
    /// Score truth records lacking a prediction as the bare-root path
    /// (pure false negatives) instead of skipping them
    #[arg(long)]
    missing_as_root: bool,
    /// Problem kind, e.g. `tree-spl-mlnp` or `dag-mpl-nmlnp`; `auto` infers
    /// the structure from the taxonomy, multi-path from multi-class records,
    /// and non-mandatory leaf depth from internal-node labels
    #[arg(long, value_name = "KIND", default_value = "auto", value_parser = parse_kind)]
    kind: KindChoice,
}

#[derive(Args)]
struct CompareArgs {
    /// Taxonomy file, one `parent<TAB>child` edge per line
    #[arg(long, value_name = "FILE", required_unless_present = "replay_counts")]
    taxonomy: Option<PathBuf>,
    /// Ground-truth file, `record<TAB>class1;class2;...`
    #[arg(long, value_name = "FILE", required_unless_present = "replay_counts")]
    truth: Option<PathBuf>,
    /// Model to evaluate, repeatable: `NAME=FILE`
    #[arg(long = "pred", value_name = "NAME=FILE", required_unless_present = "replay_counts")]
    preds: Vec<String>,
    /// Metric that orders the ranking (descending; undefined values last)
    #[arg(long, value_enum, value_name = "METRIC", default_value_t = RankMetric::Mcc)]
    rank_by: RankMetric,
    /// Weight of hierarchical precision in the hF score
    #[arg(long, value_name = "F", default_value_t = 1.0, value_parser = parse_beta)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    format: OutputFormat,
    /// Score truth records lacking a prediction as the bare-root path
    /// (pure false negatives) instead of skipping them
    #[arg(long)]
    missing_as_root: bool,
    /// Problem kind, e.g. `tree-spl-mlnp`; `auto` infers it from the inputs
    #[arg(long, value_name = "KIND", default_value = "auto", value_parser = parse_kind)]
    kind: KindChoice,
    /// Rank pre-computed confusion counts (`model<TAB>tp<TAB>tn<TAB>fp<TAB>fn`
    /// per line) instead of evaluating prediction files
    #[arg(
        long,
        value_name = "FILE",
        hide = true,
        conflicts_with_all = ["taxonomy", "truth", "preds", "missing_as_root", "kind"]
    )]
    replay_counts: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Tsv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RankMetric {
    Acc,
    Ppv,
    Tpr,
    Fnr,
    Fpr,
    Tnr,
    Pt,
    F1,
    Mcc,
    Hp,
    Hr,
    Hf,
}

impl RankMetric {
    fn column(self) -> &'static str {
        match self {
            RankMetric::Acc => "acc",
            RankMetric::Ppv => "ppv",
            RankMetric::Tpr => "tpr",
            RankMetric::Fnr => "fnr",
            RankMetric::Fpr => "fpr",
            RankMetric::Tnr => "tnr",
            RankMetric::Pt => "pt",
            RankMetric::F1 => "f1",
            RankMetric::Mcc => "mcc",
            RankMetric::Hp => "hp",
            RankMetric::Hr => "hr",
            RankMetric::Hf => "hf",
        }
    }
}

#[derive(Clone)]
enum KindChoice {
    Auto,
    Explicit(ProblemKind),
}

fn parse_kind(s: &str) -> Result<KindChoice, String> {
    if s == "auto" {
        Ok(KindChoice::Auto)
    } else {
        s.parse().map(KindChoice::Explicit)
    }
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let beta: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if beta.is_finite() && beta > 0.0 {
        Ok(beta)
    } else {
        Err(format!("beta must be a positive number, got {s}"))
    }
}

enum AppError {
    /// Problems the user can fix: flags, files, formats. Exit code 2.
    Input(String),
    /// Everything else. Exit code 1.
    Internal(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
    }
    .and_then(|output| {
        use std::io::Write;
        std::io::stdout()
            .write_all(output.as_bytes())
            .map_err(|e| AppError::Internal(format!("writing output: {e}")))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(AppError::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(1)
        }
    }
}

fn read_input(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn dataset_error(path: &Path, err: DatasetError) -> AppError {
    AppError::Input(format!("{}: {err}", path.display()))
}

fn load_taxonomy(path: &Path) -> Result<Taxonomy, AppError> {
    let text = read_input(path)?;
    let taxonomy = dataset::parse_taxonomy_file(&text).map_err(|e| dataset_error(path, e))?;
    for warning in taxonomy.warnings() {
        eprintln!("warning: {}: {warning}", path.display());
    }
    Ok(taxonomy)
}

fn load_inputs(
    taxonomy_path: &Path,
    truth_path: &Path,
) -> Result<(Taxonomy, TruthMap), AppError> {
    let taxonomy = load_taxonomy(taxonomy_path)?;
    let truth_text = read_input(truth_path)?;
    let truth = dataset::parse_truth_file(&truth_text, &taxonomy)
        .map_err(|e| dataset_error(truth_path, e))?;
    Ok((taxonomy, truth))
}

fn load_predictions(path: &Path, taxonomy: &Taxonomy) -> Result<PredictionMap, AppError> {
    let text = read_input(path)?;
    dataset::parse_prediction_file(&text, taxonomy).map_err(|e| dataset_error(path, e))
}

fn resolve_kind(
    choice: &KindChoice,
    taxonomy: &Taxonomy,
    truth: &TruthMap,
    preds: &PredictionMap,
) -> ProblemKind {
    match choice {
        KindChoice::Auto => infer_kind(taxonomy, truth, preds),
        KindChoice::Explicit(kind) => *kind,
    }
}

fn warn_skipped(run: &EvaluationRun) {
    if run.skipped.is_empty() {
        return;
    }
    let mut parts: Vec<String> = run
        .skipped
        .iter()
        .take(5)
        .map(|(id, reason)| format!("{id} ({reason})"))
        .collect();
    if run.skipped.len() > 5 {
        parts.push(format!("... and {} more", run.skipped.len() - 5));
    }
    eprintln!(
        "warning: {}: skipped {} record(s): {}",
        run.model_name,
        run.skipped.len(),
        parts.join(", ")
    );
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<String, AppError> {
    let (taxonomy, truth) = load_inputs(&args.taxonomy, &args.truth)?;
    let preds = load_predictions(&args.pred, &taxonomy)?;
    let kind = resolve_kind(&args.kind, &taxonomy, &truth, &preds);
    let name = args.name.clone().unwrap_or_else(|| {
        args.pred
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string())
    });
    let options = EvalOptions {
        kind,
        beta: args.beta,
        missing_as_root: args.missing_as_root,
    };
    let run = evaluate_model(&taxonomy, &name, &truth, &preds, &options)
        .map_err(|e| dataset_error(&args.pred, e))?;
    warn_skipped(&run);
    let row = ModelRow {
        name: run.model_name,
        confusion: run.confusion,
        report: run.report,
    };
    Ok(match args.format {
        OutputFormat::Tsv => table::evaluate_tsv(&row),
        OutputFormat::Json => table::evaluate_json(&row),
    })
}

fn parse_model_spec(spec: &str) -> Result<(String, PathBuf), AppError> {
    match spec.split_once('=') {
        Some((name, file)) if !name.is_empty() && !file.is_empty() => {
            Ok((name.to_string(), PathBuf::from(file)))
        }
        _ => Err(AppError::Input(format!(
            "--pred expects NAME=FILE, got '{spec}'"
        ))),
    }
}

fn cmd_compare(args: CompareArgs) -> Result<String, AppError> {
    let rows = if let Some(replay_path) = &args.replay_counts {
        let text = read_input(replay_path)?;
        let counts = replay::parse_replay_file(&text)
            .map_err(|e| AppError::Input(format!("{}: {e}", replay_path.display())))?;
        counts
            .into_iter()
            .map(|(name, confusion)| ModelRow {
                name,
                confusion,
                report: flat_metrics(confusion),
            })
            .collect()
    } else {
        let models = args
            .preds
            .iter()
            .map(|spec| parse_model_spec(spec))
            .collect::<Result<Vec<_>, _>>()?;
        let mut names = std::collections::HashSet::new();
        for (name, _) in &models {
            if !names.insert(name.clone()) {
                return Err(AppError::Input(format!("duplicate model name '{name}'")));
            }
        }
        let taxonomy_path = args.taxonomy.as_ref().expect("clap enforces presence");
        let truth_path = args.truth.as_ref().expect("clap enforces presence");
        let (taxonomy, truth) = load_inputs(taxonomy_path, truth_path)?;

        let mut rows = Vec::with_capacity(models.len());
        for (name, pred_path) in &models {
            let preds = load_predictions(pred_path, &taxonomy)?;
            let kind = resolve_kind(&args.kind, &taxonomy, &truth, &preds);
            let options = EvalOptions {
                kind,
                beta: args.beta,
                missing_as_root: args.missing_as_root,
            };
            let run = evaluate_model(&taxonomy, name, &truth, &preds, &options)
                .map_err(|e| dataset_error(pred_path, e))?;
            warn_skipped(&run);
            rows.push(ModelRow {
                name: run.model_name,
                confusion: run.confusion,
                report: run.report,
            });
        }
        rows
    };

    let ranked = table::rank_rows(rows, args.rank_by.column());
    Ok(match args.format {
        OutputFormat::Tsv => table::compare_tsv(&ranked),
        OutputFormat::Json => table::compare_json(&ranked),
    })
}
