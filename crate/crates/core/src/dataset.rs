//! Text file formats and whole-dataset model evaluation.
//!
//! Three tab-separated formats, all UTF-8 with `#`-prefixed comment lines
//! and blank lines ignored, CRLF tolerated:
//!
//! - **Taxonomy**: one `parent<TAB>child` edge per line. Labels may not
//!   contain whitespace, `>`, or `;`.
//! - **Ground truth**: `record_id<TAB>class1;class2;...`, the true classes
//!   of one record. True paths are derived from the taxonomy, so classes
//!   (not paths) are listed.
//! - **Predictions**: `record_id<TAB>path1;path2;...` where each path is
//!   `R>A>A1` (classes joined by `>`, starting at the root). On tree
//!   taxonomies a bare class id is accepted per path slot and expanded to
//!   its unique root path; DAG taxonomies require full paths since the route
//!   matters.
//!
//! Record ids must be unique per file. All parse errors carry 1-based line
//! numbers. [`evaluate_model`] joins the two maps, scores every record
//! present in both (optionally treating missing predictions as the bare-root
//! abstention path), and aggregates into an [`EvaluationRun`].

use indexmap::IndexMap;
use thiserror::Error;

use crate::confusion::{
    aggregate, confuse_record, select_best_true_path, ConfusionError, GroundTruth,
    HierarchicalConfusion, PredictionSet,
};
use crate::metrics::{flat_metrics, hierarchical_prf, MetricReport, MetricsError};
use crate::taxonomy::{
    AllocationPath, DepthMode, PathMode, ProblemKind, Taxonomy, TaxonomyError, TaxonomyKind,
};

/// Identifier of one record; non-empty, tab-free, unique within a file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordId(String);

impl RecordId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for RecordId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RecordId {
    fn from(s: &str) -> Self {
        RecordId(s.to_string())
    }
}

/// Ground truth per record, in file order.
pub type TruthMap = IndexMap<RecordId, GroundTruth>;
/// Predictions per record, in file order.
pub type PredictionMap = IndexMap<RecordId, PredictionSet>;

/// Errors from parsing the text formats or evaluating a dataset.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown class '{class}' for record '{record}'")]
    UnknownClass {
        line: usize,
        record: String,
        class: String,
    },
    #[error("line {line}: duplicate record '{record}'")]
    DuplicateRecord { line: usize, record: String },
    #[error("line {line}: class '{class}' listed twice for record '{record}'")]
    DuplicateClassInRecord {
        line: usize,
        record: String,
        class: String,
    },
    #[error("line {line}: invalid path for record '{record}': {reason}")]
    InvalidPath {
        line: usize,
        record: String,
        reason: String,
    },
    #[error("no record is present in both the truth and prediction files")]
    EmptyIntersection,
    #[error("problem kind declares a {expected} structure but the taxonomy is a {actual}")]
    StructureMismatch {
        expected: TaxonomyKind,
        actual: TaxonomyKind,
    },
    #[error("record '{record}' violates the {kind} problem kind: {reason}")]
    KindViolation {
        record: String,
        kind: ProblemKind,
        reason: String,
    },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Confusion(#[from] ConfusionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl DatasetError {
    /// 1-based line number for parse errors, `None` for dataset-level ones.
    pub fn line(&self) -> Option<usize> {
        match self {
            DatasetError::MalformedLine { line, .. }
            | DatasetError::UnknownClass { line, .. }
            | DatasetError::DuplicateRecord { line, .. }
            | DatasetError::DuplicateClassInRecord { line, .. }
            | DatasetError::InvalidPath { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Yields `(1-based line number, payload)` for every non-blank, non-comment
/// line, with any trailing `\r` stripped.
fn payload_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

fn split_record_line(line_no: usize, line: &str) -> Result<(&str, &str), DatasetError> {
    let Some((id, rest)) = line.split_once('\t') else {
        return Err(DatasetError::MalformedLine {
            line: line_no,
            reason: format!("expected two tab-separated fields, got {line:?}"),
        });
    };
    if id.is_empty() {
        return Err(DatasetError::MalformedLine {
            line: line_no,
            reason: "record id is empty".into(),
        });
    }
    if rest.is_empty() {
        return Err(DatasetError::MalformedLine {
            line: line_no,
            reason: format!("record '{id}' has an empty value field"),
        });
    }
    if rest.contains('\t') {
        return Err(DatasetError::MalformedLine {
            line: line_no,
            reason: format!("record '{id}' has more than two tab-separated fields"),
        });
    }
    Ok((id, rest))
}

/// Parses the `parent<TAB>child` edge format and builds the taxonomy.
pub fn parse_taxonomy_file(text: &str) -> Result<Taxonomy, DatasetError> {
    let mut edges: Vec<(&str, &str)> = Vec::new();
    for (line_no, line) in payload_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        let [parent, child] = fields.as_slice() else {
            return Err(DatasetError::MalformedLine {
                line: line_no,
                reason: format!(
                    "expected 'parent<TAB>child', got {} field(s) in {line:?}",
                    fields.len()
                ),
            });
        };
        edges.push((parent, child));
    }
    Ok(Taxonomy::from_edges(edges, None)?)
}

/// Parses the `record_id<TAB>class1;class2;...` ground-truth format.
pub fn parse_truth_file(text: &str, taxonomy: &Taxonomy) -> Result<TruthMap, DatasetError> {
    let mut map = TruthMap::new();
    for (line_no, line) in payload_lines(text) {
        let (id, classes_field) = split_record_line(line_no, line)?;
        let mut classes = Vec::new();
        for class in classes_field.split(';') {
            if class.is_empty() {
                return Err(DatasetError::MalformedLine {
                    line: line_no,
                    reason: format!("record '{id}' has an empty class entry"),
                });
            }
            let node = taxonomy
                .resolve(class)
                .map_err(|_| DatasetError::UnknownClass {
                    line: line_no,
                    record: id.to_string(),
                    class: class.to_string(),
                })?;
            if classes.contains(&node) {
                return Err(DatasetError::DuplicateClassInRecord {
                    line: line_no,
                    record: id.to_string(),
                    class: class.to_string(),
                });
            }
            classes.push(node);
        }
        let truth = GroundTruth::new(classes)?;
        if map.insert(RecordId::from(id), truth).is_some() {
            return Err(DatasetError::DuplicateRecord {
                line: line_no,
                record: id.to_string(),
            });
        }
    }
    Ok(map)
}

/// Parses the `record_id<TAB>path1;path2;...` prediction format.
pub fn parse_prediction_file(
    text: &str,
    taxonomy: &Taxonomy,
) -> Result<PredictionMap, DatasetError> {
    let mut map = PredictionMap::new();
    for (line_no, line) in payload_lines(text) {
        let (id, paths_field) = split_record_line(line_no, line)?;
        let mut paths = Vec::new();
        for entry in paths_field.split(';') {
            if entry.is_empty() {
                return Err(DatasetError::MalformedLine {
                    line: line_no,
                    reason: format!("record '{id}' has an empty path entry"),
                });
            }
            paths.push(parse_path_entry(taxonomy, entry).map_err(|reason| {
                DatasetError::InvalidPath {
                    line: line_no,
                    record: id.to_string(),
                    reason,
                }
            })?);
        }
        let preds = PredictionSet::new(paths)?;
        if map.insert(RecordId::from(id), preds).is_some() {
            return Err(DatasetError::DuplicateRecord {
                line: line_no,
                record: id.to_string(),
            });
        }
    }
    Ok(map)
}

fn parse_path_entry(taxonomy: &Taxonomy, entry: &str) -> Result<AllocationPath, String> {
    if entry.contains('>') {
        let labels: Vec<&str> = entry.split('>').collect();
        return taxonomy.path(&labels).map_err(|e| e.to_string());
    }
    // A bare class id: valid as-is only for the root; on trees it expands to
    // the unique root path.
    if entry == taxonomy.label(taxonomy.root()) {
        return taxonomy.path(&[entry]).map_err(|e| e.to_string());
    }
    match taxonomy.kind() {
        TaxonomyKind::Tree => {
            let class = taxonomy
                .resolve(entry)
                .map_err(|_| format!("unknown class '{entry}'"))?;
            let mut paths = taxonomy.true_paths(class);
            debug_assert_eq!(paths.len(), 1, "tree paths are unique");
            Ok(paths.remove(0))
        }
        TaxonomyKind::Dag => Err(format!(
            "bare class '{entry}' is ambiguous in a DAG taxonomy; spell out the full path"
        )),
    }
}

/// Renders a prediction map back to its file format; parsing the result
/// yields an identical map.
pub fn render_prediction_file(taxonomy: &Taxonomy, preds: &PredictionMap) -> String {
    let mut out = String::new();
    for (id, set) in preds {
        out.push_str(id.as_str());
        out.push('\t');
        let rendered: Vec<String> = set
            .paths()
            .iter()
            .map(|p| taxonomy.path_string(p))
            .collect();
        out.push_str(&rendered.join(";"));
        out.push('\n');
    }
    out
}

/// Why a record was left out of the sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// The record has ground truth but no prediction.
    MissingPrediction,
    /// The record was predicted but has no ground truth.
    MissingTruth,
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::MissingPrediction => write!(f, "missing prediction"),
            SkipReason::MissingTruth => write!(f, "missing truth"),
        }
    }
}

/// Evaluation options beyond the input maps themselves.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub kind: ProblemKind,
    /// hP weight in the hF score.
    pub beta: f64,
    /// Score truth records lacking a prediction as the bare-root abstention
    /// path `[R]` (pure false negatives) instead of skipping them.
    pub missing_as_root: bool,
}

/// One model evaluated over one dataset: aggregated confusion matrix, the
/// full metric report, and bookkeeping about which records contributed.
#[derive(Debug, Clone)]
pub struct EvaluationRun {
    pub model_name: String,
    pub confusion: HierarchicalConfusion,
    pub report: MetricReport,
    /// Records included in the sums.
    pub record_count: usize,
    /// Records excluded from the sums, in input order (truth file first,
    /// then prediction-only records).
    pub skipped: Vec<(RecordId, SkipReason)>,
}

/// Infers the problem kind from the taxonomy and the parsed inputs:
/// multi-path when any record lists several classes or paths, non-mandatory
/// leaf depth when any class or predicted path end is an internal node.
pub fn infer_kind(taxonomy: &Taxonomy, truth: &TruthMap, preds: &PredictionMap) -> ProblemKind {
    let multi = truth.values().any(|t| t.len() > 1) || preds.values().any(|p| p.len() > 1);
    let internal = truth
        .values()
        .flat_map(|t| t.classes().iter())
        .any(|&c| !taxonomy.is_leaf(c))
        || preds
            .values()
            .flat_map(|p| p.paths().iter())
            .any(|path| !taxonomy.is_leaf(path.leaf()));
    ProblemKind {
        structure: taxonomy.kind(),
        paths: if multi {
            PathMode::MultiPath
        } else {
            PathMode::SinglePath
        },
        depth: if internal {
            DepthMode::NonMandatoryLeaf
        } else {
            DepthMode::MandatoryLeaf
        },
    }
}

fn validate_against_kind(
    taxonomy: &Taxonomy,
    truth: &TruthMap,
    preds: &PredictionMap,
    kind: ProblemKind,
) -> Result<(), DatasetError> {
    if kind.structure != taxonomy.kind() {
        return Err(DatasetError::StructureMismatch {
            expected: kind.structure,
            actual: taxonomy.kind(),
        });
    }
    let violation = |record: &RecordId, reason: String| DatasetError::KindViolation {
        record: record.to_string(),
        kind,
        reason,
    };
    for (id, t) in truth {
        if kind.paths == PathMode::SinglePath && t.len() != 1 {
            return Err(violation(
                id,
                format!("single-path problems allow one true class, found {}", t.len()),
            ));
        }
        if kind.depth == DepthMode::MandatoryLeaf {
            if let Some(&c) = t.classes().iter().find(|&&c| !taxonomy.is_leaf(c)) {
                return Err(violation(
                    id,
                    format!(
                        "mandatory-leaf problems require leaf classes, '{}' is internal",
                        taxonomy.label(c)
                    ),
                ));
            }
        }
    }
    for (id, p) in preds {
        if kind.paths == PathMode::SinglePath && p.len() != 1 {
            return Err(violation(
                id,
                format!(
                    "single-path problems allow one predicted path, found {}",
                    p.len()
                ),
            ));
        }
        if kind.depth == DepthMode::MandatoryLeaf {
            if let Some(path) = p.paths().iter().find(|path| !taxonomy.is_leaf(path.leaf())) {
                return Err(violation(
                    id,
                    format!(
                        "mandatory-leaf problems require paths ending at a leaf, '{}' is internal",
                        taxonomy.label(path.leaf())
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Scores `preds` against `truth` record by record and aggregates.
///
/// Every truth record with a prediction is scored with [`confuse_record`].
/// Truth records without a prediction are skipped and reported, or scored
/// as the bare-root path when `missing_as_root` is set. Predictions without
/// truth are skipped and reported. For single-path runs the report also
/// carries hP/hR/hF over the benevolently selected true paths.
pub fn evaluate_model(
    taxonomy: &Taxonomy,
    model_name: &str,
    truth: &TruthMap,
    preds: &PredictionMap,
    options: &EvalOptions,
) -> Result<EvaluationRun, DatasetError> {
    validate_against_kind(taxonomy, truth, preds, options.kind)?;

    let root_path = taxonomy
        .path_from_ids(vec![taxonomy.root()])
        .expect("the bare root is a valid path");
    let abstention = PredictionSet::new(vec![root_path]).expect("non-empty");

    let mut per_record: Vec<HierarchicalConfusion> = Vec::new();
    let mut prf_pairs: Vec<(AllocationPath, AllocationPath)> = Vec::new();
    let mut skipped: Vec<(RecordId, SkipReason)> = Vec::new();

    for (id, record_truth) in truth {
        let record_preds = match preds.get(id) {
            Some(p) => p,
            None if options.missing_as_root => &abstention,
            None => {
                skipped.push((id.clone(), SkipReason::MissingPrediction));
                continue;
            }
        };
        per_record.push(confuse_record(taxonomy, record_truth, record_preds));
        if options.kind.paths == PathMode::SinglePath {
            // One class, one path: pair the prediction with the true path it
            // resembles most, mirroring the benevolent selection above.
            let class = record_truth.classes()[0];
            let candidates = taxonomy.true_paths(class);
            let pred_path = &record_preds.paths()[0];
            let best = select_best_true_path(taxonomy, &candidates, pred_path)
                .expect("every class has at least one root path");
            prf_pairs.push((best.clone(), pred_path.clone()));
        }
    }
    for id in preds.keys() {
        if !truth.contains_key(id) {
            skipped.push((id.clone(), SkipReason::MissingTruth));
        }
    }

    if per_record.is_empty() {
        return Err(DatasetError::EmptyIntersection);
    }

    let confusion = aggregate(per_record.iter().copied());
    let mut report = flat_metrics(confusion);
    report.beta = options.beta;
    if options.kind.paths == PathMode::SinglePath {
        let prf = hierarchical_prf(prf_pairs.iter().map(|(t, p)| (t, p)), options.beta)?;
        report = report.with_hierarchical(prf, options.beta);
    }

    Ok(EvaluationRun {
        model_name: model_name.to_string(),
        confusion,
        report,
        record_count: per_record.len(),
        skipped,
    })
}
