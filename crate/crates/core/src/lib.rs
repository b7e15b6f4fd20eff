//! Evaluation toolkit for hierarchical classification problems.
//!
//! Classical confusion-matrix measures assume flat binary decisions. When the
//! label space is a rooted tree or DAG of classes, a prediction is an
//! *allocation path* from the root to the assigned class, and counting hits
//! and misses per path node yields a hierarchical confusion matrix: the four
//! counts `TP`/`TN`/`FP`/`FN` are derived from path-level decisions instead of
//! per-class indicators. Per-record matrices sum component-wise over a data
//! set, and all the usual binary measures (accuracy, precision, recall, F1,
//! MCC, ...) apply unchanged.
//!
//! The crate is organized along the evaluation pipeline:
//!
//! - [`taxonomy`]: the class hierarchy (tree or DAG) and path-level set
//!   queries: ancestors, descendants, siblings, root-to-class paths, and the
//!   longest common path.
//! - [`confusion`]: per-record hierarchical confusion counts for single- and
//!   multi-path labellings, mandatory and non-mandatory leaf prediction, and
//!   dataset aggregation.
//! - [`metrics`]: flat binary measures over a confusion matrix, plus
//!   hierarchical precision/recall/F for single-path problems.
//! - [`dataset`]: text file formats for taxonomies, ground truth, and
//!   predictions, and whole-dataset model evaluation.
//!
//! ```
//! use hieval::taxonomy::Taxonomy;
//! use hieval::confusion::{confuse_record, GroundTruth, PredictionSet};
//! use hieval::metrics::flat_metrics;
//!
//! let t = Taxonomy::from_edges(
//!     [("R", "A"), ("R", "B"), ("A", "A1"), ("A", "A2")],
//!     None,
//! )?;
//! let truth = GroundTruth::new(vec![t.resolve("A1")?])?;
//! let preds = PredictionSet::new(vec![t.path(&["R", "A", "A2"])?])?;
//! let confusion = confuse_record(&t, &truth, &preds);
//! assert_eq!(confusion.false_positives, 1);
//! let report = flat_metrics(confusion);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod confusion;
pub mod dataset;
pub mod metrics;
pub mod taxonomy;

pub use confusion::{confuse_record, HierarchicalConfusion};
pub use metrics::{flat_metrics, MetricReport, MetricValue};
pub use taxonomy::{AllocationPath, NodeId, ProblemKind, Taxonomy};
