//! Per-record hierarchical confusion counts and dataset aggregation.
//!
//! One record pairs a set of true classes with a set of predicted allocation
//! paths. Counting over path nodes instead of flat class indicators gives the
//! four familiar confusion counts a hierarchical meaning:
//!
//! - `TP`: nodes the predicted path labels positively and correctly, i.e.
//!   the intersection of predicted and true path, root excluded.
//! - `TN`: nodes correctly labelled negatively: siblings of nodes on the
//!   common path, plus descendants of the common path's last node that
//!   neither path claims, counted as one deduplicated set.
//! - `FP`: predicted-path nodes that are not on the true path.
//! - `FN`: true-path nodes the prediction missed.
//!
//! [`confuse_spl_tree`] scores one true path against one predicted path.
//! [`confuse_spl`] extends this to DAGs by benevolently choosing, among the
//! alternative true paths, the one sharing the longest common path with the
//! prediction. [`confuse_record`] generalizes to any number of true classes
//! and predictions (multi-path labels, non-mandatory leaf prediction) and is
//! the single entry point the dataset layer uses; on single-path input it
//! agrees exactly with the two specializations. Records are independent:
//! per-record matrices [`aggregate`] by component-wise addition in any order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use thiserror::Error;

use crate::taxonomy::{common_path, common_path_len, AllocationPath, NodeId, Taxonomy};

/// The four counts of a hierarchical confusion matrix.
///
/// Addition is component-wise, commutative, and associative, so per-record
/// matrices can be summed in any order (and in parallel) to form the
/// dataset-level matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct HierarchicalConfusion {
    pub true_positives: u64,
    pub true_negatives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl HierarchicalConfusion {
    pub const ZERO: HierarchicalConfusion = HierarchicalConfusion {
        true_positives: 0,
        true_negatives: 0,
        false_positives: 0,
        false_negatives: 0,
    };

    /// Counts in `(tp, tn, fp, fn)` order.
    pub const fn new(tp: u64, tn: u64, fp: u64, fn_count: u64) -> Self {
        HierarchicalConfusion {
            true_positives: tp,
            true_negatives: tn,
            false_positives: fp,
            false_negatives: fn_count,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

impl Add for HierarchicalConfusion {
    type Output = HierarchicalConfusion;

    fn add(self, rhs: HierarchicalConfusion) -> HierarchicalConfusion {
        HierarchicalConfusion {
            true_positives: self.true_positives + rhs.true_positives,
            true_negatives: self.true_negatives + rhs.true_negatives,
            false_positives: self.false_positives + rhs.false_positives,
            false_negatives: self.false_negatives + rhs.false_negatives,
        }
    }
}

impl AddAssign for HierarchicalConfusion {
    fn add_assign(&mut self, rhs: HierarchicalConfusion) {
        *self = *self + rhs;
    }
}

impl Sum for HierarchicalConfusion {
    fn sum<I: Iterator<Item = HierarchicalConfusion>>(iter: I) -> HierarchicalConfusion {
        iter.fold(HierarchicalConfusion::ZERO, Add::add)
    }
}

/// Errors raised when confusion inputs violate their non-emptiness contracts.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfusionError {
    #[error("ground truth must contain at least one class")]
    EmptyTruth,
    #[error("prediction set must contain at least one path")]
    EmptyPredictions,
    #[error("set of true allocation paths must not be empty")]
    EmptyTruePaths,
}

/// The true classes of one record (`C{o}`); a non-empty set.
///
/// Single-path problems carry exactly one class. Classes may be internal
/// nodes for non-mandatory-leaf problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    classes: Vec<NodeId>,
}

impl GroundTruth {
    /// Deduplicates and sorts the given classes; errors when empty.
    pub fn new(classes: impl IntoIterator<Item = NodeId>) -> Result<Self, ConfusionError> {
        let set: BTreeSet<NodeId> = classes.into_iter().collect();
        if set.is_empty() {
            return Err(ConfusionError::EmptyTruth);
        }
        Ok(GroundTruth {
            classes: set.into_iter().collect(),
        })
    }

    pub fn classes(&self) -> &[NodeId] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The predicted allocation paths of one record (`P`), in prediction order;
/// non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    paths: Vec<AllocationPath>,
}

impl PredictionSet {
    pub fn new(paths: Vec<AllocationPath>) -> Result<Self, ConfusionError> {
        if paths.is_empty() {
            return Err(ConfusionError::EmptyPredictions);
        }
        Ok(PredictionSet { paths })
    }

    pub fn paths(&self) -> &[AllocationPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Confusion counts for one true path against one predicted path
/// (tree-structured, single-path case; also the per-pair kernel of every
/// generalized case).
///
/// Both paths must belong to `taxonomy`. The two true-negative terms
/// (siblings of common-path nodes not on the true path, and unclaimed
/// descendants of the common path's last node) are unioned before counting,
/// so a node appearing in both contributes once.
pub fn confuse_spl_tree(
    taxonomy: &Taxonomy,
    true_path: &AllocationPath,
    pred_path: &AllocationPath,
) -> HierarchicalConfusion {
    let truth_set = true_path.node_set();
    let pred_set = pred_path.node_set();
    let root = taxonomy.root();

    let tp = pred_set
        .intersection(&truth_set)
        .filter(|&&n| n != root)
        .count() as u64;
    let fp = pred_set.difference(&truth_set).count() as u64;
    let fn_count = truth_set.difference(&pred_set).count() as u64;

    let common = common_path(pred_path, true_path);
    let mut tn_set: BTreeSet<NodeId> = BTreeSet::new();
    for &on_common in common.nodes() {
        for &sibling in taxonomy.neighbors(on_common) {
            if !truth_set.contains(&sibling) {
                tn_set.insert(sibling);
            }
        }
    }
    for &below in taxonomy.descendants(common.leaf()) {
        if !truth_set.contains(&below) && !pred_set.contains(&below) {
            tn_set.insert(below);
        }
    }

    HierarchicalConfusion::new(tp, tn_set.len() as u64, fp, fn_count)
}

/// Picks the true path sharing the longest common path with `pred_path`;
/// ties resolve to the lexicographically smallest label sequence. `None`
/// only for an empty candidate list.
pub fn select_best_true_path<'a>(
    taxonomy: &Taxonomy,
    candidates: &'a [AllocationPath],
    pred_path: &AllocationPath,
) -> Option<&'a AllocationPath> {
    let mut best: Option<(usize, &AllocationPath)> = None;
    for candidate in candidates {
        let len = common_path_len(candidate, pred_path);
        let better = match best {
            None => true,
            Some((best_len, best_path)) => {
                len > best_len
                    || (len == best_len
                        && taxonomy.compare_paths(candidate, best_path) == Ordering::Less)
            }
        };
        if better {
            best = Some((len, candidate));
        }
    }
    best.map(|(_, path)| path)
}

/// Single-path confusion on trees *and* DAGs: benevolently selects the
/// member of `true_paths` that resembles the prediction most (longest common
/// path), then scores it with [`confuse_spl_tree`].
pub fn confuse_spl(
    taxonomy: &Taxonomy,
    true_paths: &[AllocationPath],
    pred_path: &AllocationPath,
) -> Result<HierarchicalConfusion, ConfusionError> {
    let best = select_best_true_path(taxonomy, true_paths, pred_path)
        .ok_or(ConfusionError::EmptyTruePaths)?;
    Ok(confuse_spl_tree(taxonomy, best, pred_path))
}

/// Generalized hierarchical confusion for one record: any taxonomy
/// structure, any number of true classes and predicted paths, labels at any
/// depth.
///
/// The procedure decomposes the record into single-path scorings:
///
/// 1. For every prediction, compute `m` = the longest common path achievable
///    against *any* true class's paths (measured once, against the full
///    truth set).
/// 2. Process predictions in descending `m`; equal `m` keeps prediction
///    order.
/// 3. Each prediction re-selects the best (class, path) pair among the
///    *still unmatched* classes, is scored with [`confuse_spl_tree`], and
///    retires that class. Ties pick the lexicographically smallest true-path
///    label sequence, then the smallest class label. Once every class is
///    matched, surplus predictions count entirely as false positives
///    (`|path| - 1` nodes, root exempt).
/// 4. Every class left unmatched adds its shortest path length (root exempt)
///    as false negatives.
///
/// On records with one true class and one prediction this equals
/// [`confuse_spl`] (and [`confuse_spl_tree`] on trees).
pub fn confuse_record(
    taxonomy: &Taxonomy,
    truth: &GroundTruth,
    preds: &PredictionSet,
) -> HierarchicalConfusion {
    // Unmatched classes with their true path sets, ordered by class label so
    // scan order realizes the final tie-break.
    let mut remaining: Vec<(NodeId, Vec<AllocationPath>)> = truth
        .classes()
        .iter()
        .map(|&class| (class, taxonomy.true_paths(class)))
        .collect();
    remaining.sort_by(|a, b| taxonomy.label(a.0).cmp(taxonomy.label(b.0)));

    // Steps 1-2: m values against the full truth set.
    let mut order: Vec<(usize, usize)> = preds
        .paths()
        .iter()
        .enumerate()
        .map(|(k, pred)| {
            let m = remaining
                .iter()
                .flat_map(|(_, paths)| paths.iter())
                .map(|candidate| common_path_len(candidate, pred))
                .max()
                .expect("every class has at least one root path");
            (k, m)
        })
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut total = HierarchicalConfusion::ZERO;
    for (k, _) in order {
        let pred = &preds.paths()[k];
        if remaining.is_empty() {
            // Step 3.1: more predictions than true classes.
            total.false_positives += (pred.len() - 1) as u64;
            continue;
        }
        // Step 3.2: best remaining (class, path) pair.
        let mut best: Option<(usize, usize, usize)> = None; // (class idx, path idx, common len)
        for (ci, (_, paths)) in remaining.iter().enumerate() {
            for (pi, candidate) in paths.iter().enumerate() {
                let len = common_path_len(candidate, pred);
                let better = match best {
                    None => true,
                    Some((bci, bpi, blen)) => {
                        len > blen
                            || (len == blen
                                && taxonomy.compare_paths(candidate, &remaining[bci].1[bpi])
                                    == Ordering::Less)
                    }
                };
                if better {
                    best = Some((ci, pi, len));
                }
            }
        }
        let (ci, pi, _) = best.expect("remaining is non-empty");
        total += confuse_spl_tree(taxonomy, &remaining[ci].1[pi], pred);
        remaining.remove(ci); // Step 3.4
    }

    // Step 4: unmatched classes count their shortest path as false negatives.
    for (_, paths) in &remaining {
        let shortest = paths
            .iter()
            .map(|p| p.len() - 1)
            .min()
            .expect("every class has at least one root path");
        total.false_negatives += shortest as u64;
    }
    total
}

/// Component-wise sum over a dataset; the empty stream yields the all-zero
/// matrix.
pub fn aggregate<I>(records: I) -> HierarchicalConfusion
where
    I: IntoIterator<Item = HierarchicalConfusion>,
{
    records.into_iter().sum()
}
