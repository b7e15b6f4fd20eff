//! Flat binary measures over a hierarchical confusion matrix, plus
//! hierarchical precision/recall/F for single-path problems.
//!
//! Every measure that divides by a count sum can hit a zero denominator; the
//! result is then [`MetricValue::Undefined`] carrying the cause, never a
//! silent zero or an error. Undefined values render as `n/a` and rank below
//! any defined value.
//!
//! One deliberate deviation from the usual printed tables: the false
//! negative rate is computed as `FN / (FN + TP)` (the complement of recall),
//! keeping `TPR + FNR = 1`; tables that print `FP` in that numerator carry a
//! typo.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::confusion::HierarchicalConfusion;
use crate::taxonomy::AllocationPath;

/// Why a metric could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UndefinedReason {
    /// The named denominator evaluated to zero.
    ZeroDenominator(&'static str),
    /// The metric does not apply to this run (e.g. path-based
    /// precision/recall on a multi-path problem).
    NotApplicable,
}

impl fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UndefinedReason::ZeroDenominator(which) => write!(f, "{which} = 0"),
            UndefinedReason::NotApplicable => write!(f, "not applicable"),
        }
    }
}

/// A metric outcome: a finite ratio, or undefined with its cause.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Defined(f64),
    Undefined(UndefinedReason),
}

impl MetricValue {
    fn defined(value: f64) -> Self {
        debug_assert!(value.is_finite());
        MetricValue::Defined(value)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(*v),
            MetricValue::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, MetricValue::Defined(_))
    }

    /// Ranking order: larger defined values first, undefined values last
    /// (mutually equal, regardless of cause).
    pub fn ranking_cmp(&self, other: &MetricValue) -> Ordering {
        match (self, other) {
            (MetricValue::Defined(a), MetricValue::Defined(b)) => {
                a.partial_cmp(b).unwrap_or(Ordering::Equal)
            }
            (MetricValue::Defined(_), MetricValue::Undefined(_)) => Ordering::Greater,
            (MetricValue::Undefined(_), MetricValue::Defined(_)) => Ordering::Less,
            (MetricValue::Undefined(_), MetricValue::Undefined(_)) => Ordering::Equal,
        }
    }

    /// Two-decimal percentage with half-up (away from zero) rounding, e.g.
    /// `87.41%` or `-95.58%`; undefined values render as `n/a`.
    pub fn percent_string(&self) -> String {
        match self {
            MetricValue::Defined(v) => {
                let scaled = v * 10_000.0; // hundredths of a percent
                let hundredths = if scaled >= 0.0 {
                    (scaled + 0.5).floor()
                } else {
                    (scaled - 0.5).ceil()
                } as i64;
                let sign = if hundredths < 0 { "-" } else { "" };
                let magnitude = hundredths.abs();
                format!("{sign}{}.{:02}%", magnitude / 100, magnitude % 100)
            }
            MetricValue::Undefined(_) => "n/a".to_string(),
        }
    }
}

fn ratio(numerator: f64, denominator: f64, which: &'static str) -> MetricValue {
    if denominator == 0.0 {
        MetricValue::Undefined(UndefinedReason::ZeroDenominator(which))
    } else {
        MetricValue::defined(numerator / denominator)
    }
}

/// All measures for one model over one dataset: the flat suite derived from
/// the confusion matrix, and the path-based hP/hR/hF triple (defined for
/// single-path runs only).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub acc: MetricValue,
    pub ppv: MetricValue,
    pub tpr: MetricValue,
    pub fnr: MetricValue,
    pub fpr: MetricValue,
    pub tnr: MetricValue,
    pub pt: MetricValue,
    pub f1: MetricValue,
    pub mcc: MetricValue,
    /// Weight of hP relative to hR in the hF score.
    pub beta: f64,
    pub hp: MetricValue,
    pub hr: MetricValue,
    pub hf: MetricValue,
}

/// Derives the flat measures from a confusion matrix. The hP/hR/hF fields
/// start out [`UndefinedReason::NotApplicable`]; attach them with
/// [`MetricReport::with_hierarchical`] when the run is single-path.
pub fn flat_metrics(c: HierarchicalConfusion) -> MetricReport {
    let tp = c.true_positives as f64;
    let tn = c.true_negatives as f64;
    let fp = c.false_positives as f64;
    let fn_count = c.false_negatives as f64;

    let tpr = ratio(tp, tp + fn_count, "TP+FN");
    let tnr = ratio(tn, tn + fp, "TN+FP");

    let pt = match (tpr, tnr) {
        (MetricValue::Defined(tpr), MetricValue::Defined(tnr)) => {
            let denominator = tpr + tnr - 1.0;
            if denominator == 0.0 {
                MetricValue::Undefined(UndefinedReason::ZeroDenominator("TPR+TNR-1"))
            } else {
                MetricValue::defined(((tpr * (1.0 - tnr)).sqrt() + tnr - 1.0) / denominator)
            }
        }
        _ => MetricValue::Undefined(UndefinedReason::ZeroDenominator("TPR or TNR undefined")),
    };

    // The four-factor product under the radical overflows long before the
    // individual factors do, so take the roots first.
    let mcc_denominator =
        (tp + fp).sqrt() * (tp + fn_count).sqrt() * (tn + fp).sqrt() * (tn + fn_count).sqrt();
    let mcc = if mcc_denominator == 0.0 {
        MetricValue::Undefined(UndefinedReason::ZeroDenominator(
            "(TP+FP)(TP+FN)(TN+FP)(TN+FN)",
        ))
    } else {
        MetricValue::defined((tp * tn - fp * fn_count) / mcc_denominator)
    };

    MetricReport {
        acc: ratio(tp + tn, tp + tn + fp + fn_count, "TP+TN+FP+FN"),
        ppv: ratio(tp, tp + fp, "TP+FP"),
        tpr,
        fnr: ratio(fn_count, fn_count + tp, "FN+TP"),
        fpr: ratio(fp, fp + tn, "FP+TN"),
        tnr,
        pt,
        f1: ratio(2.0 * tp, 2.0 * tp + fp + fn_count, "2TP+FP+FN"),
        mcc,
        beta: 1.0,
        hp: MetricValue::Undefined(UndefinedReason::NotApplicable),
        hr: MetricValue::Undefined(UndefinedReason::NotApplicable),
        hf: MetricValue::Undefined(UndefinedReason::NotApplicable),
    }
}

impl MetricReport {
    pub fn with_hierarchical(mut self, prf: HierarchicalPrf, beta: f64) -> MetricReport {
        self.hp = prf.hp;
        self.hr = prf.hr;
        self.hf = prf.hf;
        self.beta = beta;
        self
    }

    /// Looks a metric up by its report column name.
    pub fn get(&self, name: &str) -> Option<MetricValue> {
        Some(match name {
            "acc" => self.acc,
            "ppv" => self.ppv,
            "tpr" => self.tpr,
            "fnr" => self.fnr,
            "fpr" => self.fpr,
            "tnr" => self.tnr,
            "pt" => self.pt,
            "f1" => self.f1,
            "mcc" => self.mcc,
            "hp" => self.hp,
            "hr" => self.hr,
            "hf" => self.hf,
            _ => return None,
        })
    }
}

/// Hierarchical precision, recall, and F-score over per-record path pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchicalPrf {
    pub hp: MetricValue,
    pub hr: MetricValue,
    pub hf: MetricValue,
}

/// Errors from hierarchical precision/recall computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("record list is empty")]
    EmptyRecordList,
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
}

/// Computes hP, hR, and hF over `(true path, predicted path)` records of a
/// single-path problem.
///
/// hP sums the per-record path intersections over the summed predicted path
/// lengths; hR divides by the summed true path lengths instead. The
/// intersections are plain node-set intersections with the root included.
/// hF is the beta-weighted harmonic combination, where hP counts `beta`
/// times as much as hR.
pub fn hierarchical_prf<'a, I>(records: I, beta: f64) -> Result<HierarchicalPrf, MetricsError>
where
    I: IntoIterator<Item = (&'a AllocationPath, &'a AllocationPath)>,
{
    if beta <= 0.0 || !beta.is_finite() {
        return Err(MetricsError::NonPositiveBeta(beta));
    }
    let mut intersection_total = 0u64;
    let mut pred_total = 0u64;
    let mut true_total = 0u64;
    let mut seen = false;
    for (true_path, pred_path) in records {
        seen = true;
        let true_set = true_path.node_set();
        intersection_total += pred_path
            .nodes()
            .iter()
            .filter(|n| true_set.contains(n))
            .count() as u64;
        pred_total += pred_path.len() as u64;
        true_total += true_path.len() as u64;
    }
    if !seen {
        return Err(MetricsError::EmptyRecordList);
    }

    let hp = ratio(intersection_total as f64, pred_total as f64, "sum |pred|");
    let hr = ratio(intersection_total as f64, true_total as f64, "sum |true|");
    let hf = match (hp, hr) {
        (MetricValue::Defined(hp), MetricValue::Defined(hr)) => f_score(hp, hr, beta),
        _ => MetricValue::Undefined(UndefinedReason::ZeroDenominator("hP or hR undefined")),
    };
    Ok(HierarchicalPrf { hp, hr, hf })
}

/// Beta-weighted harmonic combination of a precision/recall pair, where
/// precision counts `beta` times as much as recall. With `beta = 1` this is
/// the plain harmonic mean.
pub fn f_score(precision: f64, recall: f64, beta: f64) -> MetricValue {
    let beta_sq = beta * beta;
    let denominator = beta_sq * precision + recall;
    if denominator == 0.0 {
        MetricValue::Undefined(UndefinedReason::ZeroDenominator("beta^2*P+R"))
    } else {
        MetricValue::defined((1.0 + beta_sq) * precision * recall / denominator)
    }
}
