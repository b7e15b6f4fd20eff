//! Report rows, ranking, and TSV/JSON rendering.
//!
//! Output is byte-identical across runs on identical inputs: no timestamps,
//! fixed column order, deterministic row order (rank, then model name).

use std::cmp::Ordering;

use hieval::confusion::HierarchicalConfusion;
use hieval::metrics::{MetricReport, MetricValue};
use serde_json::{json, Value};

/// Column order shared by every output format; `compare` appends `rank`.
pub const COLUMNS: [&str; 17] = [
    "model", "tp", "tn", "fp", "fn", "acc", "ppv", "tpr", "fnr", "fpr", "tnr", "pt", "f1", "mcc",
    "hp", "hr", "hf",
];

/// Metric column names accepted by `--rank-by`.
pub const RANKABLE: [&str; 12] = [
    "acc", "ppv", "tpr", "fnr", "fpr", "tnr", "pt", "f1", "mcc", "hp", "hr", "hf",
];

/// One model's results, ready to render.
pub struct ModelRow {
    pub name: String,
    pub confusion: HierarchicalConfusion,
    pub report: MetricReport,
}

impl ModelRow {
    fn cells(&self) -> Vec<String> {
        let c = &self.confusion;
        let r = &self.report;
        let mut cells = vec![
            self.name.clone(),
            c.true_positives.to_string(),
            c.true_negatives.to_string(),
            c.false_positives.to_string(),
            c.false_negatives.to_string(),
        ];
        for metric in &RANKABLE {
            cells.push(r.get(metric).expect("known metric").percent_string());
        }
        cells
    }

    fn json_object(&self) -> Value {
        let c = &self.confusion;
        let r = &self.report;
        let mut object = json!({
            "model": self.name,
            "tp": c.true_positives,
            "tn": c.true_negatives,
            "fp": c.false_positives,
            "fn": c.false_negatives,
        });
        for metric in &RANKABLE {
            object[*metric] = Value::String(r.get(metric).expect("known metric").percent_string());
        }
        object
    }
}

/// Sorts rows by the ranking metric (descending, undefined last, ties by
/// model name) and assigns competition ranks: tied rows share the smaller
/// rank, the next distinct value resumes at its position.
pub fn rank_rows(mut rows: Vec<ModelRow>, metric: &str) -> Vec<(usize, ModelRow)> {
    rows.sort_by(|a, b| {
        let va = a.report.get(metric).expect("validated metric name");
        let vb = b.report.get(metric).expect("validated metric name");
        vb.ranking_cmp(&va).then_with(|| a.name.cmp(&b.name))
    });
    let mut ranked: Vec<(usize, ModelRow)> = Vec::with_capacity(rows.len());
    let mut previous: Option<(MetricValue, usize)> = None;
    for (position, row) in rows.into_iter().enumerate() {
        let value = row.report.get(metric).expect("validated metric name");
        let rank = match previous {
            Some((prev, prev_rank)) if prev.ranking_cmp(&value) == Ordering::Equal => prev_rank,
            _ => position + 1,
        };
        previous = Some((value, rank));
        ranked.push((rank, row));
    }
    ranked
}

pub fn evaluate_tsv(row: &ModelRow) -> String {
    format!("{}\n{}\n", COLUMNS.join("\t"), row.cells().join("\t"))
}

pub fn evaluate_json(row: &ModelRow) -> String {
    let mut out = serde_json::to_string_pretty(&row.json_object()).expect("json serialization");
    out.push('\n');
    out
}

pub fn compare_tsv(ranked: &[(usize, ModelRow)]) -> String {
    let mut out = String::new();
    out.push_str(&COLUMNS.join("\t"));
    out.push_str("\trank\n");
    for (rank, row) in ranked {
        out.push_str(&row.cells().join("\t"));
        out.push_str(&format!("\t{rank}\n"));
    }
    out
}

pub fn compare_json(ranked: &[(usize, ModelRow)]) -> String {
    let array: Vec<Value> = ranked
        .iter()
        .map(|(rank, row)| {
            let mut object = row.json_object();
            object["rank"] = json!(rank);
            object
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&Value::Array(array)).expect("json serialization");
    out.push('\n');
    out
}
