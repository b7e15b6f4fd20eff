//! Count-replay input: raw confusion counts per model, bypassing dataset
//! evaluation. Lets published result tables be reproduced and re-ranked
//! without the original prediction files.
//!
//! Format: `model<TAB>tp<TAB>tn<TAB>fp<TAB>fn` per line; `#` comments and
//! blank lines ignored.

use std::collections::HashSet;

use hieval::confusion::HierarchicalConfusion;

pub fn parse_replay_file(text: &str) -> Result<Vec<(String, HierarchicalConfusion)>, String> {
    let mut rows = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [model, tp, tn, fp, fn_count] = fields.as_slice() else {
            return Err(format!(
                "line {line_no}: expected 'model<TAB>tp<TAB>tn<TAB>fp<TAB>fn', got {} field(s)",
                fields.len()
            ));
        };
        if model.is_empty() {
            return Err(format!("line {line_no}: model name is empty"));
        }
        if !seen.insert(model.to_string()) {
            return Err(format!("line {line_no}: duplicate model name '{model}'"));
        }
        let parse = |field: &str, what: &str| {
            field
                .parse::<u64>()
                .map_err(|_| format!("line {line_no}: {what} count {field:?} is not a non-negative integer"))
        };
        rows.push((
            model.to_string(),
            HierarchicalConfusion::new(
                parse(tp, "tp")?,
                parse(tn, "tn")?,
                parse(fp, "fp")?,
                parse(fn_count, "fn")?,
            ),
        ));
    }
    if rows.is_empty() {
        return Err("replay file contains no model rows".to_string());
    }
    Ok(rows)
}
