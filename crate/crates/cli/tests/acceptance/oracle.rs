//! Brute-force reference implementations the acceptance suite checks the
//! library against.
//!
//! Everything here works on raw label edge lists with naive scans and
//! explicit set materialization: no interning, no precomputed closures, no
//! code shared with the crates under test. The common path is found by
//! literal window enumeration (longest consecutively-connected sequence
//! common to both paths that contains the root), not by prefix comparison.

use std::collections::BTreeSet;

pub type Edge = (String, String);

pub fn children_of(edges: &[Edge], node: &str) -> Vec<String> {
    let mut out: Vec<String> = edges
        .iter()
        .filter(|(p, _)| p == node)
        .map(|(_, c)| c.clone())
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn parents_of(edges: &[Edge], node: &str) -> Vec<String> {
    let mut out: Vec<String> = edges
        .iter()
        .filter(|(_, c)| c == node)
        .map(|(p, _)| p.clone())
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn all_nodes(edges: &[Edge]) -> Vec<String> {
    let mut out: BTreeSet<String> = BTreeSet::new();
    for (p, c) in edges {
        out.insert(p.clone());
        out.insert(c.clone());
    }
    out.into_iter().collect()
}

pub fn root_of(edges: &[Edge]) -> String {
    let roots: Vec<String> = all_nodes(edges)
        .into_iter()
        .filter(|n| parents_of(edges, n).is_empty())
        .collect();
    assert_eq!(roots.len(), 1, "test graphs have exactly one root");
    roots.into_iter().next().unwrap()
}

pub fn leaves_of(edges: &[Edge]) -> Vec<String> {
    all_nodes(edges)
        .into_iter()
        .filter(|n| children_of(edges, n).is_empty())
        .collect()
}

pub fn descendants_of(edges: &[Edge], node: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![node.to_string()];
    while let Some(current) = frontier.pop() {
        for child in children_of(edges, &current) {
            if out.insert(child.clone()) {
                frontier.push(child);
            }
        }
    }
    out
}

pub fn neighbors_of(edges: &[Edge], node: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for parent in parents_of(edges, node) {
        out.extend(children_of(edges, &parent));
    }
    out.remove(node);
    out
}

/// Every root-to-`class` path, found by exhaustive DFS, sorted.
pub fn all_root_paths(edges: &[Edge], root: &str, class: &str) -> Vec<Vec<String>> {
    fn go(edges: &[Edge], path: &mut Vec<String>, class: &str, out: &mut Vec<Vec<String>>) {
        if path.last().map(String::as_str) == Some(class) {
            out.push(path.clone());
            return;
        }
        for child in children_of(edges, path.last().unwrap()) {
            path.push(child);
            go(edges, path, class, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(edges, &mut vec![root.to_string()], class, &mut out);
    out.sort();
    out
}

/// Longest consecutively-connected sequence common to `a` and `b` that
/// contains the root, materialized by checking every window of `a` against
/// every position of `b`.
pub fn common_window(a: &[String], b: &[String], root: &str) -> Vec<String> {
    let mut best: Vec<String> = Vec::new();
    for start in 0..a.len() {
        for end in start + 1..=a.len() {
            let window = &a[start..end];
            if !window.iter().any(|x| x == root)
                || window.len() <= best.len()
                || window.len() > b.len()
            {
                continue;
            }
            let occurs_in_b =
                (0..=b.len() - window.len()).any(|k| &b[k..k + window.len()] == window);
            if occurs_in_b {
                best = window.to_vec();
            }
        }
    }
    best
}

/// The four counts from literally materialized node sets: intersection
/// minus root, sibling union minus the true path unioned with the unclaimed
/// descendants of the common path's end, and the two set differences.
pub fn set_builder_counts(
    edges: &[Edge],
    root: &str,
    truth: &[String],
    pred: &[String],
) -> (u64, u64, u64, u64) {
    let truth_set: BTreeSet<&String> = truth.iter().collect();
    let pred_set: BTreeSet<&String> = pred.iter().collect();

    let tp = pred_set
        .intersection(&truth_set)
        .filter(|x| x.as_str() != root)
        .count() as u64;
    let fp = pred_set.difference(&truth_set).count() as u64;
    let fn_count = truth_set.difference(&pred_set).count() as u64;

    let common = common_window(pred, truth, root);
    assert!(!common.is_empty(), "both paths contain the root");
    let mut tn_set: BTreeSet<String> = BTreeSet::new();
    for on_common in &common {
        for sibling in neighbors_of(edges, on_common) {
            if !truth.contains(&sibling) {
                tn_set.insert(sibling);
            }
        }
    }
    for below in descendants_of(edges, common.last().unwrap()) {
        if !truth.contains(&below) && !pred.contains(&below) {
            tn_set.insert(below);
        }
    }
    (tp, tn_set.len() as u64, fp, fn_count)
}

/// Benevolent single-path scoring: the true path with the longest common
/// window wins, ties go to the lexicographically smallest sequence.
pub fn spl_counts(
    edges: &[Edge],
    root: &str,
    true_paths: &[Vec<String>],
    pred: &[String],
) -> (u64, u64, u64, u64) {
    let mut best: Option<&Vec<String>> = None;
    for candidate in true_paths {
        let len = common_window(pred, candidate, root).len();
        let replace = match best {
            None => true,
            Some(current) => {
                let current_len = common_window(pred, current, root).len();
                len > current_len || (len == current_len && candidate < current)
            }
        };
        if replace {
            best = Some(candidate);
        }
    }
    set_builder_counts(edges, root, best.expect("non-empty"), pred)
}

/// Step-by-step re-execution of the generalized procedure: m values against
/// the full truth set, predictions in descending m (input order on ties),
/// per-prediction re-selection among unmatched classes, surplus predictions
/// as whole false positives, leftover classes as shortest-path false
/// negatives.
pub fn reference_record(
    edges: &[Edge],
    root: &str,
    truth_classes: &[String],
    preds: &[Vec<String>],
) -> (u64, u64, u64, u64) {
    let mut remaining: Vec<(String, Vec<Vec<String>>)> = truth_classes
        .iter()
        .map(|c| (c.clone(), all_root_paths(edges, root, c)))
        .collect();
    remaining.sort_by(|a, b| a.0.cmp(&b.0));

    let mut m_order: Vec<(usize, usize)> = preds
        .iter()
        .enumerate()
        .map(|(k, pred)| {
            let m = remaining
                .iter()
                .flat_map(|(_, paths)| paths.iter())
                .map(|t| common_window(pred, t, root).len())
                .max()
                .expect("every class has a root path");
            (k, m)
        })
        .collect();
    m_order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let (mut tp, mut tn, mut fp, mut fn_count) = (0u64, 0u64, 0u64, 0u64);
    for (k, _) in m_order {
        let pred = &preds[k];
        if remaining.is_empty() {
            fp += pred.len() as u64 - 1;
            continue;
        }
        let mut best: Option<(usize, Vec<String>, usize)> = None;
        for (ci, (_, paths)) in remaining.iter().enumerate() {
            for candidate in paths {
                let len = common_window(pred, candidate, root).len();
                let replace = match &best {
                    None => true,
                    Some((_, best_path, best_len)) => {
                        len > *best_len || (len == *best_len && candidate < best_path)
                    }
                };
                if replace {
                    best = Some((ci, candidate.clone(), len));
                }
            }
        }
        let (ci, matched, _) = best.expect("remaining is non-empty");
        let (a, b, c, d) = set_builder_counts(edges, root, &matched, pred);
        tp += a;
        tn += b;
        fp += c;
        fn_count += d;
        remaining.remove(ci);
    }
    for (_, paths) in &remaining {
        fn_count += paths.iter().map(|p| p.len() as u64 - 1).min().unwrap();
    }
    (tp, tn, fp, fn_count)
}
