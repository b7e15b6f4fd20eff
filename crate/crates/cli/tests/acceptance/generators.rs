//! Seeded random taxonomy and record generators for the acceptance suite.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::oracle::{self, Edge};

fn label(i: usize) -> String {
    format!("n{i:03}")
}

/// Random tree: node 0 is the root, every later node attaches to an earlier
/// node of depth below `max_depth`.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize, max_depth: usize) -> Vec<Edge> {
    let n = rng.gen_range(2..=max_nodes);
    let mut depth = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    for i in 1..n {
        let eligible: Vec<usize> = (0..i).filter(|&p| depth[p] < max_depth).collect();
        let parent = eligible[rng.gen_range(0..eligible.len())];
        depth[i] = depth[parent] + 1;
        edges.push((label(parent), label(i)));
    }
    edges
}

/// Random DAG: a tree plus extra edges that strictly increase tree depth
/// (keeps the graph acyclic with a unique root).
pub fn random_dag(rng: &mut ChaCha8Rng, max_nodes: usize, max_depth: usize) -> Vec<Edge> {
    let tree = random_tree(rng, max_nodes, max_depth);
    let n = tree.len() + 1;
    let mut depth = vec![0usize; n];
    for (parent, child) in &tree {
        let p: usize = parent[1..].parse().unwrap();
        let c: usize = child[1..].parse().unwrap();
        depth[c] = depth[p] + 1;
    }
    let mut edges = tree;
    for _ in 0..rng.gen_range(0..=n.div_ceil(3)) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if depth[a] < depth[b] && !edges.contains(&(label(a), label(b))) {
            edges.push((label(a), label(b)));
        }
    }
    edges
}

/// Root-anchored random walk; runs to a leaf when `to_leaf`, otherwise may
/// stop at any depth (including the bare root).
pub fn random_path(rng: &mut ChaCha8Rng, edges: &[Edge], root: &str, to_leaf: bool) -> Vec<String> {
    let mut path = vec![root.to_string()];
    loop {
        let children = oracle::children_of(edges, path.last().unwrap());
        if children.is_empty() {
            break;
        }
        if !to_leaf && rng.gen_bool(0.3) {
            break;
        }
        path.push(children[rng.gen_range(0..children.len())].clone());
    }
    path
}

/// Distinct random classes: leaves only when `leaves_only`, any node
/// otherwise.
pub fn random_classes(
    rng: &mut ChaCha8Rng,
    edges: &[Edge],
    count: usize,
    leaves_only: bool,
) -> Vec<String> {
    let mut pool = if leaves_only {
        oracle::leaves_of(edges)
    } else {
        oracle::all_nodes(edges)
    };
    pool.shuffle(rng);
    pool.truncate(count.max(1).min(pool.len()));
    pool
}
