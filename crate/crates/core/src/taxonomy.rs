//! Class hierarchies and path-level set queries.
//!
//! A [`Taxonomy`] is an immutable rooted graph of classes: either a tree
//! (every non-root class has exactly one parent) or a DAG (multiple parents
//! allowed). It is built once from an edge list, validated, and afterwards
//! serves read-only queries: ancestor/descendant closures, sibling sets, all
//! root-to-class paths, and the longest common path of two allocation paths.
//! All query results are deterministic functions of the edge *set*; feeding
//! the same edges in a different order yields identical answers.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Reserved characters that may not appear in class labels; they act as
/// separators in the text file formats (`parent<TAB>child`, `R>A>A1`,
/// `class1;class2`).
pub const RESERVED_LABEL_CHARS: [char; 2] = ['>', ';'];

/// Interned handle for one class of a [`Taxonomy`].
///
/// Obtained from [`Taxonomy::resolve`] or returned by queries; only
/// meaningful for the taxonomy that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

/// Whether the hierarchy is a tree or a general DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaxonomyKind {
    /// Every non-root class has exactly one parent.
    Tree,
    /// At least one class has multiple parents.
    Dag,
}

impl fmt::Display for TaxonomyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaxonomyKind::Tree => write!(f, "tree"),
            TaxonomyKind::Dag => write!(f, "dag"),
        }
    }
}

/// How many allocation paths a record carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathMode {
    /// Single-path labelling: one true class, one predicted path per record.
    SinglePath,
    /// Multi-path labelling: any number of true classes and predicted paths.
    MultiPath,
}

/// Whether labels must reach the leaves of the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepthMode {
    /// Mandatory leaf-node prediction: classes and path ends must be leaves.
    MandatoryLeaf,
    /// Labels may stop at internal classes.
    NonMandatoryLeaf,
}

/// The three axes that classify a hierarchical classification problem:
/// structure (tree/dag), path cardinality (spl/mpl), and label depth
/// (mlnp/nmlnp).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemKind {
    pub structure: TaxonomyKind,
    pub paths: PathMode,
    pub depth: DepthMode,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paths = match self.paths {
            PathMode::SinglePath => "spl",
            PathMode::MultiPath => "mpl",
        };
        let depth = match self.depth {
            DepthMode::MandatoryLeaf => "mlnp",
            DepthMode::NonMandatoryLeaf => "nmlnp",
        };
        write!(f, "{}-{}-{}", self.structure, paths, depth)
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    /// Parses the `structure-paths-depth` form, e.g. `tree-spl-mlnp` or
    /// `dag-mpl-nmlnp`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('-');
        let (a, b, c) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => return Err(format!("invalid problem kind '{s}'")),
        };
        let structure = match a {
            "tree" => TaxonomyKind::Tree,
            "dag" => TaxonomyKind::Dag,
            _ => return Err(format!("invalid structure '{a}' in problem kind '{s}'")),
        };
        let paths = match b {
            "spl" => PathMode::SinglePath,
            "mpl" => PathMode::MultiPath,
            _ => return Err(format!("invalid path mode '{b}' in problem kind '{s}'")),
        };
        let depth = match c {
            "mlnp" => DepthMode::MandatoryLeaf,
            "nmlnp" => DepthMode::NonMandatoryLeaf,
            _ => return Err(format!("invalid depth mode '{c}' in problem kind '{s}'")),
        };
        Ok(ProblemKind {
            structure,
            paths,
            depth,
        })
    }
}

/// Errors from taxonomy construction and queries.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("invalid class label {0:?}: labels must be non-empty and contain no whitespace, '>' or ';'")]
    InvalidLabel(String),
    #[error("cycle detected involving class '{0}'")]
    CycleDetected(String),
    #[error("multiple root candidates (classes without ancestors): {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("class '{0}' is not reachable from the root")]
    UnreachableNode(String),
    #[error("declared root '{declared}' does not match the actual root '{actual}'")]
    DeclaredRootMismatch { declared: String, actual: String },
    #[error("unknown class '{0}'")]
    UnknownNode(String),
    #[error("path not in taxonomy: {0}")]
    PathNotInTaxonomy(String),
}

/// Non-fatal issues noticed while building a taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildWarning {
    /// The same parent/child edge appeared more than once; extra copies were
    /// dropped.
    DuplicateEdge { parent: String, child: String },
}

impl fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildWarning::DuplicateEdge { parent, child } => {
                write!(f, "duplicate edge {parent} -> {child} ignored")
            }
        }
    }
}

/// A root-anchored sequence of classes in which every consecutive pair is a
/// direct parent/child edge and no class repeats.
///
/// Allocation paths describe both true labellings (the path from the root to
/// a true class) and predictions (the path a classifier committed to). The
/// degenerate path `[root]` is valid; it represents total abstention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AllocationPath {
    nodes: Vec<NodeId>,
}

impl AllocationPath {
    pub(crate) fn from_validated(nodes: Vec<NodeId>) -> Self {
        debug_assert!(!nodes.is_empty());
        AllocationPath { nodes }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Last class on the path (`Z{...}`); equals the root for the degenerate
    /// single-node path.
    pub fn leaf(&self) -> NodeId {
        *self.nodes.last().expect("allocation paths are non-empty")
    }

    /// Number of classes on the path, root included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().copied().collect()
    }
}

/// Longest root-anchored common path of `a` and `b`.
///
/// Both paths must come from the same taxonomy. Because each path starts at
/// the root and never repeats a class, the longest consecutively-connected
/// common sequence containing the root is exactly the longest common prefix,
/// which is what this computes. Never shorter than `[root]`.
pub fn common_path(a: &AllocationPath, b: &AllocationPath) -> AllocationPath {
    let n = a
        .nodes
        .iter()
        .zip(b.nodes.iter())
        .take_while(|(x, y)| x == y)
        .count();
    debug_assert!(n >= 1, "paths from one taxonomy share at least the root");
    AllocationPath::from_validated(a.nodes[..n].to_vec())
}

/// Length of the longest common path without materializing it.
pub fn common_path_len(a: &AllocationPath, b: &AllocationPath) -> usize {
    a.nodes
        .iter()
        .zip(b.nodes.iter())
        .take_while(|(x, y)| x == y)
        .count()
}

/// An immutable, validated class hierarchy.
///
/// Built once with [`Taxonomy::from_edges`]; afterwards every method is a
/// read-only query, so a `Taxonomy` can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    labels: Vec<String>,
    by_label: HashMap<String, NodeId>,
    root: NodeId,
    kind: TaxonomyKind,
    /// Adjacency, sorted by child label for deterministic traversal.
    children: Vec<Vec<NodeId>>,
    parents: Vec<Vec<NodeId>>,
    ancestors: Vec<BTreeSet<NodeId>>,
    descendants: Vec<BTreeSet<NodeId>>,
    neighbors: Vec<BTreeSet<NodeId>>,
    warnings: Vec<BuildWarning>,
}

fn validate_label(label: &str) -> Result<(), TaxonomyError> {
    if label.is_empty()
        || label.chars().any(char::is_whitespace)
        || label.contains(&RESERVED_LABEL_CHARS[..])
    {
        return Err(TaxonomyError::InvalidLabel(label.to_string()));
    }
    Ok(())
}

impl Taxonomy {
    /// Builds and validates a taxonomy from `(parent, child)` edges.
    ///
    /// Exactly one class may have no ancestors; it becomes the root (and must
    /// equal `declared_root` when one is given). The edge relation must be
    /// acyclic, and every class must be reachable from the root. Duplicate
    /// edges are dropped with a [`BuildWarning`]. The kind is inferred:
    /// [`TaxonomyKind::Tree`] iff every non-root class has exactly one
    /// parent.
    pub fn from_edges<I, S>(edges: I, declared_root: Option<&str>) -> Result<Self, TaxonomyError>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut by_label: HashMap<String, NodeId> = HashMap::new();
        let mut intern = |label: &str, labels: &mut Vec<String>| -> NodeId {
            if let Some(&id) = by_label.get(label) {
                return id;
            }
            let id = NodeId(labels.len() as u32);
            labels.push(label.to_string());
            by_label.insert(label.to_string(), id);
            id
        };

        let mut edge_set: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        let mut warnings = Vec::new();
        let mut any_edge = false;
        for (parent, child) in edges {
            any_edge = true;
            let (parent, child) = (parent.as_ref(), child.as_ref());
            validate_label(parent)?;
            validate_label(child)?;
            let p = intern(parent, &mut labels);
            let c = intern(child, &mut labels);
            if p == c {
                // A self-loop is the smallest cycle.
                return Err(TaxonomyError::CycleDetected(parent.to_string()));
            }
            if !edge_set.insert((p, c)) {
                warnings.push(BuildWarning::DuplicateEdge {
                    parent: parent.to_string(),
                    child: child.to_string(),
                });
            }
        }
        if !any_edge {
            return Err(TaxonomyError::EmptyEdgeList);
        }

        let n = labels.len();
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut parents: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(p, c) in &edge_set {
            children[p.index()].push(c);
            parents[c.index()].push(p);
        }
        for adj in children.iter_mut().chain(parents.iter_mut()) {
            adj.sort_by(|a, b| labels[a.index()].cmp(&labels[b.index()]));
        }

        let mut roots: Vec<NodeId> = (0..n)
            .map(|i| NodeId(i as u32))
            .filter(|id| parents[id.index()].is_empty())
            .collect();
        roots.sort_by(|a, b| labels[a.index()].cmp(&labels[b.index()]));
        let root = match roots.as_slice() {
            [] => {
                // Every class has a parent, so some ancestor chain loops.
                return Err(TaxonomyError::CycleDetected(labels[0].clone()));
            }
            [root] => *root,
            many => {
                return Err(TaxonomyError::MultipleRoots(
                    many.iter().map(|id| labels[id.index()].clone()).collect(),
                ));
            }
        };
        if let Some(declared) = declared_root {
            if labels[root.index()] != declared {
                return Err(TaxonomyError::DeclaredRootMismatch {
                    declared: declared.to_string(),
                    actual: labels[root.index()].clone(),
                });
            }
        }

        // Reachability from the root.
        let mut reachable = vec![false; n];
        let mut stack = vec![root];
        reachable[root.index()] = true;
        while let Some(v) = stack.pop() {
            for &c in &children[v.index()] {
                if !reachable[c.index()] {
                    reachable[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        if let Some(i) = reachable.iter().position(|r| !r) {
            return Err(TaxonomyError::UnreachableNode(labels[i].clone()));
        }

        // Kahn's algorithm: if some class never reaches in-degree zero the
        // remaining subgraph contains a cycle.
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut queue = vec![root];
        let mut topo: Vec<NodeId> = Vec::with_capacity(n);
        while let Some(v) = queue.pop() {
            topo.push(v);
            for &c in &children[v.index()] {
                indeg[c.index()] -= 1;
                if indeg[c.index()] == 0 {
                    queue.push(c);
                }
            }
        }
        if topo.len() != n {
            let culprit = indeg.iter().position(|&d| d > 0).expect("cycle member");
            return Err(TaxonomyError::CycleDetected(labels[culprit].clone()));
        }

        let kind = if (0..n)
            .filter(|&i| NodeId(i as u32) != root)
            .all(|i| parents[i].len() == 1)
        {
            TaxonomyKind::Tree
        } else {
            TaxonomyKind::Dag
        };

        // Transitive closures via one pass in reverse/forward topological
        // order.
        let mut descendants: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        for &v in topo.iter().rev() {
            let mut set = BTreeSet::new();
            for &c in &children[v.index()] {
                set.insert(c);
                set.extend(descendants[c.index()].iter().copied());
            }
            descendants[v.index()] = set;
        }
        let mut ancestors: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        for &v in &topo {
            let mut set = BTreeSet::new();
            for &p in &parents[v.index()] {
                set.insert(p);
                set.extend(ancestors[p.index()].iter().copied());
            }
            ancestors[v.index()] = set;
        }

        // Siblings: classes sharing at least one direct parent.
        let mut neighbors: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        for v in 0..n {
            let mut set = BTreeSet::new();
            for &p in &parents[v] {
                set.extend(children[p.index()].iter().copied());
            }
            set.remove(&NodeId(v as u32));
            neighbors[v] = set;
        }

        Ok(Taxonomy {
            labels,
            by_label,
            root,
            kind,
            children,
            parents,
            ancestors,
            descendants,
            neighbors,
            warnings,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn kind(&self) -> TaxonomyKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(|i| NodeId(i as u32))
    }

    pub fn warnings(&self) -> &[BuildWarning] {
        &self.warnings
    }

    /// Looks up a class by label.
    pub fn resolve(&self, label: &str) -> Result<NodeId, TaxonomyError> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownNode(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.by_label.contains_key(label)
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.index()]
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.children[id.index()].is_empty()
    }

    /// Direct children, sorted by label.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id.index()]
    }

    /// Direct parents, sorted by label; empty exactly for the root.
    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        &self.parents[id.index()]
    }

    /// All classes reachable from `id` through one or more edges (`D{...}`).
    /// Each class appears once even when several DAG routes reach it.
    pub fn descendants(&self, id: NodeId) -> &BTreeSet<NodeId> {
        &self.descendants[id.index()]
    }

    /// All classes from which `id` is reachable (`A{...}`); empty for the
    /// root.
    pub fn ancestors(&self, id: NodeId) -> &BTreeSet<NodeId> {
        &self.ancestors[id.index()]
    }

    /// Classes sharing at least one direct parent with `id` (`N{...}`);
    /// empty for the root.
    pub fn neighbors(&self, id: NodeId) -> &BTreeSet<NodeId> {
        &self.neighbors[id.index()]
    }

    /// Every root-to-`class` allocation path (`W`), sorted lexicographically
    /// by label sequence. Trees yield exactly one path; the root yields the
    /// degenerate `[root]`.
    pub fn true_paths(&self, class: NodeId) -> Vec<AllocationPath> {
        let mut out: Vec<Vec<NodeId>> = Vec::new();
        let mut suffix = vec![class];
        self.collect_paths_upward(class, &mut suffix, &mut out);
        let mut paths: Vec<AllocationPath> = out
            .into_iter()
            .map(AllocationPath::from_validated)
            .collect();
        paths.sort_by(|a, b| self.compare_paths(a, b));
        paths
    }

    fn collect_paths_upward(&self, v: NodeId, suffix: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if v == self.root {
            out.push(suffix.iter().rev().copied().collect());
            return;
        }
        for &p in &self.parents[v.index()] {
            suffix.push(p);
            self.collect_paths_upward(p, suffix, out);
            suffix.pop();
        }
    }

    /// Lexicographic comparison of two paths by label sequence; the basis of
    /// every deterministic tie-break in the crate.
    pub fn compare_paths(&self, a: &AllocationPath, b: &AllocationPath) -> std::cmp::Ordering {
        let a = a.nodes().iter().map(|&id| self.label(id));
        let b = b.nodes().iter().map(|&id| self.label(id));
        a.cmp(b)
    }

    /// Validates a label sequence as an allocation path: anchored at the
    /// root, every consecutive pair a direct edge, no repeats.
    pub fn path<S: AsRef<str>>(&self, labels: &[S]) -> Result<AllocationPath, TaxonomyError> {
        let ids = labels
            .iter()
            .map(|l| {
                self.by_label.get(l.as_ref()).copied().ok_or_else(|| {
                    TaxonomyError::PathNotInTaxonomy(format!("unknown class '{}'", l.as_ref()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.path_from_ids(ids)
    }

    /// [`Taxonomy::path`] over already-resolved ids.
    pub fn path_from_ids(&self, ids: Vec<NodeId>) -> Result<AllocationPath, TaxonomyError> {
        let Some(&first) = ids.first() else {
            return Err(TaxonomyError::PathNotInTaxonomy("path is empty".into()));
        };
        if first != self.root {
            return Err(TaxonomyError::PathNotInTaxonomy(format!(
                "path must start at the root '{}', found '{}'",
                self.label(self.root),
                self.label(first)
            )));
        }
        let mut seen = BTreeSet::new();
        for &id in &ids {
            if !seen.insert(id) {
                return Err(TaxonomyError::PathNotInTaxonomy(format!(
                    "class '{}' repeats on the path",
                    self.label(id)
                )));
            }
        }
        for pair in ids.windows(2) {
            if !self.children[pair[0].index()].contains(&pair[1]) {
                return Err(TaxonomyError::PathNotInTaxonomy(format!(
                    "'{}' is not a direct child of '{}'",
                    self.label(pair[1]),
                    self.label(pair[0])
                )));
            }
        }
        Ok(AllocationPath::from_validated(ids))
    }

    /// Labels of a path, in order.
    pub fn path_labels(&self, path: &AllocationPath) -> Vec<&str> {
        path.nodes().iter().map(|&id| self.label(id)).collect()
    }

    /// Renders a path in the `R>A>A1` text form.
    pub fn path_string(&self, path: &AllocationPath) -> String {
        self.path_labels(path).join(">")
    }

    /// Labels of a node set, sorted; handy for assertions and reports.
    pub fn label_set(&self, ids: &BTreeSet<NodeId>) -> BTreeSet<&str> {
        ids.iter().map(|&id| self.label(id)).collect()
    }
}
