//! Sparse undirected simple graphs, degree bookkeeping and the edge-list
//! text format shared by every other module.
//!
//! A [`Graph`] stores its canonical edge list (pairs `(i, j)` with `i < j`,
//! lexicographically sorted) together with sorted neighbor lists. Values are
//! immutable after construction; every diffusion step builds a new graph.

use std::fmt::Write as _;

use thiserror::Error;

/// A canonical undirected edge `(i, j)` with `i < j`.
pub type Edge = (usize, usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({u}, {v}) references a node outside 0..{n}")]
    NodeOutOfRange { u: usize, v: usize, n: usize },
    #[error("node-count mismatch: {left} vs {right}")]
    NodeCountMismatch { left: usize, right: usize },
    #[error("mask length {mask} does not match node count {n}")]
    MaskLength { mask: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected simple graph over nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from arbitrary pairs. Orientation is normalized and
    /// duplicates collapse; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange { u, v, n });
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_canonical(n, edges))
    }

    /// Builds a graph from an edge list that is already canonical: every pair
    /// has `i < j < n`, the list is sorted and duplicate-free.
    pub(crate) fn from_canonical(n: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(i, j)| i < j && j < n));
        let mut deg = vec![0usize; n];
        for &(i, j) in &edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        let mut adj: Vec<Vec<usize>> = deg.iter().map(|&d| Vec::with_capacity(d)).collect();
        // Edges are sorted by (i, j), so pushing j onto adj[i] keeps adj[i]
        // sorted; i onto adj[j] is also sorted because i increases.
        for &(i, j) in &edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            if !list.windows(2).all(|w| w[0] < w[1]) {
                list.sort_unstable();
            }
        }
        Self { n, edges, adj }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edges in lexicographic order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i >= self.n || j >= self.n || i == j {
            return false;
        }
        let (a, b) = if self.adj[i].len() <= self.adj[j].len() {
            (i, j)
        } else {
            (j, i)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence(self.adj.iter().map(Vec::len).collect())
    }

    /// Number of edges with both endpoints active, `sᵀ A s / 2`.
    pub fn active_subgraph_edge_count(&self, mask: &ActiveMask) -> Result<usize, GraphError> {
        self.check_mask(mask)?;
        Ok(self
            .edges
            .iter()
            .filter(|&&(i, j)| mask.0[i] && mask.0[j])
            .count())
    }

    pub(crate) fn check_mask(&self, mask: &ActiveMask) -> Result<(), GraphError> {
        if mask.len() != self.n {
            return Err(GraphError::MaskLength {
                mask: mask.len(),
                n: self.n,
            });
        }
        Ok(())
    }

    /// Size of the intersection of the two edge sets.
    pub fn common_edge_count(&self, other: &Graph) -> usize {
        let (mut a, mut b) = (self.edges.iter().peekable(), other.edges.iter().peekable());
        let mut common = 0;
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    common += 1;
                    a.next();
                    b.next();
                }
            }
        }
        common
    }
}

/// Fraction of the reference graph's edges present in `generated`.
///
/// The denominator is `max(|E(reference)|, 1)`, so an empty reference yields 0.
pub fn edge_overlap(generated: &Graph, reference: &Graph) -> Result<f64, GraphError> {
    if generated.n != reference.n {
        return Err(GraphError::NodeCountMismatch {
            left: generated.n,
            right: reference.n,
        });
    }
    let common = generated.common_edge_count(reference);
    Ok(common as f64 / reference.edge_count().max(1) as f64)
}

/// Per-node degrees `d_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeSequence(pub Vec<usize>);

impl DegreeSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `(degree, multiplicity)` pairs for the positive degrees, ascending.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let mut counts = vec![0usize; self.max() + 1];
        for &d in &self.0 {
            counts[d] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, c)| c > 0)
            .collect()
    }

    /// Number of nodes with at least one edge.
    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|&&d| d > 0).count()
    }
}

impl From<Vec<usize>> for DegreeSequence {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Active-node indicator `s`: node `i` is active when its degree changes
/// between consecutive diffusion steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveMask(pub Vec<bool>);

impl ActiveMask {
    pub fn all(n: usize, value: bool) -> Self {
        Self(vec![value; n])
    }

    /// Mask of nodes whose degree differs between `prev` and `next`.
    pub fn between(prev: &Graph, next: &Graph) -> Result<Self, GraphError> {
        if prev.n != next.n {
            return Err(GraphError::NodeCountMismatch {
                left: prev.n,
                right: next.n,
            });
        }
        Ok(Self(
            (0..prev.n)
                .map(|i| prev.degree(i) != next.degree(i))
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Indices of the active nodes, ascending.
    pub fn active_nodes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Parses the edge-list format: whitespace-separated `u v` pairs, `#`
/// comments, blank lines ignored, and an optional `N <n>` header on the first
/// content line fixing the node count.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap_or("");
        if first == "N" {
            if seen_content {
                return Err(GraphError::Parse {
                    line: line_no,
                    msg: "`N` header must be the first content line".into(),
                });
            }
            seen_content = true;
            let n = parse_index(tokens.next(), line_no)?;
            if tokens.next().is_some() {
                return Err(parse_err(line_no, "trailing tokens after header"));
            }
            declared = Some(n);
            continue;
        }
        seen_content = true;
        let u = parse_index(Some(first), line_no)?;
        let v = parse_index(tokens.next(), line_no)?;
        if tokens.next().is_some() {
            return Err(parse_err(line_no, "expected exactly two tokens"));
        }
        if u == v {
            return Err(parse_err(line_no, &format!("self-loop on node {u}")));
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(parse_err(
                    line_no,
                    &format!("node index {} not below declared N {n}", u.max(v)),
                ));
            }
        }
        pairs.push((u, v));
    }
    let n = declared.unwrap_or_else(|| pairs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Graph::from_edges(n, pairs)
}

fn parse_err(line: usize, msg: &str) -> GraphError {
    GraphError::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn parse_index(token: Option<&str>, line: usize) -> Result<usize, GraphError> {
    let tok = token.ok_or_else(|| parse_err(line, "expected two integer tokens"))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, &format!("invalid node index `{tok}`")))
}

/// Serializes to the edge-list format. Pairs are written in lexicographic
/// order with LF endings; an `N <n>` header is emitted when isolated nodes
/// exist so that they survive a round trip.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(g.edge_count() * 10 + 16);
    if g.adj.iter().any(Vec::is_empty) {
        let _ = writeln!(out, "N {}", g.n);
    }
    for &(i, j) in &g.edges {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}
