//! Evaluation statistics for generated graphs.
//!
//! Max degree, triangle and 4-cycle counts (normalized by a reference),
//! power-law exponent, Gini coefficient of the degrees, degree
//! assortativity, global clustering, characteristic path length and edge
//! overlap.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{edge_overlap, DegreeSequence, Graph, GraphError};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("power-law exponent needs at least one node of positive degree")]
    NoPositiveDegree,
    #[error("degree sum is zero")]
    ZeroDegreeSum,
    #[error("graph has no edges")]
    NoEdges,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Number of triangles, by intersecting sorted neighbor lists along each
/// edge and keeping only the third node above both endpoints.
pub fn triangle_count(g: &Graph) -> u64 {
    g.edges()
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (g.neighbors(i), g.neighbors(j));
            let start_a = a.partition_point(|&x| x <= j);
            let start_b = b.partition_point(|&x| x <= j);
            sorted_intersection_len(&a[start_a..], &b[start_b..]) as u64
        })
        .sum()
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut n) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                x += 1;
                y += 1;
            }
        }
    }
    n
}

/// Number of 4-cycles, `(Σ_{i,j} (A²)_{ij}² − Σ_i d_i (2 d_i − 1)) / 8`.
///
/// Row `i` of `A²` is accumulated by walking the two-hop neighborhood of `i`.
pub fn square_count(g: &Graph) -> u64 {
    let n = g.node_count();
    let walks: u128 = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u64; n], Vec::<usize>::new()),
            |(counts, touched), i| {
                for &k in g.neighbors(i) {
                    for &j in g.neighbors(k) {
                        if counts[j] == 0 {
                            touched.push(j);
                        }
                        counts[j] += 1;
                    }
                }
                let mut row = 0u128;
                for &j in touched.iter() {
                    row += (counts[j] as u128).pow(2);
                    counts[j] = 0;
                }
                touched.clear();
                row
            },
        )
        .sum();
    let correction: u128 = (0..n)
        .map(|i| {
            let d = g.degree(i) as u128;
            d * (2 * d).saturating_sub(1)
        })
        .sum();
    ((walks - correction) / 8) as u64
}

/// Continuous power-law MLE over positive degrees with `x_min = 1`:
/// `1 + m / Σ ln d_i`.
///
/// Returns `+∞` when every positive degree equals 1.
pub fn power_law_exponent(d: &DegreeSequence) -> Result<f64, StatsError> {
    let (m, log_sum) = d
        .as_slice()
        .iter()
        .filter(|&&x| x >= 1)
        .fold((0usize, 0.0f64), |(m, s), &x| (m + 1, s + (x as f64).ln()));
    if m == 0 {
        return Err(StatsError::NoPositiveDegree);
    }
    Ok(1.0 + m as f64 / log_sum)
}

/// Gini coefficient `Σ_i Σ_j |d_i − d_j| / (2 n Σ d)`, from sorted degrees.
pub fn gini(d: &DegreeSequence) -> Result<f64, StatsError> {
    let total = d.sum();
    if total == 0 {
        return Err(StatsError::ZeroDegreeSum);
    }
    let mut sorted = d.0.clone();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    // Σ_{i<j} (x_j − x_i) over sorted x equals Σ_k (2k − n + 1) x_k (0-based).
    let half: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| (2.0 * k as f64 - n + 1.0) * x as f64)
        .sum();
    Ok(2.0 * half / (2.0 * n * total as f64))
}

/// Degree assortativity: Pearson correlation of endpoint degrees over both
/// orientations of every edge. `None` when either side has zero variance.
pub fn assortativity(g: &Graph) -> Option<f64> {
    let m = g.edge_count();
    if m == 0 {
        return None;
    }
    let (mut s1, mut s2, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for &(i, j) in g.edges() {
        let (x, y) = (g.degree(i) as f64, g.degree(j) as f64);
        s1 += x + y;
        s2 += x * x + y * y;
        sxy += 2.0 * x * y;
    }
    let total = 2.0 * m as f64;
    let mean = s1 / total;
    let var = s2 / total - mean * mean;
    let cov = sxy / total - mean * mean;
    if var <= 1e-12 * s2 / total {
        return None;
    }
    Some((cov / var).clamp(-1.0, 1.0))
}

/// Number of wedges (paths of length two), `Σ_i C(d_i, 2)`.
pub fn wedge_count(g: &Graph) -> u64 {
    (0..g.node_count())
        .map(|i| {
            let d = g.degree(i) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

/// Global clustering coefficient `3 · triangles / wedges`; 0 without wedges.
pub fn clustering(g: &Graph) -> f64 {
    let wedges = wedge_count(g);
    if wedges == 0 {
        return 0.0;
    }
    3.0 * triangle_count(g) as f64 / wedges as f64
}

/// Mean shortest-path length over connected unordered pairs, by BFS from
/// every node.
pub fn characteristic_path_length(g: &Graph) -> Result<f64, StatsError> {
    if g.edge_count() == 0 {
        return Err(StatsError::NoEdges);
    }
    let n = g.node_count();
    let (sum, pairs) = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![usize::MAX; n], VecDeque::new()),
            |(dist, queue), src| {
                dist.iter_mut().for_each(|d| *d = usize::MAX);
                dist[src] = 0;
                queue.clear();
                queue.push_back(src);
                let (mut sum, mut cnt) = (0u64, 0u64);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u];
                    if u > src {
                        sum += du as u64;
                        cnt += 1;
                    }
                    for &v in g.neighbors(u) {
                        if dist[v] == usize::MAX {
                            dist[v] = du + 1;
                            queue.push_back(v);
                        }
                    }
                }
                (sum, cnt)
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(sum as f64 / pairs as f64)
}

/// The full evaluation report. Statistics that are undefined for the
/// graph (or its reference) are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub triangle_count: u64,
    pub square_count: u64,
    pub ntc: Option<f64>,
    pub nsc: Option<f64>,
    pub ple: Option<f64>,
    pub gini: Option<f64>,
    pub assortativity: Option<f64>,
    pub clustering: f64,
    pub cpl: Option<f64>,
    pub edge_overlap: Option<f64>,
    /// Whether a reference graph was supplied.
    pub has_reference: bool,
}

/// Names of the per-graph statistics in report order.
pub const STAT_NAMES: [&str; 8] = [
    "max_degree",
    "ntc",
    "nsc",
    "ple",
    "gini",
    "assortativity",
    "clustering",
    "cpl",
];

impl StatsReport {
    /// The eight evaluation statistics in [`STAT_NAMES`] order.
    pub fn values(&self) -> [Option<f64>; 8] {
        [
            Some(self.max_degree as f64),
            self.ntc,
            self.nsc,
            self.ple,
            self.gini,
            self.assortativity,
            Some(self.clustering),
            self.cpl,
        ]
    }

    /// Names of statistics that are undefined for this graph.
    pub fn undefined(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut flag = |name, v: Option<f64>| {
            if v.is_none() {
                out.push(name);
            }
        };
        if self.has_reference {
            flag("ntc", self.ntc);
            flag("nsc", self.nsc);
            flag("edge_overlap", self.edge_overlap);
        }
        flag("ple", self.ple);
        flag("gini", self.gini);
        flag("assortativity", self.assortativity);
        flag("cpl", self.cpl);
        out
    }

    /// `key = value` lines with 6 significant digits; undefined values print
    /// as `nan` and are listed under `undefined`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("nodes", self.nodes.to_string());
        kv("edges", self.edges.to_string());
        kv("max_degree", self.max_degree.to_string());
        kv("triangle_count", self.triangle_count.to_string());
        kv("square_count", self.square_count.to_string());
        if self.has_reference {
            kv("ntc", fmt_opt(self.ntc));
            kv("nsc", fmt_opt(self.nsc));
        }
        kv("ple", fmt_opt(self.ple));
        kv("gini", fmt_opt(self.gini));
        kv("assortativity", fmt_opt(self.assortativity));
        kv("clustering", fmt_sig6(self.clustering));
        kv("cpl", fmt_opt(self.cpl));
        if self.has_reference {
            kv("edge_overlap", fmt_opt(self.edge_overlap));
        }
        kv("undefined", self.undefined().join(","));
        out
    }

    pub const CSV_HEADER: &'static str =
        "nodes,edges,max_degree,triangle_count,square_count,ntc,nsc,ple,gini,assortativity,clustering,cpl,edge_overlap";

    /// One CSV row matching [`Self::CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.nodes,
            self.edges,
            self.max_degree,
            self.triangle_count,
            self.square_count,
            fmt_opt(self.ntc),
            fmt_opt(self.nsc),
            fmt_opt(self.ple),
            fmt_opt(self.gini),
            fmt_opt(self.assortativity),
            fmt_sig6(self.clustering),
            fmt_opt(self.cpl),
            fmt_opt(self.edge_overlap),
        )
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), fmt_sig6)
}

/// Formats with 6 significant digits in plain decimal notation.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Computes every statistic of `g`, normalizing counts and measuring edge
/// overlap against `reference` when given.
pub fn compute_stats(g: &Graph, reference: Option<&Graph>) -> Result<StatsReport, StatsError> {
    if let Some(r) = reference {
        if r.node_count() != g.node_count() {
            return Err(GraphError::NodeCountMismatch {
                left: g.node_count(),
                right: r.node_count(),
            }
            .into());
        }
    }
    let degrees = g.degree_sequence();
    let tri = triangle_count(g);
    let sq = square_count(g);
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let (ntc, nsc, eo) = match reference {
        Some(r) => (
            ratio(tri, triangle_count(r)),
            ratio(sq, square_count(r)),
            (r.edge_count() > 0)
                .then(|| edge_overlap(g, r))
                .transpose()?,
        ),
        None => (None, None, None),
    };
    Ok(StatsReport {
        nodes: g.node_count(),
        edges: g.edge_count(),
        max_degree: g.max_degree(),
        triangle_count: tri,
        square_count: sq,
        ntc,
        nsc,
        ple: power_law_exponent(&degrees).ok(),
        gini: gini(&degrees).ok(),
        assortativity: assortativity(g),
        clustering: clustering(g),
        cpl: characteristic_path_length(g).ok(),
        edge_overlap: eo,
        has_reference: reference.is_some(),
    })
}
