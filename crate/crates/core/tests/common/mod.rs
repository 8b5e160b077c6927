#![allow(dead_code, clippy::needless_range_loop)]

use edgediff_core::graph::Graph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) as a dense adjacency matrix.
pub fn random_dense(n: usize, p: f64, rng: &mut impl Rng) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                a[i][j] = true;
                a[j][i] = true;
            }
        }
    }
    a
}

pub fn dense_to_graph(a: &[Vec<bool>]) -> Graph {
    let n = a.len();
    let mut e = vec![];
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] {
                e.push((i, j));
            }
        }
    }
    Graph::from_edges(n, e).unwrap()
}

pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    dense_to_graph(&random_dense(n, p, rng))
}

/// Graph with exactly `m` uniformly chosen edges.
pub fn random_graph_m(n: usize, m: usize, rng: &mut impl Rng) -> Graph {
    let mut all = vec![];
    for i in 0..n {
        for j in i + 1..n {
            all.push((i, j));
        }
    }
    all.shuffle(rng);
    all.truncate(m);
    Graph::from_edges(n, all).unwrap()
}

pub fn permute(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(
        g.node_count(),
        g.edges().iter().map(|&(i, j)| (perm[i], perm[j])),
    )
    .unwrap()
}

/// Binomial pmf row for `Bin(n, p)` built by convolving `n` Bernoulli
/// variables, with no factorials or logs involved.
pub fn binomial_row(n: usize, p: f64) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (k, &v) in row.iter().enumerate() {
            next[k] += v * (1.0 - p);
            next[k + 1] += v * p;
        }
        row = next;
    }
    row
}

/// `E[#active at t]` by brute force: degree pmf by convolution, then the
/// per-degree activity probability by repeated multiplication.
pub fn naive_expected_active(d0: &[usize], betas: &[f64], t: usize) -> f64 {
    let mut bar_prev = 1.0;
    for b in &betas[..t - 1] {
        bar_prev *= 1.0 - b;
    }
    let beta = betas[t - 1];
    d0.iter()
        .map(|&d| {
            binomial_row(d, bar_prev)
                .iter()
                .enumerate()
                .map(|(k, &pk)| {
                    let mut stay = 1.0;
                    for _ in 0..k {
                        stay *= 1.0 - beta;
                    }
                    pk * (1.0 - stay)
                })
                .sum::<f64>()
        })
        .sum()
}
