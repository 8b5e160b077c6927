//! The edge-removal forward process and its exact distributions.
//!
//! Each surviving edge is deleted independently with probability `β_t` at
//! step `t`, so after `t` steps an original edge survives with probability
//! `ᾱ_t = Π_{τ≤t} (1 − β_τ)`. Node degrees are binomial, and whether a node
//! loses an edge at a step (its activity) has closed-form forward and
//! posterior probabilities, all of which live here.

use rand::Rng;
use thiserror::Error;

use crate::graph::{ActiveMask, DegreeSequence, Graph};
use crate::numeric::{binomial_pmf, one_minus_pow};

#[derive(Debug, Error, PartialEq)]
pub enum DiffusionError {
    #[error("timestep {t} outside 0..={horizon}")]
    TimestepOutOfRange { t: usize, horizon: usize },
    #[error("schedule parameter at step {t} is {value}, expected a value in [0, 1]")]
    InvalidParameter { t: usize, value: f64 },
    #[error("schedule horizon must be at least 1")]
    EmptySchedule,
    #[error("current degree {dt} exceeds initial degree {d0}")]
    DegreeBudgetViolated { dt: usize, d0: usize },
    #[error("no noise has been applied by step {t} (1 - alpha_bar = 0)")]
    NoNoise { t: usize },
    #[error("edge present at step t but absent from the clean graph")]
    ImpossibleEdgeState,
}

/// Per-step edge noise: `β_t`, `α_t = 1 − β_t` and `ᾱ_t`, `t = 1..=T`.
///
/// `alpha_bar` has `T + 1` entries with `alpha_bar[0] = 1`. The prior edge
/// probability of the terminal distribution is fixed to 0 (pure removal).
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bar: Vec<f64>,
}

impl NoiseSchedule {
    /// Builds a schedule from removal probabilities `β_1..β_T`.
    pub fn from_betas(betas: Vec<f64>) -> Result<Self, DiffusionError> {
        if betas.is_empty() {
            return Err(DiffusionError::EmptySchedule);
        }
        for (k, &b) in betas.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) {
                return Err(DiffusionError::InvalidParameter { t: k + 1, value: b });
            }
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bar = Vec::with_capacity(betas.len() + 1);
        alpha_bar.push(1.0);
        let mut acc = 1.0;
        for a in &alphas {
            acc *= a;
            alpha_bar.push(acc);
        }
        Ok(Self {
            betas,
            alphas,
            alpha_bar,
        })
    }

    /// Builds a schedule from survival probabilities `α_1..α_T`.
    pub fn from_alphas(alphas: &[f64]) -> Result<Self, DiffusionError> {
        for (k, &a) in alphas.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(DiffusionError::InvalidParameter { t: k + 1, value: a });
            }
        }
        Self::from_betas(alphas.iter().map(|a| 1.0 - a).collect())
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> usize {
        self.betas.len()
    }

    /// `β_t` for `1 ≤ t ≤ T`.
    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    /// `α_t` for `1 ≤ t ≤ T`.
    pub fn alpha(&self, t: usize) -> f64 {
        self.alphas[t - 1]
    }

    /// `ᾱ_t` for `0 ≤ t ≤ T`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `ᾱ_0..ᾱ_T`.
    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// Edge probability of the terminal distribution; always 0 here.
    pub fn prior_p(&self) -> f64 {
        0.0
    }

    fn check_step(&self, t: usize) -> Result<(), DiffusionError> {
        if t == 0 || t > self.horizon() {
            return Err(DiffusionError::TimestepOutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }

    /// `β_t ᾱ_{t−1} / (1 − ᾱ_t)`: the probability that an edge missing at
    /// step `t` but present in the clean graph was removed exactly at `t`.
    pub fn removal_posterior(&self, t: usize) -> Result<f64, DiffusionError> {
        self.check_step(t)?;
        let denom = 1.0 - self.alpha_bar[t];
        if denom <= 0.0 {
            return Err(DiffusionError::NoNoise { t });
        }
        if t == 1 {
            // ᾱ_0 = 1 and 1 − ᾱ_1 = β_1, so the ratio is exactly one.
            return Ok(1.0);
        }
        Ok((self.betas[t - 1] * self.alpha_bar[t - 1] / denom).clamp(0.0, 1.0))
    }
}

fn rng_keep<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

/// Samples `A^t ~ q(A^t | A^0)`: every edge of `a0` survives independently
/// with probability `ᾱ_t`. `t = 0` returns a copy of `a0`.
pub fn forward_marginal_sample<R: Rng + ?Sized>(
    a0: &Graph,
    sched: &NoiseSchedule,
    t: usize,
    rng: &mut R,
) -> Result<Graph, DiffusionError> {
    if t > sched.horizon() {
        return Err(DiffusionError::TimestepOutOfRange {
            t,
            horizon: sched.horizon(),
        });
    }
    let keep = sched.alpha_bar(t);
    let edges = a0
        .edges()
        .iter()
        .copied()
        .filter(|_| rng_keep(rng, keep))
        .collect();
    Ok(Graph::from_canonical(a0.node_count(), edges))
}

/// One step of a forward trajectory: the graph `A^t` and mask `s^t`.
#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub t: usize,
    pub graph: Graph,
    pub mask: ActiveMask,
}

/// Lazily simulated forward trajectory `A^1..A^T`.
///
/// Holding only the current graph keeps memory at `O(E)` regardless of `T`.
pub struct ForwardTrajectory<'a, R> {
    sched: &'a NoiseSchedule,
    current: Graph,
    t: usize,
    rng: R,
}

impl<R: Rng> Iterator for ForwardTrajectory<'_, R> {
    type Item = TrajectoryStep;

    fn next(&mut self) -> Option<TrajectoryStep> {
        if self.t >= self.sched.horizon() {
            return None;
        }
        self.t += 1;
        let keep = self.sched.alpha(self.t);
        let n = self.current.node_count();
        let mut mask = vec![false; n];
        let mut kept = Vec::with_capacity(self.current.edge_count());
        for &(i, j) in self.current.edges() {
            if rng_keep(&mut self.rng, keep) {
                kept.push((i, j));
            } else {
                mask[i] = true;
                mask[j] = true;
            }
        }
        let next = Graph::from_canonical(n, kept);
        self.current = next.clone();
        Some(TrajectoryStep {
            t: self.t,
            graph: next,
            mask: ActiveMask(mask),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.sched.horizon() - self.t;
        (rest, Some(rest))
    }
}

/// Simulates `A^1..A^T` from `a0`. Step `t` removes each surviving edge with
/// probability `β_t`; `s^t_i` is set exactly when node `i` lost an edge.
pub fn forward_trajectory<'a, R: Rng>(
    a0: &Graph,
    sched: &'a NoiseSchedule,
    rng: R,
) -> ForwardTrajectory<'a, R> {
    ForwardTrajectory {
        sched,
        current: a0.clone(),
        t: 0,
        rng,
    }
}

/// Binomial distribution `Bin(n, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialParams {
    pub n: usize,
    pub p: f64,
}

impl BinomialParams {
    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }

    pub fn variance(&self) -> f64 {
        self.n as f64 * self.p * (1.0 - self.p)
    }

    pub fn pmf(&self, k: usize) -> f64 {
        binomial_pmf(k, self.n, self.p)
    }
}

/// Marginal of a node's degree after `t` steps: `d^t_i ~ Bin(d^0_i, ᾱ_t)`.
/// `t = 0` is accepted and gives the point mass at `d0`.
pub fn degree_marginal_params(
    d0: usize,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<BinomialParams, DiffusionError> {
    if t > sched.horizon() {
        return Err(DiffusionError::TimestepOutOfRange {
            t,
            horizon: sched.horizon(),
        });
    }
    Ok(BinomialParams {
        n: d0,
        p: sched.alpha_bar(t),
    })
}

/// `q(s^t_i = 1 | d^{t−1}_i) = 1 − (1 − β_t)^{d_prev}`.
pub fn active_prob_given_prev_degree(
    d_prev: usize,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<f64, DiffusionError> {
    sched.check_step(t)?;
    Ok(one_minus_pow(sched.beta(t), d_prev))
}

/// Degree-guided active-node posterior
/// `q(s^t_i = 1 | d^t_i, d^0_i) = 1 − (1 − β_t ᾱ_{t−1}/(1 − ᾱ_t))^{d0 − dt}`.
pub fn active_posterior(
    dt: usize,
    d0: usize,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<f64, DiffusionError> {
    if dt > d0 {
        return Err(DiffusionError::DegreeBudgetViolated { dt, d0 });
    }
    let r = sched.removal_posterior(t)?;
    Ok(one_minus_pow(r, d0 - dt))
}

/// Per-node posterior probabilities for a whole degree sequence. Nodes whose
/// current degree already meets or exceeds the initial degree get 0.
pub(crate) fn active_posteriors(
    dt: &DegreeSequence,
    d0: &DegreeSequence,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<Vec<f64>, DiffusionError> {
    let r = sched.removal_posterior(t)?;
    Ok(dt
        .as_slice()
        .iter()
        .zip(d0.as_slice())
        .map(|(&cur, &init)| one_minus_pow(r, init.saturating_sub(cur)))
        .collect())
}

/// Exact reverse-edge posterior `q(A^{t−1}_{ij} = 1 | A^t_{ij}, A^0_{ij})`.
pub fn oracle_edge_posterior(
    at_ij: bool,
    a0_ij: bool,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<f64, DiffusionError> {
    sched.check_step(t)?;
    match (at_ij, a0_ij) {
        (true, false) => Err(DiffusionError::ImpossibleEdgeState),
        (true, true) => Ok(1.0),
        (false, false) => Ok(0.0),
        (false, true) => sched.removal_posterior(t),
    }
}

/// Renders a trajectory as CSV with columns `t,num_edges,num_active_nodes`.
pub fn trajectory_csv<I>(steps: I) -> String
where
    I: IntoIterator<Item = TrajectoryStep>,
{
    let mut out = String::from("t,num_edges,num_active_nodes\n");
    for s in steps {
        out.push_str(&format!(
            "{},{},{}\n",
            s.t,
            s.graph.edge_count(),
            s.mask.count()
        ));
    }
    out
}
