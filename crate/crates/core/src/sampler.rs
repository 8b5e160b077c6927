//! Reverse-process generation guided by a prescribed degree sequence.
//!
//! Starting from `A^T` (empty, or a forward-corrupted copy of a reference
//! graph), each step `t = T..1`
//!
//! 1. computes the current degrees `d^t`,
//! 2. samples the active set `s^t` from the degree-guided posterior, rescaled
//!    so its expected size equals `h(t)` when node correction is on,
//! 3. queries an [`EdgeModel`] over every pair of active nodes, and
//! 4. samples `A^{t−1}`, optionally rescaling the pair probabilities so the
//!    expected number of generated edges equals `ΔE_t`.
//!
//! Pairs with an inactive endpoint are copied from `A^t` unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diffusion::{
    active_posteriors, forward_marginal_sample, oracle_edge_posterior, DiffusionError,
    NoiseSchedule,
};
use crate::graph::{ActiveMask, DegreeSequence, Edge, Graph, GraphError};
use crate::schedule::DegreeHistogram;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("no node has remaining degree budget but {expected} active nodes are expected")]
    DegenerateNodes { expected: f64 },
    #[error("edge model assigns zero mass to every active pair but {delta_e} edges are required")]
    DegenerateModel { delta_e: f64 },
    #[error("degree sequence sums to an odd number ({0})")]
    OddDegreeSum(usize),
    #[error("degree sequence has {got} entries, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("edge model returned {got} probabilities for {expected} pairs")]
    ModelOutput { got: usize, expected: usize },
    #[error("edge model returned invalid probability {0}")]
    InvalidProbability(f64),
    #[error("start timestep {t} outside 1..={horizon}")]
    StartOutOfRange { t: usize, horizon: usize },
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Everything an edge model may look at when scoring pairs at step `t`.
#[derive(Clone, Copy, Debug)]
pub struct StepState<'a> {
    pub t: usize,
    /// `A^t`.
    pub graph: &'a Graph,
    pub mask: &'a ActiveMask,
    pub d0: &'a DegreeSequence,
    pub dt: &'a DegreeSequence,
    pub sched: &'a NoiseSchedule,
}

/// Edge-formation probabilities `ℓ(i, j) = p(A^{t−1}_{ij} = 1 | A^t, s^t)`.
///
/// Implementations must be deterministic in their inputs and return one
/// probability in `[0, 1]` per requested pair.
pub trait EdgeModel: Send + Sync {
    fn name(&self) -> &str;

    fn predict(&self, step: &StepState<'_>, pairs: &[Edge]) -> Result<Vec<f64>, SampleError>;
}

/// Exact reverse posterior of the forward process around a known clean graph.
#[derive(Clone, Debug)]
pub struct OracleEdgeModel {
    reference: Graph,
}

impl OracleEdgeModel {
    pub fn new(reference: Graph) -> Self {
        Self { reference }
    }

    pub fn reference(&self) -> &Graph {
        &self.reference
    }
}

/// Builds the oracle model for `reference`.
pub fn edge_model_oracle(reference: Graph) -> OracleEdgeModel {
    OracleEdgeModel::new(reference)
}

impl EdgeModel for OracleEdgeModel {
    fn name(&self) -> &str {
        "oracle"
    }

    fn predict(&self, step: &StepState<'_>, pairs: &[Edge]) -> Result<Vec<f64>, SampleError> {
        pairs
            .iter()
            .map(|&(i, j)| {
                oracle_edge_posterior(
                    step.graph.has_edge(i, j),
                    self.reference.has_edge(i, j),
                    step.t,
                    step.sched,
                )
                .map_err(SampleError::from)
            })
            .collect()
    }
}

/// Residual-degree affinity: an absent pair scores proportionally to the
/// product of both endpoints' remaining budgets `max(d⁰ − d^t, 0)`, scaled so
/// the largest score is 1. Pairs already present score 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct DegreeAffinityModel;

/// Builds the degree-affinity model.
pub fn edge_model_degree_affinity() -> DegreeAffinityModel {
    DegreeAffinityModel
}

impl EdgeModel for DegreeAffinityModel {
    fn name(&self) -> &str {
        "degree-affinity"
    }

    fn predict(&self, step: &StepState<'_>, pairs: &[Edge]) -> Result<Vec<f64>, SampleError> {
        let residual = |i: usize| step.d0.0[i].saturating_sub(step.dt.0[i]) as f64;
        let mut scores: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut present = Vec::with_capacity(pairs.len());
        let mut max_raw: f64 = 0.0;
        for &(i, j) in pairs {
            let has = step.graph.has_edge(i, j);
            present.push(has);
            let raw = if has { 0.0 } else { residual(i) * residual(j) };
            max_raw = max_raw.max(raw);
            scores.push(raw);
        }
        for (s, has) in scores.iter_mut().zip(present) {
            *s = if has {
                1.0
            } else if max_raw > 0.0 {
                *s / max_raw
            } else {
                0.0
            };
        }
        Ok(scores)
    }
}

/// Which volume corrections to apply, plus ablation switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerMode {
    /// Rescale active-node probabilities to the expected active count `h(t)`.
    pub node_correction: bool,
    /// Rescale pair probabilities to the edge budget `ΔE_t`.
    pub edge_correction: bool,
    /// Resample edges already present among active nodes. When off they are
    /// carried over and `ΔE_t` drops its existing-edge term.
    pub regenerate_existing: bool,
    /// Abort on degenerate steps instead of skipping them.
    pub strict: bool,
}

impl SamplerMode {
    pub fn new(node_correction: bool, edge_correction: bool) -> Self {
        Self {
            node_correction,
            edge_correction,
            regenerate_existing: true,
            strict: false,
        }
    }

    /// Both corrections on.
    pub fn volume_preserved() -> Self {
        Self::new(true, true)
    }

    /// Both corrections off.
    pub fn vanilla() -> Self {
        Self::new(false, false)
    }
}

impl Default for SamplerMode {
    fn default() -> Self {
        Self::volume_preserved()
    }
}

/// Reweights degree-guided node probabilities so they sum to `expected`,
/// clamping at 1. Returns the probabilities and the number of clamps.
pub fn reweight_nodes(p: &[f64], expected: f64) -> Result<(Vec<f64>, usize), SampleError> {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        if expected > 0.0 {
            return Err(SampleError::DegenerateNodes { expected });
        }
        return Ok((vec![0.0; p.len()], 0));
    }
    let w = expected / total;
    let mut clamped = 0;
    let q = p
        .iter()
        .map(|&pi| {
            let v = w * pi;
            if v > 1.0 {
                clamped += 1;
                1.0
            } else {
                v.max(0.0)
            }
        })
        .collect();
    Ok((q, clamped))
}

/// Node-corrected posterior `q̂_i = clamp(h(t) p_i / Σ_j p_j, 0, 1)` with
/// `p_i` the degree-guided posterior.
pub fn node_reweighted_posterior(
    dt: &DegreeSequence,
    d0: &DegreeSequence,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<Vec<f64>, SampleError> {
    check_lengths(dt, d0)?;
    for (&cur, &init) in dt.0.iter().zip(&d0.0) {
        if cur > init {
            return Err(DiffusionError::DegreeBudgetViolated { dt: cur, d0: init }.into());
        }
    }
    let p = active_posteriors(dt, d0, t, sched)?;
    let h = expected_active_at(d0, t, sched);
    Ok(reweight_nodes(&p, h)?.0)
}

fn expected_active_at(d0: &DegreeSequence, t: usize, sched: &NoiseSchedule) -> f64 {
    DegreeHistogram::new(d0).expected_active(sched.alpha_bar(t - 1) * sched.beta(t))
}

fn check_lengths(a: &DegreeSequence, b: &DegreeSequence) -> Result<(), SampleError> {
    if a.len() != b.len() {
        return Err(SampleError::LengthMismatch {
            got: a.len(),
            expected: b.len(),
        });
    }
    Ok(())
}

/// Edge budget `ΔE_t = ((ᾱ_{t−1} − ᾱ_t) Σ d⁰ + sᵀ A^t s) / 2`.
pub fn delta_edges(
    d0: &DegreeSequence,
    at: &Graph,
    s: &ActiveMask,
    t: usize,
    sched: &NoiseSchedule,
) -> Result<f64, SampleError> {
    if t == 0 || t > sched.horizon() {
        return Err(DiffusionError::TimestepOutOfRange {
            t,
            horizon: sched.horizon(),
        }
        .into());
    }
    let inside = at.active_subgraph_edge_count(s)?;
    Ok(fresh_edge_budget(d0, t, sched) + inside as f64)
}

/// `(ᾱ_{t−1} − ᾱ_t) E⁰`, the new-edge share of `ΔE_t`.
fn fresh_edge_budget(d0: &DegreeSequence, t: usize, sched: &NoiseSchedule) -> f64 {
    ((sched.alpha_bar(t - 1) - sched.alpha_bar(t)) * d0.sum() as f64 / 2.0).max(0.0)
}

/// Probabilities after edge reweighting, with the clamp count.
#[derive(Clone, Debug, PartialEq)]
pub struct ReweightedEdges {
    pub probs: Vec<f64>,
    pub clamped: usize,
    /// Expected mass lost to clamping, `Σ max(w ℓ − 1, 0)`.
    pub clamped_mass: f64,
}

/// Scales raw pair probabilities by `ΔE / Σ raw`, clamping to `[0, 1]`.
pub fn edge_reweighted_probs(raw: &[f64], delta_e: f64) -> Result<ReweightedEdges, SampleError> {
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        if delta_e > 0.0 {
            return Err(SampleError::DegenerateModel { delta_e });
        }
        return Ok(ReweightedEdges {
            probs: vec![0.0; raw.len()],
            clamped: 0,
            clamped_mass: 0.0,
        });
    }
    let w = delta_e / total;
    let mut clamped = 0;
    let mut clamped_mass = 0.0;
    let probs = raw
        .iter()
        .map(|&l| {
            let v = w * l;
            if v > 1.0 {
                clamped += 1;
                clamped_mass += v - 1.0;
                1.0
            } else {
                v.max(0.0)
            }
        })
        .collect();
    Ok(ReweightedEdges {
        probs,
        clamped,
        clamped_mass,
    })
}

/// Diagnostics of one reverse step `A^t → A^{t−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub active_nodes: usize,
    /// Edge count of `A^{t−1}`, the graph produced by this step.
    pub edges: usize,
    /// `ΔE_t`; `NaN` when edge correction is off.
    pub delta_e: f64,
    pub clamp_events_nodes: usize,
    pub clamp_events_edges: usize,
    /// Nodes whose degree in `A^t` exceeds their target degree.
    pub over_budget_nodes: usize,
    /// Set when the step could not honour its node or edge budget
    /// (no eligible node, or a model with zero mass on every active pair).
    pub degenerate: bool,
}

/// A full reverse run.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRun {
    pub final_graph: Graph,
    /// Records in denoising order, `t = t_start` down to 1.
    pub per_t: Vec<StepRecord>,
    pub seed: u64,
}

impl GenerationRun {
    pub fn max_over_budget(&self) -> usize {
        self.per_t
            .iter()
            .map(|r| r.over_budget_nodes)
            .max()
            .unwrap_or(0)
    }

    pub fn total_over_budget(&self) -> usize {
        self.per_t.iter().map(|r| r.over_budget_nodes).sum()
    }

    pub fn degenerate_steps(&self) -> usize {
        self.per_t.iter().filter(|r| r.degenerate).count()
    }

    /// CSV `t,active_nodes,edges,delta_E,clamp_events_nodes,clamp_events_edges`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,active_nodes,edges,delta_E,clamp_events_nodes,clamp_events_edges\n");
        for r in &self.per_t {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t, r.active_nodes, r.edges, r.delta_e, r.clamp_events_nodes, r.clamp_events_edges
            ));
        }
        out
    }
}

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    p > 0.0 && rng.random::<f64>() < p
}

/// Active-node probabilities at step `t` under `mode`, with clamp count.
///
/// Nodes at or over their budget (`d^t_i ≥ d⁰_i`) get probability 0.
pub fn active_probabilities(
    dt: &DegreeSequence,
    d0: &DegreeSequence,
    t: usize,
    sched: &NoiseSchedule,
    mode: SamplerMode,
) -> Result<(Vec<f64>, usize), SampleError> {
    check_lengths(dt, d0)?;
    let p = active_posteriors(dt, d0, t, sched)?;
    if !mode.node_correction {
        return Ok((p, 0));
    }
    reweight_nodes(&p, expected_active_at(d0, t, sched))
}

/// Samples `A^{t−1}` given `A^t` and an already drawn active mask.
#[allow(clippy::too_many_arguments)]
pub fn reverse_step<R: Rng + ?Sized>(
    at: &Graph,
    mask: &ActiveMask,
    d0: &DegreeSequence,
    t: usize,
    model: &dyn EdgeModel,
    sched: &NoiseSchedule,
    mode: SamplerMode,
    rng: &mut R,
) -> Result<(Graph, StepRecord), SampleError> {
    at.check_mask(mask)?;
    let dt = at.degree_sequence();
    let active = mask.active_nodes();
    let mut pairs: Vec<Edge> =
        Vec::with_capacity(active.len() * active.len().saturating_sub(1) / 2);
    for (a, &i) in active.iter().enumerate() {
        for &j in &active[a + 1..] {
            if mode.regenerate_existing || !at.has_edge(i, j) {
                pairs.push((i, j));
            }
        }
    }
    let step = StepState {
        t,
        graph: at,
        mask,
        d0,
        dt: &dt,
        sched,
    };
    let raw = model.predict(&step, &pairs)?;
    if raw.len() != pairs.len() {
        return Err(SampleError::ModelOutput {
            got: raw.len(),
            expected: pairs.len(),
        });
    }
    if let Some(&bad) = raw.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(SampleError::InvalidProbability(bad));
    }

    let mut degenerate = false;
    let mut clamp_edges = 0;
    let mut delta_e = f64::NAN;
    let probs = if mode.edge_correction {
        delta_e = if mode.regenerate_existing {
            delta_edges(d0, at, mask, t, sched)?
        } else {
            fresh_edge_budget(d0, t, sched)
        };
        match edge_reweighted_probs(&raw, delta_e) {
            Ok(r) => {
                clamp_edges = r.clamped;
                r.probs
            }
            Err(e @ SampleError::DegenerateModel { .. }) => {
                if mode.strict {
                    return Err(e);
                }
                degenerate = true;
                vec![0.0; raw.len()]
            }
            Err(e) => return Err(e),
        }
    } else {
        raw
    };

    let mut edges: Vec<Edge> = at
        .edges()
        .iter()
        .copied()
        .filter(|&(i, j)| !(mask.is_active(i) && mask.is_active(j)) || !mode.regenerate_existing)
        .collect();
    for (&pair, &p) in pairs.iter().zip(&probs) {
        if bernoulli(rng, p) {
            edges.push(pair);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let next = Graph::from_canonical(at.node_count(), edges);
    let record = StepRecord {
        t,
        active_nodes: active.len(),
        edges: next.edge_count(),
        delta_e,
        clamp_events_nodes: 0,
        clamp_events_edges: clamp_edges,
        over_budget_nodes: dt.0.iter().zip(&d0.0).filter(|(c, i)| c > i).count(),
        degenerate,
    };
    Ok((next, record))
}

fn denoise<R: Rng + ?Sized>(
    start: Graph,
    t_start: usize,
    d0: &DegreeSequence,
    model: &dyn EdgeModel,
    sched: &NoiseSchedule,
    mode: SamplerMode,
    rng: &mut R,
) -> Result<(Graph, Vec<StepRecord>), SampleError> {
    let mut current = start;
    let mut records = Vec::with_capacity(t_start);
    for t in (1..=t_start).rev() {
        let dt = current.degree_sequence();
        let (probs, clamp_nodes, node_degenerate) =
            match active_probabilities(&dt, d0, t, sched, mode) {
                Ok((p, c)) => (p, c, false),
                Err(e @ SampleError::DegenerateNodes { .. }) => {
                    if mode.strict {
                        return Err(e);
                    }
                    (vec![0.0; d0.len()], 0, true)
                }
                Err(e) => return Err(e),
            };
        let mask = ActiveMask(probs.iter().map(|&p| bernoulli(rng, p)).collect());
        let (next, mut rec) = reverse_step(&current, &mask, d0, t, model, sched, mode, rng)?;
        rec.clamp_events_nodes = clamp_nodes;
        rec.degenerate |= node_degenerate;
        records.push(rec);
        current = next;
    }
    Ok((current, records))
}

fn check_degrees(d0: &DegreeSequence) -> Result<(), SampleError> {
    let total = d0.sum();
    if total % 2 == 1 {
        return Err(SampleError::OddDegreeSum(total));
    }
    Ok(())
}

/// Generates a graph for degree sequence `d0` from the empty graph at `T`.
pub fn sample_degree_guided(
    d0: &DegreeSequence,
    model: &dyn EdgeModel,
    sched: &NoiseSchedule,
    mode: SamplerMode,
    seed: u64,
) -> Result<GenerationRun, SampleError> {
    check_degrees(d0)?;
    let mut rng = rng_from_seed(seed);
    let (final_graph, per_t) = denoise(
        Graph::empty(d0.len()),
        sched.horizon(),
        d0,
        model,
        sched,
        mode,
        &mut rng,
    )?;
    Ok(GenerationRun {
        final_graph,
        per_t,
        seed,
    })
}

/// Corrupts `a0` to `A^{t_start} ~ q(· | a0)` and denoises back to `t = 0`.
/// Small `t_start` keeps most of `a0`; `t_start = T` starts (nearly) empty.
pub fn sample_with_eo_control(
    a0: &Graph,
    t_start: usize,
    model: &dyn EdgeModel,
    sched: &NoiseSchedule,
    mode: SamplerMode,
    seed: u64,
) -> Result<GenerationRun, SampleError> {
    if t_start == 0 || t_start > sched.horizon() {
        return Err(SampleError::StartOutOfRange {
            t: t_start,
            horizon: sched.horizon(),
        });
    }
    let d0 = a0.degree_sequence();
    let mut rng = rng_from_seed(seed);
    let start = forward_marginal_sample(a0, sched, t_start, &mut rng)?;
    let (final_graph, per_t) = denoise(start, t_start, &d0, model, sched, mode, &mut rng)?;
    Ok(GenerationRun {
        final_graph,
        per_t,
        seed,
    })
}
