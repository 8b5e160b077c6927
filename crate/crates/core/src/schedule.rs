//! Active-node-controlled noise schedules.
//!
//! Given initial degrees `d⁰` and an edge schedule `α_{1:T}`, the expected
//! number of nodes that lose at least one edge at step `t` is
//!
//! ```text
//! h(t) = Σ_i Σ_{k=1}^{d⁰_i} (1 − α_t^k) Bin(k; d⁰_i, ᾱ_{t−1})
//!      = Σ_i 1 − (1 − ᾱ_{t−1} β_t)^{d⁰_i}
//! ```
//!
//! The solver inverts this relation: for a desired profile `γ_{1:T}` it finds
//! `α_{1:T}` with `h(t) ≈ K·n·γ_t`, choosing the scale `K` by bisection so that
//! the schedule also drives `ᾱ_T` to (nearly) zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::diffusion::{DiffusionError, NoiseSchedule};
use crate::graph::DegreeSequence;
use crate::numeric::{binomial_pmf, one_minus_pow};

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("degree sequence has no edges; expected active nodes are identically zero")]
    Infeasible,
    #[error("gamma length {gamma} does not match schedule length {alphas}")]
    LengthMismatch { gamma: usize, alphas: usize },
    #[error("gamma_{t} = {value} is not positive")]
    NonPositiveGamma { t: usize, value: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown gamma schedule `{0}` (expected constant, poly1, poly2 or poly3)")]
    UnknownGamma(String),
    #[error("solver did not satisfy both tolerances after {} iterations (K = {}, loss = {}, alpha_bar_T = {})", .0.iterations, .0.k, .0.loss, .0.alpha_bar_t)]
    NotConverged(Box<SolveReport>),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error("schedule file line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Positive degrees grouped as `(degree, count)`.
///
/// Zero-degree nodes contribute nothing to `h` and are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeHistogram {
    groups: Vec<(usize, f64)>,
    nodes: usize,
}

impl DegreeHistogram {
    pub fn new(d0: &DegreeSequence) -> Self {
        Self {
            groups: d0
                .histogram()
                .into_iter()
                .map(|(d, c)| (d, c as f64))
                .collect(),
            nodes: d0.len(),
        }
    }

    /// Total node count, including isolated nodes.
    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn is_trivial(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of nodes with positive degree, an upper bound on `h`.
    pub fn positive_nodes(&self) -> f64 {
        self.groups.iter().map(|&(_, c)| c).sum()
    }

    /// `Σ_i 1 − (1 − x)^{d_i}` where `x = ᾱ_{t−1} β_t`.
    pub fn expected_active(&self, removal: f64) -> f64 {
        self.groups
            .iter()
            .map(|&(d, c)| c * one_minus_pow(removal, d))
            .sum()
    }
}

/// Closed-form `h_{d⁰}(α_{1:t}, t)`; `alphas` must hold at least `t` entries.
pub fn expected_active_nodes(d0: &DegreeSequence, alphas: &[f64], t: usize) -> f64 {
    let (prev_bar, beta) = step_terms(alphas, t);
    DegreeHistogram::new(d0).expected_active(prev_bar * beta)
}

/// Direct double sum over the binomial law of `d^{t−1}_i`, node by node.
pub fn expected_active_nodes_direct(d0: &DegreeSequence, alphas: &[f64], t: usize) -> f64 {
    let (prev_bar, _) = step_terms(alphas, t);
    let alpha_t = alphas[t - 1];
    d0.as_slice()
        .iter()
        .map(|&d| {
            if t == 1 {
                return 1.0 - alpha_t.powi(d as i32);
            }
            (1..=d)
                .map(|k| (1.0 - alpha_t.powi(k as i32)) * binomial_pmf(k, d, prev_bar))
                .sum::<f64>()
        })
        .sum()
}

fn step_terms(alphas: &[f64], t: usize) -> (f64, f64) {
    assert!(
        t >= 1 && t <= alphas.len(),
        "timestep {t} outside 1..={}",
        alphas.len()
    );
    let prev_bar: f64 = alphas[..t - 1].iter().product();
    (prev_bar, 1.0 - alphas[t - 1])
}

/// `h(t)` for every `t = 1..=T` of a schedule.
pub fn expected_active_curve(d0: &DegreeSequence, sched: &NoiseSchedule) -> Vec<f64> {
    let hist = DegreeHistogram::new(d0);
    (1..=sched.horizon())
        .map(|t| hist.expected_active(sched.alpha_bar(t - 1) * sched.beta(t)))
        .collect()
}

/// Targets `g_t = K·n·γ_t`.
pub fn targets(k: f64, n: usize, gamma: &[f64]) -> Vec<f64> {
    gamma.iter().map(|g| k * n as f64 * g).collect()
}

/// `Σ_t (h(t) − K·n·γ_t)²`.
pub fn schedule_loss(
    alphas: &[f64],
    k: f64,
    gamma: &[f64],
    d0: &DegreeSequence,
) -> Result<f64, ScheduleError> {
    if alphas.len() != gamma.len() {
        return Err(ScheduleError::LengthMismatch {
            gamma: gamma.len(),
            alphas: alphas.len(),
        });
    }
    let hist = DegreeHistogram::new(d0);
    let mut prev_bar = 1.0;
    let mut loss = 0.0;
    for (&a, g) in alphas.iter().zip(targets(k, d0.len(), gamma)) {
        let h = hist.expected_active(prev_bar * (1.0 - a));
        loss += (h - g).powi(2);
        prev_bar *= a;
    }
    Ok(loss)
}

/// Desired active-node profile `γ_{1:T}` and its solved scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveNodeSchedule {
    pub gamma: Vec<f64>,
    pub k: f64,
    pub n: usize,
}

impl ActiveNodeSchedule {
    pub fn targets(&self) -> Vec<f64> {
        targets(self.k, self.n, &self.gamma)
    }
}

/// How the outer bisection reacts to a violated tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BracketRule {
    /// Loss too high → `K` too large, shrink from above; `ᾱ_T` too high →
    /// `K` too small, raise from below.
    #[default]
    LossShrinksK,
    /// The opposite assignment: loss too high raises the lower bracket.
    LossRaisesK,
}

impl BracketRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LossShrinksK => "loss-shrinks-k",
            Self::LossRaisesK => "loss-raises-k",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "loss-shrinks-k" => Some(Self::LossShrinksK),
            "loss-raises-k" => Some(Self::LossRaisesK),
            _ => None,
        }
    }
}

/// Tolerances and brackets of the schedule solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Loss tolerance, in squared node units.
    pub eps1: f64,
    /// Tolerance on `ᾱ_T = Π α_t`.
    pub eps2: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub max_outer_iters: usize,
    pub alpha_floor: f64,
    pub bracket_rule: BracketRule,
}

/// Absolute tolerance of the per-step bisection on `α_t`.
pub const ALPHA_TOL: f64 = 1e-12;
/// Largest admissible `α_t`.
pub const ALPHA_CEIL: f64 = 1.0 - 1e-12;

impl SolverConfig {
    /// Defaults for a graph with `n` nodes and horizon `horizon`:
    /// `ε₁ = (0.01 n)² T`, `ε₂ = 1e-5`, `K ∈ [1e-4, 10]`, 60 outer iterations,
    /// `α ≥ 1e-6`.
    pub fn defaults(n: usize, horizon: usize) -> Self {
        Self {
            eps1: (0.01 * n as f64).powi(2) * horizon as f64,
            eps2: 1e-5,
            k_min: 1e-4,
            k_max: 10.0,
            max_outer_iters: 60,
            alpha_floor: 1e-6,
            bracket_rule: BracketRule::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let bad = |m: &str| Err(ScheduleError::InvalidConfig(m.to_string()));
        if self.eps1.is_nan() || self.eps1 < 0.0 {
            return bad("eps1 must be nonnegative");
        }
        if !(self.eps2 > 0.0 && self.eps2 < 1.0) {
            return bad("eps2 must lie in (0, 1)");
        }
        if !(self.k_min > 0.0 && self.k_min < self.k_max && self.k_max.is_finite()) {
            return bad("need 0 < k_min < k_max < inf");
        }
        if !(self.alpha_floor > 0.0 && self.alpha_floor < ALPHA_CEIL) {
            return bad("alpha_floor must lie in (0, 1)");
        }
        if self.max_outer_iters == 0 {
            return bad("max_outer_iters must be positive");
        }
        Ok(())
    }
}

/// Result of the inner argmin for a fixed `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerSolution {
    pub alphas: Vec<f64>,
    pub loss: f64,
    pub expected: Vec<f64>,
    pub targets: Vec<f64>,
    /// Steps whose target lay outside the reachable range of `h`.
    pub clamped_steps: usize,
}

impl InnerSolution {
    pub fn alpha_bar_t(&self) -> f64 {
        self.alphas.iter().product()
    }
}

fn check_gamma(gamma: &[f64]) -> Result<(), ScheduleError> {
    for (k, &g) in gamma.iter().enumerate() {
        if !(g > 0.0 && g.is_finite()) {
            return Err(ScheduleError::NonPositiveGamma { t: k + 1, value: g });
        }
    }
    Ok(())
}

/// Solves the inner problem for a fixed `K` one timestep at a time.
///
/// `h(t)` depends on `α_{1:t−1}` only through `ᾱ_{t−1}` and is strictly
/// decreasing in `α_t`, so each step is a scalar root find. Unreachable
/// targets clamp `α_t` to `alpha_floor` or [`ALPHA_CEIL`] and the residual is
/// charged to the loss.
pub fn solve_alphas_given_k(
    k: f64,
    gamma: &[f64],
    d0: &DegreeSequence,
    cfg: &SolverConfig,
) -> Result<InnerSolution, ScheduleError> {
    let hist = DegreeHistogram::new(d0);
    solve_inner(&hist, k, gamma, cfg)
}

fn solve_inner(
    hist: &DegreeHistogram,
    k: f64,
    gamma: &[f64],
    cfg: &SolverConfig,
) -> Result<InnerSolution, ScheduleError> {
    if hist.is_trivial() {
        return Err(ScheduleError::Infeasible);
    }
    check_gamma(gamma)?;
    let tgts = targets(k, hist.node_count(), gamma);
    let mut alphas = Vec::with_capacity(gamma.len());
    let mut expected = Vec::with_capacity(gamma.len());
    let mut prev_bar = 1.0;
    let mut loss = 0.0;
    let mut clamped = 0;
    for &g in &tgts {
        let h_at = |a: f64| hist.expected_active(prev_bar * (1.0 - a));
        let alpha = if g >= h_at(cfg.alpha_floor) {
            clamped += 1;
            cfg.alpha_floor
        } else if g <= h_at(ALPHA_CEIL) {
            clamped += 1;
            ALPHA_CEIL
        } else {
            let (mut lo, mut hi) = (cfg.alpha_floor, ALPHA_CEIL);
            while hi - lo > ALPHA_TOL {
                let mid = 0.5 * (lo + hi);
                if h_at(mid) > g {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let h = h_at(alpha);
        loss += (h - g).powi(2);
        expected.push(h);
        alphas.push(alpha);
        prev_bar *= alpha;
    }
    Ok(InnerSolution {
        alphas,
        loss,
        expected,
        targets: tgts,
        clamped_steps: clamped,
    })
}

/// Outcome of [`solve_schedule`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub alphas: Vec<f64>,
    pub k: f64,
    pub loss: f64,
    pub alpha_bar_t: f64,
    pub per_t_expected_active: Vec<f64>,
    pub per_t_target: Vec<f64>,
    pub iterations: usize,
    pub gamma: Vec<f64>,
    pub config: SolverConfig,
    pub converged: bool,
}

impl SolveReport {
    fn from_inner(
        sol: InnerSolution,
        k: f64,
        iterations: usize,
        gamma: &[f64],
        cfg: &SolverConfig,
    ) -> Self {
        let alpha_bar_t = sol.alpha_bar_t();
        let converged = sol.loss <= cfg.eps1 && alpha_bar_t <= cfg.eps2;
        Self {
            alphas: sol.alphas,
            k,
            loss: sol.loss,
            alpha_bar_t,
            per_t_expected_active: sol.expected,
            per_t_target: sol.targets,
            iterations,
            gamma: gamma.to_vec(),
            config: cfg.clone(),
            converged,
        }
    }

    pub fn noise_schedule(&self) -> Result<NoiseSchedule, ScheduleError> {
        Ok(NoiseSchedule::from_alphas(&self.alphas)?)
    }

    pub fn active_node_schedule(&self) -> ActiveNodeSchedule {
        ActiveNodeSchedule {
            gamma: self.gamma.clone(),
            k: self.k,
            n: self.config_n(),
        }
    }

    fn config_n(&self) -> usize {
        // g_t = K n γ_t; recover n from the first step.
        match (self.per_t_target.first(), self.gamma.first()) {
            (Some(&g), Some(&gm)) if self.k > 0.0 => (g / (self.k * gm)).round() as usize,
            _ => 0,
        }
    }

    /// Ranking used to keep the best non-converged candidate: feasible
    /// constraint first, then smaller loss; otherwise smaller `ᾱ_T`.
    fn better_than(&self, other: &SolveReport) -> bool {
        let mine = self.alpha_bar_t <= self.config.eps2;
        let theirs = other.alpha_bar_t <= other.config.eps2;
        match (mine, theirs) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.loss < other.loss,
            (false, false) => self.alpha_bar_t < other.alpha_bar_t,
        }
    }
}

/// Finds `K` and `α*_{1:T}` by bisection on `K`, stopping once the loss is
/// at most `ε₁` and `ᾱ_T ≤ ε₂`. On failure the best candidate is returned in
/// [`ScheduleError::NotConverged`].
pub fn solve_schedule(
    gamma: &[f64],
    d0: &DegreeSequence,
    cfg: &SolverConfig,
) -> Result<SolveReport, ScheduleError> {
    cfg.validate()?;
    check_gamma(gamma)?;
    let hist = DegreeHistogram::new(d0);
    if hist.is_trivial() {
        return Err(ScheduleError::Infeasible);
    }
    let (mut k1, mut k2) = (cfg.k_min, cfg.k_max);
    let mut k = 0.5 * (k1 + k2);
    let mut best: Option<SolveReport> = None;
    for iter in 1..=cfg.max_outer_iters {
        let sol = solve_inner(&hist, k, gamma, cfg)?;
        let loss_ok = sol.loss <= cfg.eps1;
        let report = SolveReport::from_inner(sol, k, iter, gamma, cfg);
        if report.converged {
            return Ok(report);
        }
        let alpha_ok = report.alpha_bar_t <= cfg.eps2;
        if best.as_ref().is_none_or(|b| report.better_than(b)) {
            best = Some(report);
        }
        match cfg.bracket_rule {
            BracketRule::LossShrinksK => {
                if !loss_ok {
                    k2 = k;
                } else if !alpha_ok {
                    k1 = k;
                }
                k = 0.5 * (k1 + k2);
            }
            BracketRule::LossRaisesK => {
                if !loss_ok {
                    k1 = k;
                    k = 0.5 * (k + k2);
                } else if !alpha_ok {
                    k2 = k;
                    k = 0.5 * (k + k1);
                }
            }
        }
    }
    let mut best = best.expect("at least one outer iteration");
    best.iterations = cfg.max_outer_iters;
    Err(ScheduleError::NotConverged(Box::new(best)))
}

/// Named `γ` profiles evaluated at `t = 1..=T`.
pub fn gamma_library(name: &str, horizon: usize) -> Result<Vec<f64>, ScheduleError> {
    let f: fn(f64) -> f64 = match name {
        "constant" => |_| 1.0,
        "poly1" => |u| (0.5 * u - 0.5).powi(2) + 0.4,
        "poly2" => |u| (0.5 * u - 0.5).powi(2) + 0.5,
        "poly3" => |u| -0.5 * (u - 0.3).powi(2) + 0.7,
        other => return Err(ScheduleError::UnknownGamma(other.to_string())),
    };
    Ok((1..=horizon)
        .map(|t| f(t as f64 / horizon as f64))
        .collect())
}

/// Linearly interpolated `β_1 = beta_start .. β_T = beta_end`.
pub fn baseline_linear_schedule(
    horizon: usize,
    beta_start: f64,
    beta_end: f64,
) -> Result<NoiseSchedule, ScheduleError> {
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(ScheduleError::InvalidConfig(
            "need 0 < beta_start <= beta_end < 1".into(),
        ));
    }
    if horizon == 0 {
        return Err(DiffusionError::EmptySchedule.into());
    }
    let betas = (0..horizon)
        .map(|k| {
            if horizon == 1 {
                beta_start
            } else {
                beta_start + (beta_end - beta_start) * k as f64 / (horizon - 1) as f64
            }
        })
        .collect();
    Ok(NoiseSchedule::from_betas(betas)?)
}

/// Header of the schedule CSV.
pub const SCHEDULE_CSV_HEADER: &str = "t,beta,alpha,alpha_bar,gamma,target_active,expected_active";
const SCHEDULE_FORMAT_TAG: &str = "# edgediff schedule format 1";

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a solved schedule as CSV. Floats carry 17 significant digits so
/// the schedule reloads bit-exactly; `K`, tolerances and the final loss go
/// into a trailing comment block.
pub fn write_schedule_csv(report: &SolveReport) -> Result<String, ScheduleError> {
    let sched = report.noise_schedule()?;
    let mut meta = BTreeMap::new();
    meta.insert("K", fmt17(report.k));
    meta.insert("eps1", fmt17(report.config.eps1));
    meta.insert("eps2", fmt17(report.config.eps2));
    meta.insert("loss", fmt17(report.loss));
    meta.insert("alpha_bar_T", fmt17(report.alpha_bar_t));
    meta.insert("iterations", report.iterations.to_string());
    meta.insert("converged", report.converged.to_string());
    meta.insert(
        "bracket_rule",
        report.config.bracket_rule.as_str().to_string(),
    );
    Ok(render_schedule(
        &sched,
        Some(&report.gamma),
        Some(&report.per_t_target),
        &report.per_t_expected_active,
        &meta,
    ))
}

/// Renders a bare edge schedule (no `γ` profile); `gamma` and
/// `target_active` are left empty.
pub fn write_noise_schedule_csv(sched: &NoiseSchedule, d0: &DegreeSequence) -> String {
    let expected = expected_active_curve(d0, sched);
    render_schedule(sched, None, None, &expected, &BTreeMap::new())
}

fn render_schedule(
    sched: &NoiseSchedule,
    gamma: Option<&[f64]>,
    target: Option<&[f64]>,
    expected: &[f64],
    meta: &BTreeMap<&str, String>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SCHEDULE_FORMAT_TAG}");
    let _ = writeln!(out, "{SCHEDULE_CSV_HEADER}");
    let opt = |v: Option<&[f64]>, i: usize| v.map(|v| fmt17(v[i])).unwrap_or_default();
    for t in 1..=sched.horizon() {
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{},{}",
            fmt17(sched.beta(t)),
            fmt17(sched.alpha(t)),
            fmt17(sched.alpha_bar(t)),
            opt(gamma, t - 1),
            opt(target, t - 1),
            fmt17(expected[t - 1]),
        );
    }
    for (k, v) in meta {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out
}

/// A schedule loaded back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleFile {
    pub schedule: NoiseSchedule,
    pub gamma: Option<Vec<f64>>,
    pub target_active: Option<Vec<f64>>,
    pub expected_active: Vec<f64>,
    /// `key = value` pairs from comment lines.
    pub meta: BTreeMap<String, String>,
}

/// Parses the schedule CSV. The edge schedule is rebuilt from the `beta`
/// column, so a written schedule reloads bit-exactly.
pub fn read_schedule_csv(text: &str) -> Result<ScheduleFile, ScheduleError> {
    let err = |line: usize, msg: String| ScheduleError::Format { line, msg };
    let mut meta = BTreeMap::new();
    let mut header_seen = false;
    let (mut betas, mut gammas, mut tgts, mut expected) = (vec![], vec![], vec![], vec![]);
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            if line != SCHEDULE_CSV_HEADER {
                return Err(err(
                    line_no,
                    format!("expected header `{SCHEDULE_CSV_HEADER}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 7 {
            return Err(err(
                line_no,
                format!("expected 7 columns, found {}", cols.len()),
            ));
        }
        let t: usize = cols[0]
            .parse()
            .map_err(|_| err(line_no, format!("invalid timestep `{}`", cols[0])))?;
        if t != betas.len() + 1 {
            return Err(err(
                line_no,
                format!("expected timestep {}, found {t}", betas.len() + 1),
            ));
        }
        let num = |s: &str| -> Result<f64, ScheduleError> {
            s.parse::<f64>()
                .map_err(|_| err(line_no, format!("invalid number `{s}`")))
        };
        let opt = |s: &str| -> Result<Option<f64>, ScheduleError> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        betas.push(num(cols[1])?);
        gammas.push(opt(cols[4])?);
        tgts.push(opt(cols[5])?);
        expected.push(num(cols[6])?);
    }
    if !header_seen {
        return Err(err(0, "missing header".into()));
    }
    let collect = |v: Vec<Option<f64>>| -> Option<Vec<f64>> { v.into_iter().collect() };
    Ok(ScheduleFile {
        schedule: NoiseSchedule::from_betas(betas)?,
        gamma: collect(gammas),
        target_active: collect(tgts),
        expected_active: expected,
        meta,
    })
}
