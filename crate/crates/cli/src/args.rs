//! Command-line arguments.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

/// Degree-guided edge-removal diffusion toolkit.
#[derive(Debug, Parser)]
#[command(name = "edgediff", version, about)]
pub struct Cli {
    /// Worker threads for sample- and sweep-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the edge noise schedule that realizes an active-node profile.
    SolveSchedule(SolveArgs),
    /// Simulate forward trajectories and compare them with the analytic curves.
    SimulateForward(ForwardArgs),
    /// Generate graphs with the degree-guided reverse process.
    Sample(SampleArgs),
    /// Sweep the corruption start to trade edge overlap against novelty.
    EoSweep(SweepArgs),
    /// Compute evaluation statistics for a graph.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output directory.
    #[arg(long, env = "EDGEDIFF_OUT", default_value = "edgediff-out")]
    pub out: PathBuf,
}

/// Active-node profile and solver tolerances.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Number of diffusion steps.
    #[arg(long = "T", default_value_t = 512)]
    pub horizon: usize,

    /// Named active-node profile.
    #[arg(long, default_value = "constant", conflicts_with = "gamma_path")]
    pub gamma: String,

    /// File with one profile value per line (overrides --gamma).
    #[arg(long)]
    pub gamma_path: Option<PathBuf>,

    /// Loss tolerance; defaults to (0.01 n)^2 T.
    #[arg(long)]
    pub eps1: Option<f64>,

    /// Bound on the final cumulative survival probability.
    #[arg(long, default_value_t = 1e-5)]
    pub eps2: f64,

    #[arg(long, default_value_t = 1e-4)]
    pub k_min: f64,

    #[arg(long, default_value_t = 10.0)]
    pub k_max: f64,

    /// Outer bisection direction.
    #[arg(long, value_enum, default_value_t = BracketArg::LossShrinksK)]
    pub bracket_rule: BracketArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BracketArg {
    LossShrinksK,
    LossRaisesK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Oracle,
    DegreeAffinity,
}

impl ModelArg {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelArg::Oracle => "oracle",
            ModelArg::DegreeAffinity => "degree-affinity",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Edge-list file of the clean graph.
    #[arg(long)]
    pub graph: PathBuf,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct ForwardArgs {
    #[arg(long)]
    pub graph: PathBuf,

    /// Schedule CSV; without it a linear schedule is built from
    /// --beta-start/--beta-end over --T steps.
    #[arg(long, conflicts_with_all = ["beta_start", "beta_end"])]
    pub schedule: Option<PathBuf>,

    #[arg(long = "T", default_value_t = 512)]
    pub horizon: usize,

    #[arg(long, default_value_t = 1e-4)]
    pub beta_start: f64,

    #[arg(long, default_value_t = 0.02)]
    pub beta_end: f64,

    /// Number of trajectories.
    #[arg(long, default_value_t = 8)]
    pub num_samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub out: OutArg,
}

/// Reverse-process settings shared by `sample` and `eo-sweep`.
#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long)]
    pub graph: PathBuf,

    /// Schedule CSV; when absent the schedule is solved from the solver flags.
    #[arg(long)]
    pub schedule: Option<PathBuf>,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[arg(long, value_enum, default_value_t = ModelArg::DegreeAffinity)]
    pub model: ModelArg,

    /// Rescale active-node probabilities to the expected active count.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub node_correction: bool,

    /// Rescale edge probabilities to the per-step edge budget.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub edge_correction: bool,

    #[arg(long, default_value_t = 8)]
    pub num_samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: SamplerArgs,

    /// Corrupt the input graph to this step and denoise from there; without
    /// it generation starts from the empty graph at T.
    #[arg(long)]
    pub t_start: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: SamplerArgs,

    /// Spacing of the start steps Δ, 2Δ, ... up to T.
    #[arg(long, default_value_t = 25)]
    pub delta: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Graph to evaluate.
    #[arg(long)]
    pub graph: PathBuf,

    /// Reference graph for normalized counts and edge overlap.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    #[command(flatten)]
    pub out: OutArg,
}
