//! Degree-constrained edge-removal diffusion for large sparse graphs.
//!
//! The crate covers the analytic side of an edge-removal graph diffusion
//! model:
//!
//! - [`graph`]: canonical sparse graphs, degree sequences, active masks and
//!   the edge-list format;
//! - [`diffusion`]: the forward process, its degree marginals and the
//!   active-node / reverse-edge posteriors;
//! - [`schedule`]: expected active-node counts and the solver that turns an
//!   active-node profile into an edge noise schedule;
//! - [`sampler`]: degree-guided reverse sampling with optional node and edge
//!   volume corrections, over any [`sampler::EdgeModel`];
//! - [`stats`]: the graph statistics used to compare generated graphs with a
//!   reference.
//!
//! ```
//! use edgediff_core::graph::Graph;
//! use edgediff_core::schedule::{gamma_library, solve_schedule, SolverConfig};
//! use edgediff_core::sampler::{edge_model_oracle, sample_degree_guided, SamplerMode};
//!
//! let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
//! let d0 = g.degree_sequence();
//! let gamma = gamma_library("constant", 8).unwrap();
//! let report = solve_schedule(&gamma, &d0, &SolverConfig::defaults(6, 8)).unwrap();
//! let sched = report.noise_schedule().unwrap();
//!
//! let model = edge_model_oracle(g.clone());
//! let run = sample_degree_guided(&d0, &model, &sched, SamplerMode::vanilla(), 7).unwrap();
//! assert_eq!(run.final_graph, g);
//! ```

pub mod diffusion;
pub mod graph;
pub mod numeric;
pub mod sampler;
pub mod schedule;
pub mod stats;

pub use diffusion::NoiseSchedule;
pub use graph::{ActiveMask, DegreeSequence, Graph};
pub use sampler::{EdgeModel, GenerationRun, SamplerMode};
pub use schedule::{SolveReport, SolverConfig};
pub use stats::StatsReport;
