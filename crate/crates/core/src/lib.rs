//! Iterative semi-random coloring of triangle-free graphs.
//!
//! The engine colors a triangle-free graph with roughly Δ/k colors by running
//! rounds of tentative random assignment, conflict resolution, equalization,
//! and cleanup, tracking a deterministic degree/palette schedule, and then
//! completing the remaining vertices from their surviving palettes.
//!
//! Modules:
//! - [`graph`], [`families`], [`dimacs`]: graphs, generators, and I/O.
//! - [`schedule`]: the (d_t, s_t, e_t) recurrences and feasibility checks.
//! - [`engine`]: the round phases, state, and completion strategies.
//! - [`analysis`]: invariant witnesses, averaging bounds, and estimators.
//! - [`baselines`]: greedy and DSATUR reference colorings.
//! - [`experiment`]: seeded experiment runner and baseline comparison.

pub mod analysis;
pub mod baselines;
pub mod dimacs;
pub mod engine;
pub mod experiment;
pub mod families;
pub mod graph;
pub mod rng;
pub mod schedule;

pub use baselines::{dsatur_color, greedy_color, verify_proper, Coloring};
pub use engine::{
    complete_coloring, run_rounds, CompletionPolicy, CompletionStrategy, EngineError, RunOptions,
    RunResult,
};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, GraphSource};
pub use families::{GraphFamily, GraphFamilySpec};
pub use graph::Graph;
pub use schedule::{Schedule, ScheduleParams};
