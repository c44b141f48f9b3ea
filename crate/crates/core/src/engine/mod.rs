//! The iterative coloring engine: round phases, the repeat-until driver, and
//! completion of the leftover vertices.

mod completion;
mod round;
mod state;

pub use completion::{
    complete_coloring, CompletionFailure, CompletionOutcome, CompletionPolicy, CompletionStrategy,
};
pub use round::{
    exact_free_probability, measure, phase1_assign, phase2_resolve, phase3_cleanup, CleanupRecord,
    EmptyPaletteEvent, EngineError, MeasuredStats, PredictedStats, RoundCounters, RoundOutcome,
    RoundTrace, RunOptions, RunResult, run_rounds,
};
pub use state::{ColorSet, ColoringState};
