//! Replicated, seeded CS-UCB experiments: cumulative sleeping-regret curves
//! aggregated across runs, exact gap summaries, regret-bound overlays, and
//! CSV/SVG/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod simulate;

pub use config::{ConfigFile, ExperimentKind, Overrides};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, AggregateResult, ExperimentSpec};
pub use simulate::{simulate_run, RunOutcome, TraceStep};
