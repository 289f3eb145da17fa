//! Library side of the `rbso` command line tool: experiment configuration and
//! fan-out, scenario emission, parameter overrides, and trace cross-checking.

pub mod experiment;
pub mod overrides;
pub mod reference;
pub mod verify;

pub use experiment::{run_experiment, ExperimentConfig, RunMode, TraceVerbosity};
pub use reference::emit_reference_scenario;
