//! Instance generation, solution checking, metrics and experiment sweeps.

pub mod experiment;
pub mod formats;
pub mod generate;
pub mod maps;
pub mod metrics;
pub mod validate;

pub use experiment::{run_experiment, ExperimentConfig, RunRecord};
pub use generate::generate_instance;
pub use maps::builtin_warehouse;
pub use metrics::metrics;
pub use validate::{validate_solution, Violation, ViolationKind};
