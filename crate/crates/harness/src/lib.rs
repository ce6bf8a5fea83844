//! Monte Carlo harness for the jamming solvers: experiment configs, seeded
//! channel draws, sweeps written as CSV, and a property suite.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{ExperimentConfig, ExperimentKind, MethodTag};
pub use error::{HarnessError, Result};
pub use experiments::{run_example1, run_example2, run_example3, run_sweep, RunOptions};
pub use output::{SweepResult, SweepRow};
pub use validate::{validate_suite, Scale};
