//! Command-line companion to `maxkin-core`: config parsing, model files,
//! CSV emission and task dispatch.
//!
//! Runs are reproducible: identical config and seed produce byte-identical
//! output files. Parsing is fail-closed (unknown keys are errors), and exit
//! codes separate usage errors (1) from numerical non-convergence (2).

pub mod config;
pub mod modelfile;
pub mod output;
pub mod run;

pub use config::{parse_config, ModelSpec, Numerics, RunConfig, Task, U0Spec};
pub use run::{run, RunError};
