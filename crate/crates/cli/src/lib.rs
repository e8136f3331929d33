//! File formats, sampling masks and the experiment runner behind the
//! `tenfill` binary.

pub mod dten;
mod error;
pub mod experiment;
pub mod pgm;
pub mod sampling;

pub use error::{CliError, FormatError, Result};
pub use experiment::{
    run_batch, run_experiment, ExperimentOutcome, ExperimentSpec, Method, SolverOverrides,
};
pub use sampling::{generate_mask, generate_pixel_mask, MaskMode};
