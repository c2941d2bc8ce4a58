//! Dataset manifests, graph file handling, experiment presets, and the
//! plot-data emitters behind the `graph-frechet` binary.

pub mod experiments;
pub mod files;
pub mod histogram;
pub mod manifest;
pub mod output;

use graph_frechet::Error as CoreError;

/// Exit code classification: 2 for validation problems, 3 for solver
/// failures.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if let Some(core) = err.downcast_ref::<CoreError>() {
        match core {
            CoreError::NoSignChange { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::DegenerateEigenvalue { .. }
            | CoreError::QuadratureNonconvergence { .. }
            | CoreError::GradientEvaluation { .. } => 3,
            _ => 2,
        }
    } else {
        2
    }
}
