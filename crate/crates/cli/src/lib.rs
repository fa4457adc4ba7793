//! Configuration-driven runner for the coherent-structure pipeline.
//!
//! Every command reads an [`config::Experiment`], checks it, and then
//! reads or writes artifacts under the configured output directory:
//!
//! ```text
//! out/matrices/P_00000.ulam      one Ulam matrix per step
//! out/svd/W_00000.svd            one truncated SVD per window
//! out/paths_values.csv           tracked singular value paths
//! out/equivariance_values.csv    equivariance mismatch along the paths
//! out/frames/frame_{k}_{j}_{ñ}.{csv,pgm}
//! out/coherence_{k}_{j}.csv
//! ```

pub mod commands;
pub mod config;
mod lock;

use std::path::Path;

use thiserror::Error;

use coherent_core::cocycle::CocycleError;
use coherent_core::diagnostics::DiagnosticsError;
use coherent_core::integrate::IntegrateError;
use coherent_core::tracking::TrackingError;
use coherent_core::ulam::UlamError;

pub use lock::OutputLock;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing or invalid artifact: {0}")]
    Artifact(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output directory {0} is locked by another run (remove the lock file if it is stale)")]
    Locked(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Artifact(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Locked(_) | CliError::Io(_) => 1,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            IntegrateError::InvalidSpec(_) | IntegrateError::Field(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<UlamError> for CliError {
    fn from(e: UlamError) -> Self {
        match e {
            UlamError::Integrate(e) => e.into(),
            UlamError::InvalidPartition(_) | UlamError::Seeding(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<CocycleError> for CliError {
    fn from(e: CocycleError) -> Self {
        match e {
            CocycleError::NonConvergence { .. } => CliError::Numerical(e.to_string()),
            CocycleError::ChainMismatch { .. } => CliError::Artifact(e.to_string()),
            CocycleError::OutOfRange(_) | CocycleError::InvalidRank(_) => CliError::Config(e.to_string()),
            CocycleError::Ulam(e) => e.into(),
        }
    }
}

impl From<TrackingError> for CliError {
    fn from(e: TrackingError) -> Self {
        CliError::Artifact(e.to_string())
    }
}

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Chain(e) => e.into(),
            DiagnosticsError::OutOfRange { .. } => CliError::Config(e.to_string()),
            DiagnosticsError::Length { .. } | DiagnosticsError::Mismatch { .. } => CliError::Artifact(e.to_string()),
        }
    }
}
