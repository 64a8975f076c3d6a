//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by model construction, grid calculus and simulation.
#[derive(Debug, Error)]
pub enum HawkesError {
    /// A model ingredient violates its contract (negative rate, probabilities
    /// that do not sum to one, an unbounded mark weight, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The mean total excitation is at or above one, so the process has no
    /// stationary regime and long-run quantities diverge.
    #[error("unstable kernel: mean total excitation {norm} is not < 1")]
    Unstable { norm: f64 },

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two grid functions that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The series and direct solutions of the resolvent equation disagree by
    /// more than the tolerance allows; the grid is too coarse for the kernel.
    #[error("resolvent cross-check failed: max deviation {deviation:.3e} exceeds {allowed:.3e}")]
    ResolventCheck { deviation: f64, allowed: f64 },

    /// Simulation produced more events than the configured cap; the partial
    /// path is not returned because it would silently truncate the process.
    #[error("event cap of {cap} events reached at t = {time_reached:.6} (horizon {horizon:.6})")]
    EventCapExceeded {
        cap: usize,
        time_reached: f64,
        horizon: f64,
    },

    /// Malformed serialized data (event streams, grid CSV).
    #[error("decode error: {0}")]
    Decode(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HawkesError>;

impl HawkesError {
    /// True for errors that indicate bad user input rather than an internal
    /// numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            HawkesError::InvalidModel(_)
                | HawkesError::Unstable { .. }
                | HawkesError::Domain(_)
                | HawkesError::GridMismatch(_)
        )
    }
}
