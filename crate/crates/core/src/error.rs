// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    /// The mean small-outbreak size diverges at or above the threshold.
    #[error("rate is at or above the epidemic threshold (spectral radius {spectral_radius:.6})")]
    Supercritical { spectral_radius: f64 },

    #[error("fixed point did not converge after {iterations} iterations (last change {last_change:e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        /// Last iterate of (u_a, u_b, u_c).
        last: [f64; 3],
        /// Outbreak size evaluated at the last iterate.
        last_s: f64,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
