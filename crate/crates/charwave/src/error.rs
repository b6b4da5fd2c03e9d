use thiserror::Error;

/// Errors surfaced by construction, evaluation and orchestration paths.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameter at construction time (positivity, ordering, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Argument outside the admissible neighborhood of the origin.
    #[error("domain violation: |theta| = {theta:.6e} exceeds theta_max = {theta_max:.6e}")]
    Domain { theta: f64, theta_max: f64 },

    /// Target value outside the range of G on the admissible interval; the
    /// state has left the small-data regime.
    #[error("G-inversion range violation: y = {y:.6e} outside [{lo:.6e}, {hi:.6e}]")]
    GRange { y: f64, lo: f64, hi: f64 },

    /// Initial amplitude too large for the paired wave speed.
    #[error("inadmissible amplitude: {0}")]
    Inadmissible(String),

    /// Grid/domain geometry inconsistent with the requested horizon.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Experiment configuration problem (names the offending key).
    #[error("config error: {0}")]
    Config(String),

    /// Operation precondition failed (e.g. too few records for a fit).
    #[error("{0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
