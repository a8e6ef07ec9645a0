//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    /// Coordinates, resolutions or argument combinations outside a
    /// function's domain (off-lattice time, mismatched grids, bad config
    /// values).
    #[error("domain error: {0}")]
    Domain(String),

    /// A slice transform was requested too close to the lattice boundary to
    /// carry any frequency information.
    #[error("insufficient window: {0}")]
    InsufficientWindow(String),

    /// An iterative solve ran out of its iteration budget. Carries the last
    /// residual and, when available, the residual history.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    /// A fixed-point sweep produced NaN/overflow even at the smallest
    /// admissible damping.
    #[error("fixed-point iteration diverged (eta reduced to {eta:.3e}); try a smaller eta or finer lattice")]
    Divergence { eta: f64 },

    /// The effective-temperature fit has no usable dissipative signal
    /// (degenerate spectrum concentrated at omega = 0).
    #[error("effective temperature undefined: {0}")]
    UndefinedTemperature(String),

    /// The total-energy integrand produced an imaginary residue beyond the
    /// symmetry tolerance, which indicates a convention violation upstream.
    #[error("convention violation: {0}")]
    ConventionViolation(String),

    /// A bisection bracket had the same crossing status at both endpoints.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// Invalid run configuration; lists every offending key.
    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

impl KbError {
    /// Process exit code for the CLI: 2 config, 3 non-convergence/divergence,
    /// 4 bracket, 1 everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            KbError::Config(_) | KbError::Domain(_) => 2,
            KbError::NonConvergence { .. } | KbError::Divergence { .. } => 3,
            KbError::Bracket(_) => 4,
            _ => 1,
        }
    }
}
