//! Error type shared by the solver and diagnostics layers.

use crate::solver::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("Hermitian symmetry violated: relative asymmetry {asymmetry:.3e} exceeds {tolerance:.1e}")]
    SymmetryViolation { asymmetry: f64, tolerance: f64 },

    #[error("exponent overflow guard: sigma*k = {exponent:.3} exceeds 700")]
    OverflowGuard { exponent: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("spectral gap violated: need L_c(k) = k^2 - l|k| - c > 0 on the grid, i.e. c < -l^2/4; got c = {c}, min L_c = {min_symbol:.3e}")]
    SpectralGap { c: f64, min_symbol: f64 },

    #[error("iteration did not converge within {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("time step too large: dt = {dt:.3e} exceeds cfl_guard * dt_cap = {cap:.3e}")]
    CflViolation { dt: f64, cap: f64 },

    #[error("non-finite state at step {step} (t = {t:.6})")]
    NonFiniteState { step: u64, t: f64 },

    #[error("solver aborted at step {step} (t = {t:.6}): {source}")]
    SolverAbort {
        step: u64,
        t: f64,
        partial: Box<Trajectory>,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory does not cover required window [{t_lo:.6}, {t_hi:.6}]")]
    InsufficientCoverage { t_lo: f64, t_hi: f64 },

    #[error("too few usable points for fit: have {have}, need {need}")]
    TooFewPoints { have: usize, need: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
