//! Experiment harness: flat config parsing, run orchestration, deterministic
//! table/summary outputs, checkpoint/restart, sweeps, the exponential-lemma
//! probe, and plot-script emission.

pub mod checkpoint;
pub mod config;
pub mod initial;
pub mod plots;
pub mod probe;
pub mod run;
pub mod sweep;

/// Process exit codes used by the CLI.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Harness-level error: separates configuration problems (exit 2) from
/// numerical/runtime failures (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_CONFIG,
            HarnessError::Runtime(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<crate::Error> for HarnessError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Precondition(_)
            | crate::Error::InvalidGrid(_)
            | crate::Error::OverflowGuard { .. }
            | crate::Error::SpectralGap { .. }
            | crate::Error::CflViolation { .. } => HarnessError::Config(e.to_string()),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Runtime(format!("io: {e}"))
    }
}

/// Format a float with 17 significant digits, enough to round-trip f64
/// exactly; used by every table writer so reruns are byte-identical.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
