use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("integration unstable at t = {time:.6e} s (rho_ee = {rho_ee})")]
    Unstable { time: f64, rho_ee: f64 },

    #[error(
        "wires overlap: centers {first:?} and {second:?} are closer than diameter {diameter:.3e} m"
    )]
    WireOverlap {
        first: (f64, f64),
        second: (f64, f64),
        diameter: f64,
    },

    #[error("wire at ({x:.6e}, {z:.6e}) m lies outside the cavity")]
    WireOutside { x: f64, z: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed record: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative numerical method (as opposed to bad
    /// input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Unstable { .. })
    }
}
