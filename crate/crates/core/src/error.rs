use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("unknown vector field `{0}`")]
    UnknownField(String),

    #[error("field `{0}` has no analytic jacobian")]
    NoAnalyticJacobian(String),

    #[error("integration failed at step {step}: {reason}")]
    Integration { step: usize, reason: String },

    #[error("invalid heteroclinic sign triple {given:?}; valid triples are {valid:?}")]
    InvalidSigns {
        given: [i8; 3],
        valid: Vec<[i8; 3]>,
    },

    #[error("fewer than two oscillation crossings found before t = {0}")]
    NoOscillation(f64),

    #[error("point is not stationary (field residual {residual:.3e})")]
    NotStationary { residual: f64 },

    #[error("delay tensor evaluated without the delayed state")]
    MissingDelayedState,

    #[error("dirac kernel has no pointwise density; use delayed_state instead")]
    DiracDensity,

    #[error("laplace transform diverges for Re(lambda) = {re} (requires Re(lambda) > {bound})")]
    LaplaceDivergent { re: f64, bound: f64 },

    #[error("insufficient history: values needed back to t = {earliest}")]
    InsufficientHistory { earliest: f64 },

    #[error("lambda = {0} lies on the branch cut of lambda^alpha (non-positive real axis)")]
    BranchCut(num_complex::Complex64),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 1 usage/config, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 1,
            Error::UnknownField(_) | Error::InvalidSigns { .. } => 1,
            _ => 2,
        }
    }
}
