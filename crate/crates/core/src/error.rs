use thiserror::Error;

use crate::cone::ConeError;
use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("{0}")]
    Usage(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid certificate at step {step}: {reason}")]
    CertificateInvalid { step: usize, reason: String },
    #[error("certificate file, line {line}: {msg}")]
    CertificateFormat { line: usize, msg: String },
    #[error("non-finite value encountered at x = {x:?}")]
    Numerical { x: Vec<f64> },
    #[error("penalty iterates diverged at outer iteration {iteration} (|x| = {norm:e})")]
    Divergence {
        iteration: usize,
        norm: f64,
        trajectory: Vec<Vec<f64>>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
