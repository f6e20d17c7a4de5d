use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::DiagnosticRow;
use crate::solver::IterationRecord;

pub type Result<T> = std::result::Result<T, Error>;

/// A single schema violation, located by a JSON pointer into the config document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: {what} (estimated error {estimate:.3e})")]
    QuadratureNotConverged { what: String, estimate: f64 },

    #[error("integral diverges: {0}")]
    IntegralDiverges(String),

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("profile is not differentiable at r = {0}")]
    NotDifferentiable(f64),

    #[error("operation requires a radial profile: {0}")]
    NotRadial(String),

    #[error("profile fails the bounded-moment hypothesis ({0}); pass --force to scan anyway")]
    HypothesisFailed(String),

    #[error("no dispersion root found: {0}")]
    NoRoot(String),

    #[error("singular Jacobian at tau = {tau}, omega = {omega}")]
    JacobianSingular { tau: f64, omega: f64 },

    #[error("scan did not stabilise under refinement (margins {margins:?})")]
    ScanTooCoarse { margins: Vec<f64> },

    #[error("near-singular Volterra step: |diagonal| = {0:.3e}")]
    NearSingularStep(f64),

    #[error("singular value decomposition failed: {0}")]
    SvdFailure(String),

    #[error("diagnostic breach at step {step}: {reason}")]
    DiagnosticBreach {
        step: usize,
        reason: String,
        ledger: Vec<DiagnosticRow>,
    },

    #[error("potential field carries no generating density")]
    MissingProvenance,

    #[error("fixed point not converged after {max_iter} iterations")]
    NotConverged {
        max_iter: usize,
        history: Vec<IterationRecord>,
    },

    #[error("config schema violations:\n{}", format_violations(.0))]
    Schema(Vec<SchemaViolation>),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("I/O error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[SchemaViolation]) -> String {
    v.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
