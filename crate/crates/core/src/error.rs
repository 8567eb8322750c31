use thiserror::Error;

/// Errors raised by the solvers, oracles, generators and checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} at component {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero gradient (norm {norm:e} at or below tolerance)")]
    ZeroGradient { norm: f64 },

    #[error("nonpositive radicand {0:e} in gamma update")]
    NonpositiveRadicand(f64),

    #[error("contraction factor {0} outside [0, 1)")]
    FactorOutOfRange(f64),

    #[error("degenerate ratio: f(x) coincides with f* ({f_x} vs {f_star})")]
    DegenerateRatio { f_x: f64, f_star: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("missing ground truth: {0}")]
    MissingGroundTruth(&'static str),

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("no feasible point found (best constraint value {best_g:e})")]
    NoFeasiblePoint { best_g: f64 },

    #[error("domain is unbounded; cannot sample")]
    UnboundedDomain,

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, iteration: usize) -> Self {
        match self {
            e @ Error::AtIteration { .. } => e,
            e => Error::AtIteration {
                iteration,
                source: Box::new(e),
            },
        }
    }

    /// Iteration index attached by a solver, if any.
    pub fn iteration(&self) -> Option<usize> {
        match self {
            Error::AtIteration { iteration, .. } => Some(*iteration),
            _ => None,
        }
    }

    /// Innermost error, with iteration context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
