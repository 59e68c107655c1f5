use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure in {what} (residual {residual:e})")]
    Numerical { what: &'static str, residual: f64 },

    #[error("linear program exceeds size limits ({vars} variables, {rows} constraints)")]
    LpTooLarge { vars: usize, rows: usize },

    #[error("linear program did not converge after {0} pivots")]
    LpNonConvergence(usize),

    #[error("unsupported generator for {0}")]
    UnsupportedGenerator(&'static str),

    #[error("unsupported cone for {0}")]
    UnsupportedCone(&'static str),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("solver could not resolve the problem: {0}")]
    Unresolved(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
