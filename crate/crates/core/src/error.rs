use thiserror::Error;

/// Errors raised by the special-function engine, the channel model and the
/// performance metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },
    /// An argument would overflow the floating-point range.
    #[error("{function}: argument out of range ({detail})")]
    Range {
        function: &'static str,
        detail: String,
    },
    /// A parameter violates a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A Meijer G parameter set violates the pole-separation rules or is not
    /// supported by the contour evaluator.
    #[error("invalid Meijer G specification: {0}")]
    InvalidSpec(String),
    /// The Mellin-Barnes contour quadrature could not reach the requested
    /// tolerance. Carries the best estimate and its relative error bound.
    #[error("Meijer G contour integral did not converge: estimate {estimate:e}, relative error {rel_error:e}")]
    Convergence { estimate: f64, rel_error: f64 },
    /// Adaptive quadrature ran out of subdivisions.
    #[error("quadrature did not converge: estimate {estimate:e}, absolute error {abs_error:e}")]
    Quadrature { estimate: f64, abs_error: f64 },
    /// A closed form produced a value outside its admissible range.
    #[error("{what} is inconsistent: value {value:e}")]
    Inconsistent { what: &'static str, value: f64 },
    /// The water-filling cutoff solver could not bracket or converge.
    #[error("cutoff solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}

pub(crate) fn require_finite(function: &'static str, name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(function, format!("{name} = {x} is not finite")))
    }
}
