use thiserror::Error;

use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// An adaptive quadrature could not meet its tolerance.
    #[error("{term}: {source}")]
    Quadrature {
        term: &'static str,
        #[source]
        source: QuadratureError,
    },

    /// The fugacity root finder exhausted its iteration budget.
    #[error("fugacity root solve did not converge for tau = {tau} after {iterations} iterations")]
    RootNotConverged { tau: f64, iterations: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn quadrature(term: &'static str) -> impl FnOnce(QuadratureError) -> Self {
        move |source| Error::Quadrature { term, source }
    }

    /// True when the failure is numerical non-convergence rather than bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::RootNotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
