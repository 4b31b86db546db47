use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Integrator;

/// Which value of the critical density normalizes the stimulated terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `∫ d³p (e^{p²/2} - 1)^{-1} = (2π)^{3/2} ζ(3/2)`, consistent with the occupation integrals.
    #[default]
    Integral,
    /// The historically printed `½ (2π)^{3/2} ζ(3/2)`; doubles the thermal-thermal term.
    PaperConstant,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Integral => "integral",
            Convention::PaperConstant => "paper_constant",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(Convention::Integral),
            "paper_constant" | "paper-constant" => Ok(Convention::PaperConstant),
            other => Err(Error::domain(format!(
                "unknown convention '{other}' (expected integral or paper_constant)"
            ))),
        }
    }
}

/// Tolerances and conventions for every numerical evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub n_total_convention: Convention,
    /// Momentum cutoff in units of the thermal momentum `√(2τ)`.
    pub p_truncation_multiplier: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            n_total_convention: Convention::Integral,
            p_truncation_multiplier: 8.4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 1e-14 && self.rel_tol < 1e-2) {
            return Err(Error::domain(format!(
                "rel_tol must lie in (1e-14, 1e-2), got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::domain(format!(
                "max_subdivisions must be at least 10, got {}",
                self.max_subdivisions
            )));
        }
        if !(self.p_truncation_multiplier > 0.0 && self.p_truncation_multiplier.is_finite()) {
            return Err(Error::domain(format!(
                "p_truncation_multiplier must be positive, got {}",
                self.p_truncation_multiplier
            )));
        }
        Ok(())
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.n_total_convention = convention;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub(crate) fn integrator(&self) -> Integrator {
        Integrator::new(self.rel_tol, self.max_subdivisions)
    }

    /// Radial cutoff beyond which `e^{-p²/2τ}` is below machine precision.
    pub(crate) fn p_cutoff(&self, tau: f64) -> f64 {
        self.p_truncation_multiplier * (2.0 * tau).sqrt()
    }
}
