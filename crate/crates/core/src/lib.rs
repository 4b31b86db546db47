//! Bose-stimulated light scattering off a uniform ideal Bose gas.

pub mod bose_math;
pub mod config;
pub mod error;
pub mod lab_units;
pub mod oracle;
pub mod quadrature;
pub mod scattering;
pub mod thermo;

pub use bose_math::{occupation, polylog_g32, zeta_three_halves, Fugacity};
pub use config::{Convention, QuadratureConfig};
pub use error::{Error, Result};
pub use scattering::{total_rate, RateBreakdown, ScaledPoint};
pub use thermo::{critical_density, ThermoState};

/// Engine version, echoed in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
