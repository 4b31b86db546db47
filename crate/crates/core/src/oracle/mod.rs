//! Independent cross-checks of the rate integrals: full 3D quadrature,
//! Monte Carlo, and a finite periodic box.

pub mod box_model;
pub mod monte_carlo;
pub mod quad3d;

pub use box_model::{box_rate, stimulated_energy_balance, BoxModel, BoxRate, EnergyBalance, Mode};
pub use monte_carlo::{term2b_monte_carlo, McEstimate};
pub use quad3d::{term2b_quadrature_3d, term2b_quadrature_3d_oriented, PolarAxis};
