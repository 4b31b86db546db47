//! Laboratory quantities to and from the scaled variables.
//!
//! Momenta are measured in units of `√(m k_B T_c)`, so the photon momentum
//! `h/λ` becomes the dimensionless `k` and a scattering angle `θ` becomes
//! the transfer `Δ = 2 sin(θ/2)·k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::scattering::{total_rate, ScaledPoint};

/// Exact SI values (CODATA 2018).
pub mod constants {
    pub const PLANCK: f64 = 6.626_070_15e-34;
    pub const REDUCED_PLANCK: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Unified atomic mass unit (CODATA 2018 recommended value).
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabParameters {
    /// Kilograms.
    pub atom_mass: f64,
    /// Metres.
    pub wavelength: f64,
    /// Kelvin.
    pub critical_temperature: f64,
}

impl LabParameters {
    pub fn new(atom_mass: f64, wavelength: f64, critical_temperature: f64) -> Result<Self> {
        let params = LabParameters {
            atom_mass,
            wavelength,
            critical_temperature,
        };
        params.validate()?;
        Ok(params)
    }

    /// Mass in atomic mass units, wavelength in nanometres, temperature in nanokelvin.
    pub fn from_lab_units(mass_amu: f64, wavelength_nm: f64, tc_nk: f64) -> Result<Self> {
        Self::new(
            mass_amu * constants::ATOMIC_MASS_UNIT,
            wavelength_nm * 1e-9,
            tc_nk * 1e-9,
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("atom mass", self.atom_mass),
            ("wavelength", self.wavelength),
            ("critical temperature", self.critical_temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// The momentum unit `√(m k_B T_c)` in kg·m/s.
    pub fn momentum_unit(&self) -> f64 {
        (self.atom_mass * constants::BOLTZMANN * self.critical_temperature).sqrt()
    }
}

/// Photon momentum `h/λ` in units of `√(m k_B T_c)`.
pub fn scaled_photon_momentum(params: &LabParameters) -> Result<f64> {
    params.validate()?;
    Ok(constants::PLANCK / params.wavelength / params.momentum_unit())
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!(
            "photon momentum must be positive, got {k}"
        )));
    }
    Ok(())
}

/// `Δ = (sin θ / cos(θ/2))·k`, evaluated as `2 sin(θ/2)·k`.
pub fn delta_from_angle(theta: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::domain(format!(
            "angle must lie in (0, π], got {theta}"
        )));
    }
    Ok(2.0 * (0.5 * theta).sin() * k)
}

/// Small-angle form `Δ ≈ θ·k`.
pub fn delta_small_angle(theta: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!(
            "angle must be positive, got {theta}"
        )));
    }
    Ok(theta * k)
}

/// Inverse of [`delta_from_angle`]; `Δ` must lie in `(0, 2k]`.
pub fn angle_from_delta(delta: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    if !(delta > 0.0 && delta <= 2.0 * k) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 2k] = (0, {}], got {delta}",
            2.0 * k
        )));
    }
    Ok(2.0 * (0.5 * delta / k).min(1.0).asin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationMode {
    InPlane,
    Perpendicular,
    Unpolarized,
}

impl std::str::FromStr for PolarizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in_plane" | "in-plane" => Ok(PolarizationMode::InPlane),
            "perpendicular" => Ok(PolarizationMode::Perpendicular),
            "unpolarized" => Ok(PolarizationMode::Unpolarized),
            other => Err(Error::domain(format!(
                "unknown polarization '{other}' (expected in_plane, perpendicular or unpolarized)"
            ))),
        }
    }
}

/// Dipole angular factor of the scattered intensity.
pub fn polarization_factor(theta: f64, mode: PolarizationMode) -> f64 {
    let c2 = theta.cos().powi(2);
    match mode {
        PolarizationMode::InPlane => c2,
        PolarizationMode::Perpendicular => 1.0,
        PolarizationMode::Unpolarized => 0.5 * (1.0 + c2),
    }
}

/// Ratio of total rates `R(small)/R(reference)` at a common temperature: how
/// far the probe intensity, and with it the spontaneous heating, can drop
/// while keeping the detected signal.
pub fn heating_reduction_factor(
    small: ScaledPoint,
    reference: ScaledPoint,
    config: &QuadratureConfig,
) -> Result<f64> {
    if small.tau() != reference.tau() {
        return Err(Error::domain(format!(
            "both points must share tau, got {} and {}",
            small.tau(),
            reference.tau()
        )));
    }
    let num = total_rate(small, config)?.total;
    let den = total_rate(reference, config)?.total;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rubidium() -> LabParameters {
        LabParameters::new(1.4431e-25, 780e-9, 100e-9).unwrap()
    }

    #[test]
    fn rubidium_photon_momentum() {
        let k = scaled_photon_momentum(&rubidium()).unwrap();
        assert!((k - 1.90).abs() < 0.02, "k = {k}");
        let amu = LabParameters::from_lab_units(86.909_180_5, 780.0, 100.0).unwrap();
        assert!((scaled_photon_momentum(&amu).unwrap() / k - 1.0).abs() < 1e-4);
    }

    #[test]
    fn photon_momentum_scaling() {
        let base = rubidium();
        let k = scaled_photon_momentum(&base).unwrap();
        let hot = LabParameters {
            critical_temperature: 4.0 * base.critical_temperature,
            ..base
        };
        assert!((scaled_photon_momentum(&hot).unwrap() - 0.5 * k).abs() < 1e-14);
        let long = LabParameters {
            wavelength: 1e6,
            ..base
        };
        assert!(scaled_photon_momentum(&long).unwrap() < 1e-11);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LabParameters::new(0.0, 780e-9, 1e-7).is_err());
        assert!(LabParameters::new(1e-25, -1.0, 1e-7).is_err());
        assert!(LabParameters::new(1e-25, 780e-9, f64::NAN).is_err());
        assert!(delta_from_angle(0.0, 1.0).is_err());
        assert!(delta_from_angle(3.2, 1.0).is_err());
        assert!(angle_from_delta(2.5, 1.0).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn right_angle_transfer() {
        let d = delta_from_angle(PI / 2.0, 1.0).unwrap();
        assert!((d - 1.41421).abs() < 1e-5);
        let written = (PI / 2.0).sin() / (PI / 4.0).cos();
        assert!((d - written).abs() < 1e-15);
        assert!((delta_from_angle(PI, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_angle_limit() {
        for theta in [1e-2, 1e-4, 1e-6] {
            let ratio =
                delta_from_angle(theta, 1.9).unwrap() / delta_small_angle(theta, 1.9).unwrap();
            assert!((ratio - 1.0).abs() < theta * theta);
        }
    }

    #[test]
    fn polarization_examples() {
        for mode in [
            PolarizationMode::InPlane,
            PolarizationMode::Perpendicular,
            PolarizationMode::Unpolarized,
        ] {
            assert_eq!(polarization_factor(0.0, mode), 1.0);
        }
        assert!(polarization_factor(PI / 2.0, PolarizationMode::InPlane) < 1e-30);
        assert!((polarization_factor(PI / 2.0, PolarizationMode::Unpolarized) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heating_reduction_examples() {
        let cfg = QuadratureConfig::default();
        let p = ScaledPoint::new(0.1, 0.85).unwrap();
        assert_eq!(heating_reduction_factor(p, p, &cfg).unwrap(), 1.0);
        let k = scaled_photon_momentum(&rubidium()).unwrap();
        let right_angle = ScaledPoint::new(delta_from_angle(PI / 2.0, k).unwrap(), 0.85).unwrap();
        assert!(heating_reduction_factor(p, right_angle, &cfg).unwrap() >= 50.0);
        let backward = ScaledPoint::new(2.0 * k, 0.85).unwrap();
        assert!(heating_reduction_factor(p, backward, &cfg).unwrap() >= 50.0);
        let other = ScaledPoint::new(0.5, 1.2).unwrap();
        assert!(heating_reduction_factor(p, other, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn angle_round_trip(theta in 1e-4f64..3.0, k in 0.01f64..100.0) {
            let back = angle_from_delta(delta_from_angle(theta, k).unwrap(), k).unwrap();
            prop_assert!((back - theta).abs() <= 1e-10 * theta.max(1.0));
        }

        #[test]
        fn transfer_per_photon_momentum_is_geometric(theta in 1e-4f64..PI, k1 in 0.01f64..100.0, k2 in 0.01f64..100.0) {
            let a = delta_from_angle(theta, k1).unwrap() / k1;
            let b = delta_from_angle(theta, k2).unwrap() / k2;
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn transfer_increases_with_angle(a in 1e-4f64..3.0, step in 1e-3f64..0.1) {
            let b = (a + step).min(PI);
            prop_assert!(delta_from_angle(b, 1.0).unwrap() > delta_from_angle(a, 1.0).unwrap());
        }

        #[test]
        fn unpolarized_is_mean_of_linear(theta in 0.0f64..PI) {
            let mean = 0.5 * (polarization_factor(theta, PolarizationMode::InPlane)
                + polarization_factor(theta, PolarizationMode::Perpendicular));
            prop_assert!((polarization_factor(theta, PolarizationMode::Unpolarized) - mean).abs() < 1e-15);
        }
    }
}
