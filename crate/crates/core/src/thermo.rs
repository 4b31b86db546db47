//! Ideal Bose gas thermodynamics in scaled units (`m = k_B T_c = 1`, momenta in
//! units of `√(m k_B T_c)`), at the fixed critical density.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bose_math::{bose_factor, polylog_g32, zeta_three_halves, Fugacity};
use crate::config::{Convention, QuadratureConfig};
use crate::error::{Error, Result};
use crate::quadrature::Estimate;

const MAX_ROOT_ITERATIONS: usize = 200;

/// Critical density `N_total` under the chosen normalization.
pub fn critical_density(convention: Convention) -> f64 {
    let full = (2.0 * PI).powf(1.5) * zeta_three_halves();
    match convention {
        Convention::Integral => full,
        Convention::PaperConstant => 0.5 * full,
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must be positive, got {tau}")))
    }
}

/// Fraction of atoms in the `p = 0` state, `max(0, 1 - τ^{3/2})`.
pub fn condensate_fraction(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok((1.0 - tau.powf(1.5)).max(0.0))
}

/// Coefficient of `(τ - 1)²` in the near-critical fugacity, `(9/16π) ζ(3/2)²`.
pub fn near_critical_coefficient() -> f64 {
    9.0 / (16.0 * PI) * zeta_three_halves().powi(2)
}

/// Leading-order fugacity just above `T_c`: `1 - (9/16π) ζ(3/2)² (τ - 1)²`.
pub fn near_critical_expansion(tau: f64) -> Result<Fugacity> {
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::domain(format!(
            "near-critical expansion needs tau >= 1, got {tau}"
        )));
    }
    let h = tau - 1.0;
    Fugacity::new(1.0 - near_critical_coefficient() * h * h)
}

/// Fugacity holding the total density at its critical value.
///
/// At and below `T_c` this is exactly one. Above, it is the root of
/// `g_{3/2}(λ) = ζ(3/2) τ^{-3/2}`, solved in `α = -ln λ` by a bracketed
/// secant iteration with bisection fallback.
pub fn fugacity(tau: f64) -> Result<Fugacity> {
    check_tau(tau)?;
    if tau <= 1.0 {
        return Ok(Fugacity::ONE);
    }
    let target = zeta_three_halves() * tau.powf(-1.5);
    let residual = |alpha: f64| polylog_g32(Fugacity::from_alpha_unchecked(alpha)) - target;

    // residual is decreasing in alpha: positive at 0, negative at hi.
    let mut lo = 0.0;
    let mut f_lo = residual(lo);
    let mut hi = 1.0;
    let mut f_hi = residual(hi);
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 4.0;
        f_hi = residual(hi);
    }

    let mut guess = if tau < 1.3 {
        let seed = near_critical_expansion(tau)?.alpha();
        if seed > lo && seed < hi {
            Some(seed)
        } else {
            None
        }
    } else {
        None
    };

    let tolerance = 1e-14 * target;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let x = match guess.take() {
            Some(x) => x,
            None => {
                let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
                let width = hi - lo;
                if secant > lo + 0.01 * width && secant < hi - 0.01 * width {
                    secant
                } else {
                    0.5 * (lo + hi)
                }
            }
        };
        let fx = residual(x);
        if fx.abs() <= tolerance || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Fugacity::from_alpha(x);
        }
        let shrink_before = hi - lo;
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // Force a bisection when the secant stalls on one side.
        if hi - lo > 0.5 * shrink_before {
            guess = Some(0.5 * (lo + hi));
        }
    }
    Err(Error::RootNotConverged {
        tau,
        iterations: MAX_ROOT_ITERATIONS,
    })
}

/// Equilibrium state of the gas at scaled temperature `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoState {
    pub tau: f64,
    pub fugacity: Fugacity,
    pub condensate_fraction: f64,
    pub n_total: f64,
}

impl ThermoState {
    pub fn new(tau: f64, convention: Convention) -> Result<Self> {
        Ok(ThermoState {
            tau,
            fugacity: fugacity(tau)?,
            condensate_fraction: condensate_fraction(tau)?,
            n_total: critical_density(convention),
        })
    }

    /// Occupancy of a state with momentum squared `p2`; no validation.
    #[inline]
    pub fn occupancy(&self, p2: f64) -> f64 {
        bose_factor(p2 / (2.0 * self.tau) + self.fugacity.alpha())
    }
}

/// Density of thermally occupied (`p ≠ 0`) states, `∫ d³p n(p)`, by radial quadrature.
pub fn thermal_density(
    tau: f64,
    fugacity: Fugacity,
    config: &QuadratureConfig,
) -> Result<Estimate> {
    check_tau(tau)?;
    let alpha = fugacity.alpha();
    let integrand = |p: f64| 4.0 * PI * p * p * bose_factor(p * p / (2.0 * tau) + alpha);
    let scale = (2.0 * tau).sqrt();
    config
        .integrator()
        .integrate(
            integrand,
            0.0,
            config.p_cutoff(tau),
            &[0.1 * scale, scale, 3.0 * scale],
        )
        .map_err(Error::quadrature("thermal density"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tight() -> QuadratureConfig {
        QuadratureConfig::default().with_rel_tol(1e-11)
    }

    #[test]
    fn critical_density_conventions() {
        assert!((critical_density(Convention::PaperConstant) - 20.57).abs() < 0.01);
        assert!((critical_density(Convention::Integral) - 41.14).abs() < 0.02);
        assert_eq!(
            critical_density(Convention::Integral) / critical_density(Convention::PaperConstant),
            2.0
        );
    }

    #[test]
    fn critical_density_is_the_occupation_integral() {
        let est = thermal_density(1.0, Fugacity::ONE, &tight()).unwrap();
        assert_relative_eq!(
            est.value,
            critical_density(Convention::Integral),
            max_relative = 1e-9
        );
    }

    #[test]
    fn condensate_fraction_examples() {
        assert_eq!(condensate_fraction(1.0).unwrap(), 0.0);
        assert!((condensate_fraction(1e-12).unwrap() - 1.0).abs() < 1e-12);
        assert!((condensate_fraction(0.5).unwrap() - 0.64645).abs() < 1e-5);
        assert_eq!(condensate_fraction(1.7).unwrap(), 0.0);
        assert!(condensate_fraction(0.0).is_err());
        assert!(condensate_fraction(-1.0).is_err());
    }

    #[test]
    fn fugacity_examples() {
        assert_eq!(fugacity(1.0).unwrap(), Fugacity::ONE);
        assert_eq!(fugacity(0.3).unwrap(), Fugacity::ONE);

        let z = fugacity(2.0).unwrap();
        let target = zeta_three_halves() * 2f64.powf(-1.5);
        assert!((target - 0.923_614_162).abs() < 1e-9);
        assert!((polylog_g32(z) - target).abs() < 1e-10);

        let z = fugacity(1.1).unwrap().value();
        let approx = 1.0 - near_critical_coefficient() * 0.01;
        assert!((approx - (1.0 - 0.01222)).abs() < 1e-5);
        assert!((z - approx).abs() < 2e-3);
        assert!(fugacity(0.0).is_err());
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(near_critical_expansion(1.0).unwrap(), Fugacity::ONE);
        let v = near_critical_expansion(1.05).unwrap().value();
        assert!((v - 0.996945).abs() < 1e-6, "{v}");
        assert!(near_critical_expansion(0.99).is_err());
    }

    #[test]
    fn expansion_error_is_cubic() {
        let err = |h: f64| {
            (fugacity(1.0 + h).unwrap().value() - near_critical_expansion(1.0 + h).unwrap().value())
                .abs()
        };
        let hs = [0.05, 0.025, 0.0125];
        let scaled: Vec<f64> = hs.iter().map(|&h| err(h) / h.powi(3)).collect();
        for s in &scaled {
            assert!(*s < 10.0, "{scaled:?}");
        }
        // Successive halvings shrink the error by close to 2³.
        for w in hs.windows(2) {
            let ratio = err(w[0]) / err(w[1]);
            assert!(ratio > 6.0 && ratio < 10.0, "ratio {ratio}");
        }
    }

    #[test]
    fn fugacity_continuous_at_critical_point() {
        for tau in [1.0 - 1e-6, 1.0 + 1e-6] {
            assert!((fugacity(tau).unwrap().value() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn fugacity_strictly_decreasing_above_critical() {
        let mut prev = 1.0;
        for i in 1..=200 {
            let tau = 1.0 + 9.0 * i as f64 / 200.0;
            let z = fugacity(tau).unwrap().value();
            assert!(z < prev, "tau {tau}");
            assert!(z > 0.0);
            prev = z;
        }
    }

    #[test]
    fn fugacity_residual_small_everywhere() {
        for &tau in &[1.0 + 1e-4, 1.001, 1.01, 1.2, 1.5, 3.0, 10.0, 100.0] {
            let z = fugacity(tau).unwrap();
            let target = zeta_three_halves() * tau.powf(-1.5);
            assert!((polylog_g32(z) - target).abs() < 1e-10, "tau {tau}");
        }
    }

    #[test]
    fn density_conserved_above_critical() {
        let n = critical_density(Convention::Integral);
        for &tau in &[1.05, 1.5, 3.0] {
            let z = fugacity(tau).unwrap();
            let est = thermal_density(tau, z, &tight()).unwrap();
            assert_relative_eq!(est.value, n, max_relative = 1e-6);
        }
    }

    #[test]
    fn below_critical_bookkeeping() {
        let n = critical_density(Convention::Integral);
        for &tau in &[0.3, 0.5, 0.9] {
            let thermal = thermal_density(tau, Fugacity::ONE, &tight()).unwrap().value;
            assert_relative_eq!(thermal, tau.powf(1.5) * n, max_relative = 1e-6);
            let total = thermal + condensate_fraction(tau).unwrap() * n;
            assert_relative_eq!(total, n, max_relative = 1e-6);
        }
    }

    #[test]
    fn thermo_state_invariants() {
        for &tau in &[0.2, 0.9, 1.0, 1.2, 4.0] {
            let s = ThermoState::new(tau, Convention::Integral).unwrap();
            if tau >= 1.0 {
                assert_eq!(s.condensate_fraction, 0.0);
            }
            if tau <= 1.0 {
                assert_eq!(s.fugacity, Fugacity::ONE);
            } else {
                assert!(s.fugacity.value() < 1.0);
            }
        }
    }
}
