//! The normalized scattering rate `R(Δ, τ)`: an unstimulated Rayleigh part,
//! thermal-to-thermal stimulated scattering, and scattering into and out of
//! the condensate.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bose_math::bose_factor;
use crate::config::{Convention, QuadratureConfig};
use crate::error::{Error, Result};
use crate::quadrature::{Estimate, Integrator};
use crate::thermo::{critical_density, ThermoState};

/// Breakpoints placed ahead of the adaptive pass so the narrow small-momentum
/// peak that appears just above `T_c` is never stepped over.
const NEAR_ORIGIN_BREAKPOINTS: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

const SUM_RULE_DELTA_MIN: f64 = 1e-4;
const SUM_RULE_DELTA_MAX: f64 = 30.0;

/// A dimensionless momentum transfer and scaled temperature `τ = T/T_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledPoint {
    delta: f64,
    tau: f64,
}

impl ScaledPoint {
    pub fn new(delta: f64, tau: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain("delta must be positive"));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain("tau must be positive"));
        }
        Ok(ScaledPoint { delta, tau })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `R(Δ, τ)` split into its three contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub delta: f64,
    pub tau: f64,
    pub unstimulated: f64,
    pub thermal_thermal: f64,
    pub condensate: f64,
    pub total: f64,
    /// Absolute error bound of the quadrature behind `thermal_thermal`.
    pub quadrature_error: f64,
}

impl RateBreakdown {
    /// The stimulated enhancement `R - 1`.
    pub fn stimulated(&self) -> f64 {
        self.thermal_thermal + self.condensate
    }
}

/// `ln[(1 - λe^{-(p+Δ)²/2τ}) / (1 - λe^{-(p-Δ)²/2τ})]`, written as
/// `ln(1 + n((p-Δ)²) · (1 - e^{-2pΔ/τ}))` so it stays accurate as `p → 0`.
#[inline]
fn angular_log(p: f64, delta: f64, tau: f64, alpha: f64) -> f64 {
    let d = p - delta;
    let n_back = bose_factor(d * d / (2.0 * tau) + alpha);
    (n_back * -(-2.0 * p * delta / tau).exp_m1()).ln_1p()
}

/// The pair-occupation integral `∫ d³p n(p) n(p - Δ)` reduced to one radial
/// dimension by doing the polar angle in closed form:
///
/// `(2πτ/Δ) ∫₀^∞ dp p n(p) ln[(1 - λe^{-(p+Δ)²/2τ}) / (1 - λe^{-(p-Δ)²/2τ})]`.
///
/// The integrand is finite at `p = 0` even at unit fugacity and has an
/// integrable logarithmic singularity at `p = Δ` when `λ = 1`.
pub fn pair_occupation_integral(
    delta: f64,
    thermo: &ThermoState,
    integrator: &Integrator,
    p_cutoff: f64,
) -> std::result::Result<Estimate, crate::quadrature::QuadratureError> {
    let tau = thermo.tau;
    let alpha = thermo.fugacity.alpha();
    let integrand =
        |p: f64| p * bose_factor(p * p / (2.0 * tau) + alpha) * angular_log(p, delta, tau, alpha);

    let mut breaks = NEAR_ORIGIN_BREAKPOINTS.to_vec();
    breaks.push(delta);
    // Both occupations are below machine precision beyond Δ + cutoff.
    let upper = delta + p_cutoff;
    let est = integrator.integrate(integrand, 0.0, upper, &breaks)?;
    let scale = 2.0 * PI * tau / delta;
    Ok(Estimate {
        value: scale * est.value,
        abs_error: scale * est.abs_error,
        evaluations: est.evaluations,
    })
}

/// Stimulated scattering between thermally occupied states, normalized by `N_total`.
pub fn thermal_thermal_term(
    point: ScaledPoint,
    thermo: &ThermoState,
    config: &QuadratureConfig,
) -> Result<Estimate> {
    config.validate()?;
    let est = pair_occupation_integral(
        point.delta,
        thermo,
        &config.integrator(),
        config.p_cutoff(point.tau),
    )
    .map_err(Error::quadrature("thermal-thermal term"))?;
    Ok(Estimate {
        value: est.value / thermo.n_total,
        abs_error: est.abs_error / thermo.n_total,
        evaluations: est.evaluations,
    })
}

/// Scattering between the condensate and the thermal state at momentum `Δ`,
/// `2 (N₀/N_total) n(Δ)`; the factor two counts both directions.
pub fn condensate_term(point: ScaledPoint, thermo: &ThermoState) -> f64 {
    if thermo.condensate_fraction == 0.0 {
        return 0.0;
    }
    2.0 * thermo.condensate_fraction * thermo.occupancy(point.delta * point.delta)
}

fn breakdown(
    point: ScaledPoint,
    thermo: &ThermoState,
    config: &QuadratureConfig,
) -> Result<RateBreakdown> {
    let thermal = thermal_thermal_term(point, thermo, config)?;
    let condensate = condensate_term(point, thermo);
    Ok(RateBreakdown {
        delta: point.delta,
        tau: point.tau,
        unstimulated: 1.0,
        thermal_thermal: thermal.value,
        condensate,
        total: 1.0 + thermal.value + condensate,
        quadrature_error: thermal.abs_error,
    })
}

/// `R(Δ, τ)` with its breakdown.
pub fn total_rate(point: ScaledPoint, config: &QuadratureConfig) -> Result<RateBreakdown> {
    config.validate()?;
    let thermo = ThermoState::new(point.tau, config.n_total_convention)?;
    breakdown(point, &thermo, config)
}

fn check_grid(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!(
            "{name} grid values must be positive"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

/// Rates along a temperature grid at fixed `Δ`. Points are evaluated in
/// parallel; each carries its own success or failure.
pub fn sweep_tau(
    delta: f64,
    tau_grid: &[f64],
    config: &QuadratureConfig,
) -> Result<Vec<(f64, Result<RateBreakdown>)>> {
    config.validate()?;
    check_grid(tau_grid, "tau")?;
    ScaledPoint::new(delta, tau_grid[0])?;
    Ok(tau_grid
        .par_iter()
        .map(|&tau| {
            (
                tau,
                ScaledPoint::new(delta, tau).and_then(|p| total_rate(p, config)),
            )
        })
        .collect())
}

/// Rates along a momentum-transfer grid at fixed `τ`.
pub fn sweep_delta(
    tau: f64,
    delta_grid: &[f64],
    config: &QuadratureConfig,
) -> Result<Vec<(f64, Result<RateBreakdown>)>> {
    config.validate()?;
    check_grid(delta_grid, "delta")?;
    let thermo = ThermoState::new(tau, config.n_total_convention)?;
    Ok(delta_grid
        .par_iter()
        .map(|&delta| {
            (
                delta,
                ScaledPoint::new(delta, tau).and_then(|p| breakdown(p, &thermo, config)),
            )
        })
        .collect())
}

/// Angle-integrated stimulated enhancement `4π ∫ Δ² (R - 1) dΔ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumRule {
    pub tau: f64,
    pub value: f64,
    pub abs_error: f64,
    /// Closed-form value from the thermal and condensate populations.
    pub expected: f64,
    pub n_total: f64,
}

impl SumRule {
    pub fn ratio_to_n_total(&self) -> f64 {
        self.value / self.n_total
    }
}

/// Closed-form angle-integrated enhancement. With thermal density
/// `n_th = min(τ^{3/2}, 1) N_c` (`N_c` the occupation integral), the
/// thermal-thermal piece integrates to `n_th² / N_total` and the condensate
/// piece to `2 (1 - τ^{3/2}) n_th`. The condensate-condensate pair sits at
/// `Δ = 0` and is absent.
pub fn expected_sum_rule(tau: f64, convention: Convention) -> Result<f64> {
    let f0 = crate::thermo::condensate_fraction(tau)?;
    let n_c = critical_density(Convention::Integral);
    let n_th = (1.0 - f0) * n_c;
    Ok(n_th * n_th / critical_density(convention) + 2.0 * f0 * n_th)
}

pub fn sum_rule(tau: f64, config: &QuadratureConfig) -> Result<SumRule> {
    config.validate()?;
    let thermo = ThermoState::new(tau, config.n_total_convention)?;
    let inner = config.integrator();
    let p_cutoff = config.p_cutoff(tau);
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    let integrand = |delta: f64| -> f64 {
        let thermal = match pair_occupation_integral(delta, &thermo, &inner, p_cutoff) {
            Ok(est) => est.value / thermo.n_total,
            Err(e) => {
                failure.borrow_mut().get_or_insert(Error::Quadrature {
                    term: "sum rule (thermal-thermal term)",
                    source: e,
                });
                return f64::NAN;
            }
        };
        let condensate = if thermo.condensate_fraction > 0.0 {
            2.0 * thermo.condensate_fraction * thermo.occupancy(delta * delta)
        } else {
            0.0
        };
        4.0 * PI * delta * delta * (thermal + condensate)
    };

    let scale = (2.0 * tau).sqrt();
    let breaks = [1e-3, 1e-2, 1e-1, scale, 2.0 * scale, 4.0 * scale];
    let upper = SUM_RULE_DELTA_MAX.max(2.0 * p_cutoff);
    let outer = Integrator::new((100.0 * config.rel_tol).max(1e-7), config.max_subdivisions);
    let est = outer.integrate(integrand, SUM_RULE_DELTA_MIN, upper, &breaks);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let est = est.map_err(Error::quadrature("sum rule"))?;

    // Below Δ_min the condensate term is 4τ f₀/Δ² to leading order; the
    // thermal-thermal piece is O(1/Δ) and contributes O(Δ_min²).
    let patch = 16.0 * PI * tau * thermo.condensate_fraction * SUM_RULE_DELTA_MIN;

    Ok(SumRule {
        tau,
        value: est.value + patch,
        abs_error: est.abs_error,
        expected: expected_sum_rule(tau, config.n_total_convention)?,
        n_total: thermo.n_total,
    })
}
