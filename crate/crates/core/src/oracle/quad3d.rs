use std::cell::RefCell;
use std::f64::consts::PI;

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::quadrature::{Estimate, QuadratureError};
use crate::scattering::ScaledPoint;
use crate::thermo::ThermoState;

/// Orientation of the polar axis relative to `Δ`. Reflecting it maps
/// `p - Δ` to `p + Δ`, which relabels the pair and must leave the integral unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolarAxis {
    #[default]
    Aligned,
    Reflected,
}

/// The thermal-thermal term by direct quadrature: the delta function removes
/// `p'`, leaving a radial × polar-angle double integral done numerically in
/// both dimensions (the azimuth contributes `2π`).
pub fn term2b_quadrature_3d(
    point: ScaledPoint,
    thermo: &ThermoState,
    config: &QuadratureConfig,
) -> Result<Estimate> {
    term2b_quadrature_3d_oriented(point, thermo, config, PolarAxis::Aligned)
}

pub fn term2b_quadrature_3d_oriented(
    point: ScaledPoint,
    thermo: &ThermoState,
    config: &QuadratureConfig,
    axis: PolarAxis,
) -> Result<Estimate> {
    config.validate()?;
    let delta = point.delta();
    let tau = thermo.tau;
    let integrator = config.integrator();
    let failure: RefCell<Option<QuadratureError>> = RefCell::new(None);

    // ∫_{-1}^{1} dμ n(|p - Δ|²), written in the gap t = 1 - μ from the forward
    // direction so that |p - Δ|² = (p - Δ)² + 2pΔt keeps full relative
    // precision where the integrand peaks (t → 0 as p → Δ). The reflected
    // axis runs the same integral over v = -t ∈ [-2, 0].
    let polar = |p: f64| -> f64 {
        let offset = (p - delta).powi(2);
        let slope = 2.0 * p * delta;
        let width = offset / slope;
        // One breakpoint per decade between the peak width and the full range.
        let first = width.max(1e-300).log10().floor() as i32 - 1;
        let gaps = (first.max(-300)..=0).map(|k| 10f64.powi(k));
        let est = match axis {
            PolarAxis::Aligned => {
                let breaks: Vec<f64> = gaps.collect();
                integrator.integrate(
                    |t: f64| thermo.occupancy(offset + slope * t),
                    0.0,
                    2.0,
                    &breaks,
                )
            }
            PolarAxis::Reflected => {
                let breaks: Vec<f64> = gaps.map(|t| -t).collect();
                integrator.integrate(
                    |v: f64| thermo.occupancy(offset - slope * v),
                    -2.0,
                    0.0,
                    &breaks,
                )
            }
        };
        match est {
            Ok(est) => est.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    let radial = |p: f64| 2.0 * PI * p * p * thermo.occupancy(p * p) * polar(p);
    let breaks = [1e-4, 1e-3, 1e-2, 1e-1, delta];
    let upper = delta + config.p_cutoff(tau);
    let est = integrator.integrate(radial, 0.0, upper, &breaks);
    if let Some(e) = failure.into_inner() {
        return Err(Error::Quadrature {
            term: "3D oracle (polar integral)",
            source: e,
        });
    }
    let est = est.map_err(Error::quadrature("3D oracle (radial integral)"))?;
    Ok(Estimate {
        value: est.value / thermo.n_total,
        abs_error: est.abs_error / thermo.n_total,
        evaluations: est.evaluations,
    })
}
