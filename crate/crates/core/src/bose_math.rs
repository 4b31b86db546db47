//! Bose-Einstein occupation factors and the polylogarithm g_{3/2}.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Fugacity `λ = exp(μ/τ)` of an ideal Bose gas, `0 ≤ λ ≤ 1`.
///
/// Stored as `α = -ln λ ≥ 0` so that states a hair away from condensation
/// (where `1 - λ` is far below machine epsilon relative to 1) keep full
/// precision in the occupation factors.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fugacity {
    alpha: f64,
}

impl Fugacity {
    /// The degenerate value `λ = 1` of a condensed gas.
    pub const ONE: Fugacity = Fugacity { alpha: 0.0 };

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::domain(format!(
                "fugacity must lie in [0, 1], got {value}"
            )));
        }
        Ok(Fugacity { alpha: -value.ln() })
    }

    /// Builds the fugacity `exp(-alpha)` from `alpha = -μ/τ`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::domain(format!(
                "-ln(fugacity) must be non-negative, got {alpha}"
            )));
        }
        Ok(Fugacity { alpha })
    }

    pub(crate) fn from_alpha_unchecked(alpha: f64) -> Self {
        debug_assert!(alpha >= 0.0);
        Fugacity { alpha }
    }

    pub fn value(self) -> f64 {
        (-self.alpha).exp()
    }

    /// `-ln λ`, i.e. `-μ/τ`.
    pub fn alpha(self) -> f64 {
        self.alpha
    }

    pub fn is_degenerate(self) -> bool {
        self.alpha == 0.0
    }
}

impl Serialize for Fugacity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta by Euler-Maclaurin summation: a head sum up to `N - 1` plus
/// the integral tail with Bernoulli corrections. Valid for any real `s != 1`
/// with `s > -19`; accurate to machine precision for `s` of order one.
fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: usize = 30;
    let n = N as f64;
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising = s (s+1) ... (s+2j-2) / (2j)!
    let mut rising = s / 2.0;
    let mut power = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b * rising * power;
        tail += term;
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k) / ((k + 1.0) * (k + 2.0));
        power /= n * n;
    }
    head + tail
}

/// Riemann ζ(3/2) ≈ 2.612375348685488.
pub fn zeta_three_halves() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| zeta_euler_maclaurin(1.5))
}

const ROBINSON_TERMS: usize = 28;

/// ζ(3/2 - k) for k = 0, 1, ..., via the reflection formula for negative arguments.
fn robinson_coefficients() -> &'static [f64; ROBINSON_TERMS] {
    static COEFFS: OnceLock<[f64; ROBINSON_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut c = [0.0; ROBINSON_TERMS];
        c[0] = zeta_three_halves();
        c[1] = zeta_euler_maclaurin(0.5);
        // ζ(1 - s) = 2 (2π)^{-s} cos(πs/2) Γ(s) ζ(s), with s = k - 1/2.
        let mut gamma = PI.sqrt() / 2.0; // Γ(3/2)
        for (k, slot) in c.iter_mut().enumerate().skip(2) {
            let s = k as f64 - 0.5;
            *slot =
                2.0 * (2.0 * PI).powf(-s) * (0.5 * PI * s).cos() * gamma * zeta_euler_maclaurin(s);
            gamma *= s;
        }
        c
    })
}

/// Direct series `Σ_{n=1}^{terms} λⁿ / n^{3/2}` and the bound on the omitted
/// tail, `λ^{N+1} / ((N+1)^{3/2} (1-λ))` (infinite at `λ = 1`).
pub fn g32_series(lambda: f64, terms: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut power = 1.0;
    for n in 1..=terms {
        power *= lambda;
        sum += power / (n as f64).powf(1.5);
    }
    let next = (terms + 1) as f64;
    let bound = power * lambda / (next.powf(1.5) * (1.0 - lambda));
    (sum, bound)
}

/// Polylogarithm `g_{3/2}(λ) = Σ_{n≥1} λⁿ/n^{3/2}` for a physical fugacity.
///
/// For `-ln λ ≥ 1` the direct series is summed until its tail bound drops below
/// machine precision. Closer to condensation it switches to the expansion in
/// `α = -ln λ`: `g(e^{-α}) = -2√(πα) + Σ_k ζ(3/2 - k) (-α)^k / k!`, which
/// converges for `α < 2π` and is exact at `λ = 1`.
pub fn polylog_g32(fugacity: Fugacity) -> f64 {
    let alpha = fugacity.alpha();
    if alpha >= 1.0 {
        let lambda = fugacity.value();
        if lambda == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut power = 1.0;
        for n in 1.. {
            power *= lambda;
            let term = power / (n as f64).powf(1.5);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        return sum;
    }

    let coeffs = robinson_coefficients();
    let mut series = 0.0;
    let mut factor = 1.0; // (-α)^k / k!
    for (k, c) in coeffs.iter().enumerate() {
        series += c * factor;
        factor *= -alpha / (k as f64 + 1.0);
    }
    series - 2.0 * (PI * alpha).sqrt()
}

/// `1 / (e^x - 1)` for an exponent `x = p²/(2τ) - ln λ > 0`.
#[inline]
pub fn bose_factor(exponent: f64) -> f64 {
    1.0 / exponent.exp_m1()
}

/// Mean occupancy `1 / (λ⁻¹ e^{p²/2τ} - 1)` of a single-particle state.
pub fn occupation(p_squared: f64, tau: f64, fugacity: Fugacity) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    if p_squared.is_nan() || p_squared < 0.0 {
        return Err(Error::domain(format!(
            "p^2 must be non-negative, got {p_squared}"
        )));
    }
    let exponent = p_squared / (2.0 * tau) + fugacity.alpha();
    if exponent <= 0.0 {
        return Err(Error::domain(
            "occupation diverges: the p = 0 state at unit fugacity belongs to the condensate",
        ));
    }
    Ok(bose_factor(exponent))
}
