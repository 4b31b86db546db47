//! Stochastic estimate of the thermal-thermal term.
//!
//! Momenta are drawn from a tabulated radial Bose distribution and, with equal
//! probability, shifted by `Δ`; the estimator weights each sample by the
//! exact mixture density of the two draws. The shifted copy keeps the weight
//! bounded where `n(p - Δ)` diverges at unit fugacity, so the variance stays
//! finite and the reported standard error is meaningful.
//!
//! Reproducibility: samples are split over a fixed number of shards, shard `k`
//! drawing from ChaCha8 stream `k` of the given seed. Shard statistics are
//! merged in shard order, so the result is independent of thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadratureError};
use crate::scattering::ScaledPoint;
use crate::thermo::ThermoState;

pub const MIN_SAMPLES: u64 = 10_000;
const SHARDS: u64 = 64;
const TABLE_BINS: usize = 4096;
const CUTOFF_MULTIPLIER: f64 = 8.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
}

/// Piecewise-constant radial density `∝ 4πr² n(r)` on `[0, r_max]`.
#[derive(Debug, Clone)]
pub struct RadialTable {
    bin_width: f64,
    cumulative: Vec<f64>,
    density: Vec<f64>,
}

impl RadialTable {
    pub fn new(thermo: &ThermoState) -> Self {
        let r_max = CUTOFF_MULTIPLIER * (2.0 * thermo.tau).sqrt();
        let bin_width = r_max / TABLE_BINS as f64;
        let rule = Integrator::new(1e-10, 50);
        let masses: Vec<f64> = (0..TABLE_BINS)
            .map(|j| {
                let a = j as f64 * bin_width;
                let radial = |r: f64| 4.0 * PI * r * r * thermo.occupancy(r * r);
                // Any positive mass gives an exact sampler; accuracy only affects variance.
                match rule.integrate(radial, a, a + bin_width, &[]) {
                    Ok(est) => est.value,
                    Err(QuadratureError::NonConvergence { value, .. }) => value,
                    Err(QuadratureError::NonFinite { .. }) => 0.0,
                }
            })
            .collect();
        let total: f64 = masses.iter().sum();
        let mut cumulative = Vec::with_capacity(TABLE_BINS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for m in &masses {
            acc += m / total;
            cumulative.push(acc);
        }
        let density = masses.iter().map(|m| m / total / bin_width).collect();
        RadialTable {
            bin_width,
            cumulative,
            density,
        }
    }

    fn r_max(&self) -> f64 {
        self.bin_width * self.density.len() as f64
    }

    /// Inverse CDF of the tabulated radial distribution.
    fn sample_radius(&self, u: f64) -> f64 {
        let u = u * self.cumulative[self.cumulative.len() - 1];
        let j = match self.cumulative.partition_point(|&c| c <= u) {
            0 => 0,
            k => (k - 1).min(self.density.len() - 1),
        };
        let lo = self.cumulative[j];
        let hi = self.cumulative[j + 1];
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        (j as f64 + frac.clamp(0.0, 1.0)) * self.bin_width
    }

    /// Three-dimensional density of a point at radius `r`.
    fn density_3d(&self, r: f64) -> f64 {
        if r >= self.r_max() {
            return 0.0;
        }
        let j = ((r / self.bin_width) as usize).min(self.density.len() - 1);
        self.density[j] / (4.0 * PI * r * r)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count: n,
            mean: self.mean + d * other.count as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64) / n as f64,
        }
    }
}

fn run_shard(
    table: &RadialTable,
    thermo: &ThermoState,
    delta: f64,
    seed: u64,
    shard: u64,
    samples: u64,
) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut moments = Moments::default();
    for _ in 0..samples {
        let r = table.sample_radius(rng.random::<f64>());
        let cos = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * PI * rng.random::<f64>();
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let (x, y, mut z) = (r * sin * phi.cos(), r * sin * phi.sin(), r * cos);
        // Either p itself or p - Δ follows the tabulated distribution.
        if rng.random::<bool>() {
            z += delta;
        }
        let p2 = x * x + y * y + z * z;
        let zq = z - delta;
        let q2 = x * x + y * y + zq * zq;
        let q = 0.5 * (table.density_3d(p2.sqrt()) + table.density_3d(q2.sqrt()));
        let weight = if q > 0.0 && p2 > 0.0 && q2 > 0.0 {
            thermo.occupancy(p2) * thermo.occupancy(q2) / q
        } else {
            0.0
        };
        moments.push(weight);
    }
    moments
}

/// Monte Carlo estimate of the thermal-thermal term with its standard error.
pub fn term2b_monte_carlo(
    point: ScaledPoint,
    thermo: &ThermoState,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let table = RadialTable::new(thermo);
    let delta = point.delta();
    let per_shard = samples / SHARDS;
    let extra = samples % SHARDS;
    let shards: Vec<Moments> = (0..SHARDS)
        .into_par_iter()
        .map(|k| {
            let n = per_shard + u64::from(k < extra);
            run_shard(&table, thermo, delta, seed, k, n)
        })
        .collect();
    let total = shards.into_iter().fold(Moments::default(), Moments::merge);
    let variance = if total.count > 1 {
        total.m2 / (total.count - 1) as f64
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: total.mean / thermo.n_total,
        standard_error: (variance / total.count as f64).sqrt() / thermo.n_total,
        samples: total.count,
    })
}
