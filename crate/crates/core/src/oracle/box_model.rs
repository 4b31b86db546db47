//! Finite momentum lattice: the uniform gas in a periodic box of side `L`,
//! single-particle momenta `(2π/L)·(i, j, l)` with `|i|, |j|, |l| ≤ max_mode`.
//!
//! Occupancies are isotropic, so they are stored per shell `i² + j² + l²`;
//! explicit per-mode entries (the condensate, or hand-built states) override
//! the shell value.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bose_math::{bose_factor, Fugacity};
use crate::config::Convention;
use crate::error::{Error, Result};
use crate::thermo::critical_density;

pub type Mode = [i32; 3];

/// Largest occupancy tolerated on the outermost lattice shell.
pub const BOUNDARY_OCCUPANCY_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BoxModel {
    box_scale: f64,
    max_mode: i32,
    tau: f64,
    fugacity: Fugacity,
    shell: Vec<f64>,
    multiplicity: Vec<u64>,
    overrides: BTreeMap<Mode, f64>,
}

/// Number of lattice modes in the cube on each shell `r² = i² + j² + l²`.
fn shell_multiplicities(max_mode: i32) -> Vec<u64> {
    let m = max_mode as usize;
    let mut counts = vec![0u64; 3 * m * m + 1];
    let weight = |k: usize| if k == 0 { 1 } else { 2 };
    for i in 0..=m {
        for j in 0..=m {
            let w_ij = weight(i) * weight(j);
            let base = i * i + j * j;
            for l in 0..=m {
                counts[base + l * l] += w_ij * weight(l);
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxRate {
    /// `Σ_i n_i (n_{i-Δ} + 1) / Σ_i n_i`.
    pub total: f64,
    pub unstimulated: f64,
    pub stimulated: f64,
    /// The part of `stimulated` in which the zero mode is initial or final state.
    pub condensate_involving: f64,
    pub atoms: f64,
    pub boundary_occupancy: f64,
    pub cutoff_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBalance {
    /// `Σ_{i,f} n_i n_f (E_f - E_i)`; zero by pair symmetry.
    pub stimulated_net: f64,
    /// `Σ_{i,f} |n_i n_f (E_f - E_i)|`.
    pub stimulated_gross: f64,
    /// `Σ_{i,f} n_i (E_f - E_i)`: heating from spontaneous scattering.
    pub unstimulated_net: f64,
    /// Mean energy gained per spontaneous scattering event.
    pub heating_per_scattering: f64,
    /// Mean `|p_f - p_i|² / 2` over spontaneous events.
    pub mean_recoil: f64,
    /// Occupancy-weighted mean kinetic energy of the gas.
    pub mean_energy: f64,
    pub modes: usize,
}

impl BoxModel {
    /// Equilibrium box at the critical density. Above `T_c` the fugacity is
    /// tuned so the lattice sum hits the density; at and below it the
    /// fugacity is one and the zero mode takes up the remainder.
    pub fn equilibrium(tau: f64, box_scale: f64, max_mode: i32) -> Result<Self> {
        Self::check_geometry(box_scale, max_mode)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        let multiplicity = shell_multiplicities(max_mode);
        let spacing = 2.0 * PI / box_scale;
        let cell = spacing.powi(3);
        let target = critical_density(Convention::Integral) / cell;
        let shell_energy = |r2: usize| r2 as f64 * spacing * spacing / (2.0 * tau);
        let count = |alpha: f64| -> f64 {
            multiplicity
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0)
                .map(|(r2, &m)| m as f64 * bose_factor(shell_energy(r2) + alpha))
                .sum()
        };

        let mut overrides = BTreeMap::new();
        let fugacity = if tau <= 1.0 {
            let excited: f64 = multiplicity
                .iter()
                .enumerate()
                .skip(1)
                .map(|(r2, &m)| m as f64 * bose_factor(shell_energy(r2)))
                .sum();
            let condensate = target - excited;
            if condensate < 0.0 {
                return Err(Error::domain(format!(
                    "box too small: excited states already hold {excited:.6} of {target:.6} atoms"
                )));
            }
            overrides.insert([0, 0, 0], condensate);
            Fugacity::ONE
        } else {
            // count(α) decreases from +∞ at α = 0.
            let mut lo = f64::MIN_POSITIVE;
            let mut hi = 1.0;
            while count(hi) > target {
                lo = hi;
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = if lo > 0.0 && hi / lo > 4.0 {
                    (lo * hi).sqrt()
                } else {
                    0.5 * (lo + hi)
                };
                if count(mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            Fugacity::from_alpha(0.5 * (lo + hi))?
        };

        let alpha = fugacity.alpha();
        let shell = (0..multiplicity.len())
            .map(|r2| {
                if r2 == 0 && alpha == 0.0 {
                    0.0
                } else {
                    bose_factor(shell_energy(r2) + alpha)
                }
            })
            .collect();

        Ok(BoxModel {
            box_scale,
            max_mode,
            tau,
            fugacity,
            shell,
            multiplicity,
            overrides,
        })
    }

    /// A box whose only occupied modes are the listed ones.
    pub fn from_occupancies(
        tau: f64,
        box_scale: f64,
        max_mode: i32,
        modes: impl IntoIterator<Item = (Mode, f64)>,
    ) -> Result<Self> {
        Self::check_geometry(box_scale, max_mode)?;
        let multiplicity = shell_multiplicities(max_mode);
        let mut overrides = BTreeMap::new();
        for (mode, n) in modes {
            if mode.iter().any(|c| c.abs() > max_mode) {
                return Err(Error::domain(format!("mode {mode:?} lies outside the box")));
            }
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::domain(format!(
                    "occupancy of {mode:?} must be non-negative"
                )));
            }
            overrides.insert(mode, n);
        }
        Ok(BoxModel {
            box_scale,
            max_mode,
            tau,
            fugacity: Fugacity::ONE,
            shell: vec![0.0; multiplicity.len()],
            multiplicity,
            overrides,
        })
    }

    fn check_geometry(box_scale: f64, max_mode: i32) -> Result<()> {
        if !(box_scale > 0.0 && box_scale.is_finite()) {
            return Err(Error::domain(format!(
                "box scale must be positive, got {box_scale}"
            )));
        }
        if max_mode < 1 {
            return Err(Error::domain(format!(
                "max_mode must be at least 1, got {max_mode}"
            )));
        }
        Ok(())
    }

    /// Every occupancy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.shell.iter_mut().for_each(|n| *n *= factor);
        out.overrides.values_mut().for_each(|n| *n *= factor);
        out
    }

    pub fn box_scale(&self) -> f64 {
        self.box_scale
    }

    /// Momentum spacing `2π/L`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.box_scale
    }

    pub fn max_mode(&self) -> i32 {
        self.max_mode
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fugacity(&self) -> Fugacity {
        self.fugacity
    }

    pub fn mode_count(&self) -> usize {
        let side = 2 * self.max_mode as usize + 1;
        side * side * side
    }

    fn contains(&self, mode: Mode) -> bool {
        mode.iter().all(|c| c.abs() <= self.max_mode)
    }

    #[inline]
    fn shell_occupancy(&self, mode: Mode) -> f64 {
        let r2 = mode
            .iter()
            .map(|&c| (c as i64 * c as i64) as usize)
            .sum::<usize>();
        self.shell[r2]
    }

    /// Mean occupancy of a mode; zero outside the box.
    pub fn occupancy(&self, mode: Mode) -> f64 {
        if !self.contains(mode) {
            return 0.0;
        }
        match self.overrides.get(&mode) {
            Some(&n) => n,
            None => self.shell_occupancy(mode),
        }
    }

    pub fn total_occupancy(&self) -> f64 {
        let isotropic: f64 = self
            .multiplicity
            .iter()
            .zip(&self.shell)
            .map(|(&m, &n)| m as f64 * n)
            .sum();
        let correction: f64 = self
            .overrides
            .iter()
            .map(|(&mode, &n)| n - self.shell_occupancy(mode))
            .sum();
        isotropic + correction
    }

    /// Number density `Σ n · (2π/L)³` in the continuum normalization.
    pub fn density(&self) -> f64 {
        self.total_occupancy() * self.spacing().powi(3)
    }

    pub fn zero_mode_occupancy(&self) -> f64 {
        self.occupancy([0, 0, 0])
    }

    /// Largest occupancy on the faces of the mode cube.
    pub fn boundary_occupancy(&self) -> f64 {
        let m = self.max_mode as usize;
        let shell_max = self.shell[m * m];
        self.overrides
            .iter()
            .filter(|(mode, _)| mode.iter().any(|c| c.abs() == self.max_mode))
            .map(|(_, &n)| n)
            .fold(shell_max, f64::max)
    }

    fn dense(&self) -> Vec<(Mode, f64)> {
        let m = self.max_mode;
        let mut out = Vec::with_capacity(self.mode_count());
        for i in -m..=m {
            for j in -m..=m {
                for l in -m..=m {
                    let mode = [i, j, l];
                    out.push((mode, self.occupancy(mode)));
                }
            }
        }
        out
    }
}

/// Discrete scattering rate for lattice momentum transfer `delta_mode`,
/// `Σ_i n_i (n_{i-Δ} + 1) / Σ_i n_i`. States outside the box count as empty.
pub fn box_rate(model: &BoxModel, delta_mode: Mode) -> Result<BoxRate> {
    if delta_mode == [0, 0, 0] {
        return Err(Error::domain("momentum transfer must be non-zero"));
    }
    let atoms = model.total_occupancy();
    if atoms.is_nan() || atoms <= 0.0 {
        return Err(Error::domain("box holds no atoms"));
    }
    let m = model.max_mode;
    let [dx, dy, dz] = delta_mode;

    // Isotropic part over the whole cube, one x-slab per task.
    let isotropic: f64 = (-m..=m)
        .into_par_iter()
        .map(|i| {
            let fi = i - dx;
            if fi.abs() > m {
                return 0.0;
            }
            let mut acc = 0.0;
            for j in -m..=m {
                let fj = j - dy;
                if fj.abs() > m {
                    continue;
                }
                for l in -m..=m {
                    let fl = l - dz;
                    if fl.abs() > m {
                        continue;
                    }
                    acc += model.shell_occupancy([i, j, l]) * model.shell_occupancy([fi, fj, fl]);
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();

    // Swap in the exact product wherever an overridden mode takes part.
    let sub = |a: Mode, b: Mode| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let add = |a: Mode, b: Mode| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let mut touched: Vec<Mode> = model
        .overrides
        .keys()
        .flat_map(|&o| [o, add(o, delta_mode)])
        .filter(|&i| model.contains(i) && model.contains(sub(i, delta_mode)))
        .collect();
    touched.sort_unstable();
    touched.dedup();
    let correction: f64 = touched
        .iter()
        .map(|&i| {
            let f = sub(i, delta_mode);
            model.occupancy(i) * model.occupancy(f)
                - model.shell_occupancy(i) * model.shell_occupancy(f)
        })
        .sum();
    let pair_sum = isotropic + correction;

    let zero = [0, 0, 0];
    let condensate_pairs = model.occupancy(zero) * model.occupancy(sub(zero, delta_mode))
        + model.occupancy(delta_mode) * model.occupancy(zero);

    let boundary = model.boundary_occupancy();
    Ok(BoxRate {
        total: 1.0 + pair_sum / atoms,
        unstimulated: 1.0,
        stimulated: pair_sum / atoms,
        condensate_involving: condensate_pairs / atoms,
        atoms,
        boundary_occupancy: boundary,
        cutoff_warning: boundary > BOUNDARY_OCCUPANCY_LIMIT,
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Energy exchanged by scattering over every ordered pair of box modes.
///
/// Stimulated transitions `i → f` carry weight `n_i n_f` and the reverse
/// transition the same weight, so their energy changes cancel pair by pair.
/// Spontaneous transitions carry weight `n_i` only and heat the gas.
pub fn stimulated_energy_balance(model: &BoxModel) -> EnergyBalance {
    let spacing = model.spacing();
    let states: Vec<(f64, f64, Mode)> = model
        .dense()
        .into_iter()
        .map(|(mode, n)| {
            let r2: f64 = mode.iter().map(|&c| (c as f64) * (c as f64)).sum();
            (0.5 * r2 * spacing * spacing, n, mode)
        })
        .collect();

    struct Row {
        stim: Compensated,
        gross: Compensated,
        unstim: Compensated,
        recoil: Compensated,
    }

    let rows: Vec<Row> = states
        .par_iter()
        .map(|&(e_i, n_i, mode_i)| {
            let mut row = Row {
                stim: Compensated::default(),
                gross: Compensated::default(),
                unstim: Compensated::default(),
                recoil: Compensated::default(),
            };
            if n_i == 0.0 {
                return row;
            }
            for &(e_f, n_f, mode_f) in &states {
                let de = e_f - e_i;
                let flow = n_i * n_f * de;
                row.stim.add(flow);
                row.gross.add(flow.abs());
                row.unstim.add(n_i * de);
                let q2: f64 = (0..3)
                    .map(|k| ((mode_f[k] - mode_i[k]) as f64).powi(2))
                    .sum();
                row.recoil.add(n_i * 0.5 * q2 * spacing * spacing);
            }
            row
        })
        .collect();

    let mut stim = Compensated::default();
    let mut gross = Compensated::default();
    let mut unstim = Compensated::default();
    let mut recoil = Compensated::default();
    for r in &rows {
        stim.add(r.stim.value());
        gross.add(r.gross.value());
        unstim.add(r.unstim.value());
        recoil.add(r.recoil.value());
    }

    let modes = states.len();
    let atoms: f64 = states.iter().map(|s| s.1).sum();
    let energy: f64 = states.iter().map(|s| s.0 * s.1).sum();
    let events = atoms * modes as f64;
    EnergyBalance {
        stimulated_net: stim.value(),
        stimulated_gross: gross.value(),
        unstimulated_net: unstim.value(),
        heating_per_scattering: unstim.value() / events,
        mean_recoil: recoil.value() / events,
        mean_energy: energy / atoms,
        modes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_cover_the_cube() {
        for m in [1, 2, 5] {
            let counts = shell_multiplicities(m);
            let side = (2 * m + 1) as u64;
            assert_eq!(counts.iter().sum::<u64>(), side * side * side);
            assert_eq!(counts[0], 1);
            assert_eq!(counts[1], 6);
        }
        assert_eq!(shell_multiplicities(2)[2], 12);
        assert_eq!(shell_multiplicities(2)[3], 8);
    }

    #[test]
    fn equilibrium_box_hits_target_density() {
        let target = critical_density(Convention::Integral);
        for tau in [0.8, 1.2] {
            let model = BoxModel::equilibrium(tau, 2.0 * PI / 0.25, 34).unwrap();
            assert!((model.density() / target - 1.0).abs() < 1e-10, "tau {tau}");
        }
    }

    #[test]
    fn single_atom_scatters_spontaneously_only() {
        let model = BoxModel::from_occupancies(1.0, 10.0, 3, [([1, 0, 0], 1.0)]).unwrap();
        let rate = box_rate(&model, [1, 0, 0]).unwrap();
        assert_eq!(rate.total, 1.0);
        assert_eq!(rate.stimulated, 0.0);
        assert_eq!(rate.atoms, 1.0);
    }

    #[test]
    fn occupied_final_state_stimulates() {
        // Two atoms in a, three in b = a - Δ: pairs a → b contribute 2·3.
        let model =
            BoxModel::from_occupancies(1.0, 10.0, 3, [([1, 0, 0], 2.0), ([0, 0, 0], 3.0)]).unwrap();
        let rate = box_rate(&model, [1, 0, 0]).unwrap();
        assert_eq!(rate.stimulated, 6.0 / 5.0);
        assert_eq!(rate.condensate_involving, 6.0 / 5.0);
    }

    #[test]
    fn box_rate_rejects_zero_transfer() {
        let model = BoxModel::from_occupancies(1.0, 10.0, 2, [([0, 0, 0], 1.0)]).unwrap();
        assert!(box_rate(&model, [0, 0, 0]).is_err());
    }

    #[test]
    fn shell_path_matches_dense_sum() {
        let model = BoxModel::equilibrium(0.9, 2.0 * PI / 0.6, 8).unwrap();
        let delta = [2, 1, 0];
        let dense = model.dense();
        let atoms: f64 = dense.iter().map(|d| d.1).sum();
        let pairs: f64 = dense
            .iter()
            .map(|&(i, n)| n * model.occupancy([i[0] - delta[0], i[1] - delta[1], i[2] - delta[2]]))
            .sum();
        let rate = box_rate(&model, delta).unwrap();
        assert!((rate.stimulated - pairs / atoms).abs() < 1e-12 * rate.stimulated);
        assert!((rate.atoms - atoms).abs() < 1e-10 * atoms);
    }

    #[test]
    fn stimulated_terms_scale_quadratically() {
        let base = BoxModel::equilibrium(1.3, 2.0 * PI / 0.5, 12).unwrap();
        let s = 3.0;
        let scaled = base.scaled(s);
        let delta = [1, 0, 0];
        let a = box_rate(&base, delta).unwrap();
        let b = box_rate(&scaled, delta).unwrap();
        // Unstimulated: Σ n_i scales as s. Stimulated: Σ n_i n_f scales as s².
        assert!((b.atoms / a.atoms - s).abs() < 1e-12);
        let pair_a = a.stimulated * a.atoms;
        let pair_b = b.stimulated * b.atoms;
        assert!((pair_b / pair_a - s * s).abs() < 1e-10);
        assert_eq!(b.unstimulated, a.unstimulated);
    }

    #[test]
    fn energy_balance_single_mode() {
        let model = BoxModel::from_occupancies(1.0, 10.0, 2, [([1, 1, 0], 5.0)]).unwrap();
        let balance = stimulated_energy_balance(&model);
        assert_eq!(balance.stimulated_net, 0.0);
        assert!(balance.unstimulated_net > 0.0);
    }

    #[test]
    fn energy_balance_small_thermal_box() {
        let model = BoxModel::equilibrium(0.8, 2.0 * PI / 0.9, 8).unwrap();
        let b = stimulated_energy_balance(&model);
        assert!(b.stimulated_gross > 0.0);
        assert!(b.stimulated_net.abs() <= 1e-10 * b.stimulated_gross);
        assert!(b.unstimulated_net > 0.0);
        // Σ_f (E_f - E_i) = Σ_f |f - i|²/2 - M·2E_i on a symmetric lattice.
        let expected = b.mean_recoil - 2.0 * b.mean_energy;
        assert!((b.heating_per_scattering - expected).abs() < 1e-10 * b.mean_recoil);
    }
}
