use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use bose_scatter::lab_units::{
    angle_from_delta, delta_from_angle, delta_small_angle, heating_reduction_factor,
    polarization_factor, scaled_photon_momentum, LabParameters,
};
use bose_scatter::oracle::{
    box_rate, stimulated_energy_balance, term2b_monte_carlo, term2b_quadrature_3d, BoxModel,
};
use bose_scatter::scattering::{
    condensate_term, sum_rule, sweep_delta, sweep_tau, thermal_thermal_term,
};
use bose_scatter::{total_rate, RateBreakdown, ScaledPoint, ThermoState};

use crate::args::{
    BoxArgs, ConvertArgs, EnergyArgs, Figure1Args, Format, McArgs, OracleCommand, PointArgs,
    SumruleArgs, SweepDeltaArgs, SweepTauArgs,
};
use crate::error::CliError;
use crate::output::{emit, Record, Report};
use crate::settings::Settings;

/// Share of failed grid points above which a sweep exits with code 3.
const MAX_FAILURE_SHARE: f64 = 0.10;

fn breakdown_row(b: &RateBreakdown) -> Record {
    vec![
        ("delta", b.delta.into()),
        ("tau", b.tau.into()),
        ("unstimulated", b.unstimulated.into()),
        ("thermal_thermal", b.thermal_thermal.into()),
        ("condensate", b.condensate.into()),
        ("total", b.total.into()),
        ("quadrature_error", b.quadrature_error.into()),
    ]
}

fn failed_row(delta: f64, tau: f64) -> Record {
    let nan = f64::NAN;
    vec![
        ("delta", delta.into()),
        ("tau", tau.into()),
        ("unstimulated", nan.into()),
        ("thermal_thermal", nan.into()),
        ("condensate", nan.into()),
        ("total", nan.into()),
        ("quadrature_error", nan.into()),
    ]
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid((lo, hi): (f64, f64), steps: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::usage(format!(
            "range must satisfy MIN < MAX, got {lo}:{hi}"
        )));
    }
    if steps < 2 {
        return Err(CliError::usage(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect())
}

fn log_grid((lo, hi): (f64, f64), steps: usize) -> Result<Vec<f64>, CliError> {
    if lo.is_nan() || lo <= 0.0 {
        return Err(CliError::usage("a logarithmic range needs MIN > 0"));
    }
    let exps = linear_grid((lo.ln(), hi.ln()), steps)?;
    let mut grid: Vec<f64> = exps.into_iter().map(f64::exp).collect();
    grid[0] = lo;
    *grid.last_mut().expect("at least two points") = hi;
    Ok(grid)
}

fn check_failures(failed: usize, points: usize) -> Result<(), CliError> {
    if failed == 0 {
        return Ok(());
    }
    eprintln!("warning: {failed} of {points} points failed");
    if failed as f64 > MAX_FAILURE_SHARE * points as f64 {
        return Err(CliError::Numerical(format!(
            "{failed} of {points} points failed to converge (limit {:.0}%)",
            100.0 * MAX_FAILURE_SHARE
        )));
    }
    Ok(())
}

fn finish(report: &Report, settings: &Settings, default: Format) -> Result<(), CliError> {
    let content = report.render(settings.format.unwrap_or(default))?;
    emit(&content, settings.out.as_deref())
}

pub fn rate(args: PointArgs, settings: &Settings) -> Result<(), CliError> {
    let point = ScaledPoint::new(args.delta, args.tau)?;
    let b = total_rate(point, &settings.quadrature)?;
    finish(
        &Report::single("rate", &settings.quadrature, breakdown_row(&b)),
        settings,
        Format::Text,
    )
}

fn sweep_report(
    command: &str,
    settings: &Settings,
    results: Vec<(f64, bose_scatter::Result<RateBreakdown>)>,
    point_of: impl Fn(f64) -> (f64, f64),
) -> Report {
    let mut report = Report::new(command, &settings.quadrature);
    for (x, result) in results {
        let (delta, tau) = point_of(x);
        match result {
            Ok(b) => report.rows.push(breakdown_row(&b)),
            Err(e) => {
                report
                    .failures
                    .push(format!("delta={delta} tau={tau}: {e}"));
                report.rows.push(failed_row(delta, tau));
            }
        }
    }
    report
}

pub fn sweep_tau_cmd(args: SweepTauArgs, settings: &Settings) -> Result<(), CliError> {
    let grid = match args.taus {
        Some(t) => t,
        None => linear_grid(args.tau_range, args.steps)?,
    };
    let results = sweep_tau(args.delta, &grid, &settings.quadrature)?;
    let mut report = sweep_report("sweep-tau", settings, results, |tau| (args.delta, tau));
    report.parameters.push(("delta", args.delta.into()));
    finish(&report, settings, Format::Csv)?;
    check_failures(report.failures.len(), grid.len())
}

pub fn sweep_delta_cmd(args: SweepDeltaArgs, settings: &Settings) -> Result<(), CliError> {
    let grid = match args.deltas {
        Some(d) => d,
        None if args.log => log_grid(args.delta_range, args.steps)?,
        None => linear_grid(args.delta_range, args.steps)?,
    };
    let results = sweep_delta(args.tau, &grid, &settings.quadrature)?;
    let mut report = sweep_report("sweep-delta", settings, results, |delta| (delta, args.tau));
    report.parameters.push(("tau", args.tau.into()));
    finish(&report, settings, Format::Csv)?;
    check_failures(report.failures.len(), grid.len())
}

pub fn figure1_file_name(delta: f64, format: Format) -> String {
    let ext = if format == Format::Json {
        "json"
    } else {
        "csv"
    };
    format!("figure1_delta_{delta}.{ext}")
}

pub fn figure1(args: Figure1Args, settings: &Settings) -> Result<(), CliError> {
    let format = settings.format.unwrap_or(Format::Csv);
    if format == Format::Text {
        return Err(CliError::usage("figure1 writes csv or json files"));
    }
    if args.delta_list.is_empty() {
        return Err(CliError::usage("delta list is empty"));
    }
    let grid = linear_grid(args.tau_range, args.steps)?;
    let dir: PathBuf = settings.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;

    let mut failed = 0usize;
    let mut total_points = 0usize;
    for &delta in &args.delta_list {
        let results = sweep_tau(delta, &grid, &settings.quadrature)?;
        let mut report = Report::new("figure1", &settings.quadrature);
        report.parameters.push(("delta", delta.into()));
        for (tau, result) in results {
            let (total, condensate) = match result {
                Ok(b) => (b.total, b.condensate),
                Err(e) => {
                    report
                        .failures
                        .push(format!("delta={delta} tau={tau}: {e}"));
                    (f64::NAN, f64::NAN)
                }
            };
            report.rows.push(vec![
                ("tau", tau.into()),
                ("total", total.into()),
                ("condensate_contribution", condensate.into()),
            ]);
        }
        failed += report.failures.len();
        total_points += grid.len();
        let path = dir.join(figure1_file_name(delta, format));
        emit(&report.render(format)?, Some(Path::new(&path)))?;
    }

    check_failures(failed, total_points)
}

pub fn sumrule(args: SumruleArgs, settings: &Settings) -> Result<(), CliError> {
    let s = sum_rule(args.tau, &settings.quadrature)?;
    let row = vec![
        ("tau", s.tau.into()),
        ("value", s.value.into()),
        ("abs_error", s.abs_error.into()),
        ("expected", s.expected.into()),
        ("n_total", s.n_total.into()),
        ("ratio_to_n_total", s.ratio_to_n_total().into()),
        ("ratio_to_expected", (s.value / s.expected).into()),
    ];
    finish(
        &Report::single("sumrule", &settings.quadrature, row),
        settings,
        Format::Text,
    )
}

pub fn convert(args: ConvertArgs, settings: &Settings) -> Result<(), CliError> {
    let params = LabParameters::from_lab_units(args.mass_amu, args.wavelength_nm, args.tc_nk)?;
    let k = scaled_photon_momentum(&params)?;
    let mut row: Record = vec![
        ("atom_mass_kg", params.atom_mass.into()),
        ("wavelength_m", params.wavelength.into()),
        ("critical_temperature_k", params.critical_temperature.into()),
        ("momentum_unit_si", params.momentum_unit().into()),
        ("photon_momentum", k.into()),
    ];
    if let Some(mrad) = args.angle_mrad {
        let theta = mrad * 1e-3;
        let delta = delta_from_angle(theta, k)?;
        row.push(("angle_rad", theta.into()));
        row.push(("delta", delta.into()));
        row.push(("delta_small_angle", delta_small_angle(theta, k)?.into()));
        if let Some(mode) = args.polarization {
            row.push((
                "polarization_factor",
                polarization_factor(theta, mode).into(),
            ));
        }
        if let Some(tau) = args.tau {
            let here = ScaledPoint::new(delta, tau)?;
            let right = ScaledPoint::new(delta_from_angle(PI / 2.0, k)?, tau)?;
            row.push(("tau", tau.into()));
            row.push(("rate", total_rate(here, &settings.quadrature)?.total.into()));
            row.push((
                "rate_at_right_angle",
                total_rate(right, &settings.quadrature)?.total.into(),
            ));
            row.push((
                "heating_reduction_factor",
                heating_reduction_factor(here, right, &settings.quadrature)?.into(),
            ));
        }
    } else if args.tau.is_some() || args.polarization.is_some() {
        return Err(CliError::usage(
            "--tau and --polarization need --angle-mrad",
        ));
    }
    if let Some(delta) = args.delta {
        row.push(("angle_for_delta_rad", angle_from_delta(delta, k)?.into()));
    }
    finish(
        &Report::single("convert", &settings.quadrature, row),
        settings,
        Format::Text,
    )
}

pub fn oracle(cmd: OracleCommand, settings: &Settings) -> Result<(), CliError> {
    let cfg = &settings.quadrature;
    let report = match cmd {
        OracleCommand::Quad3d(p) => {
            let point = ScaledPoint::new(p.delta, p.tau)?;
            let thermo = ThermoState::new(p.tau, cfg.n_total_convention)?;
            let reduced = thermal_thermal_term(point, &thermo, cfg)?;
            let direct = term2b_quadrature_3d(point, &thermo, cfg)?;
            let row = vec![
                ("delta", p.delta.into()),
                ("tau", p.tau.into()),
                ("reduced", reduced.value.into()),
                ("reduced_error", reduced.abs_error.into()),
                ("direct_3d", direct.value.into()),
                ("direct_3d_error", direct.abs_error.into()),
                (
                    "relative_difference",
                    (reduced.value / direct.value - 1.0).into(),
                ),
            ];
            Report::single("oracle quad3d", cfg, row)
        }
        OracleCommand::Mc(McArgs {
            point: p,
            samples,
            seed,
        }) => {
            let point = ScaledPoint::new(p.delta, p.tau)?;
            let thermo = ThermoState::new(p.tau, cfg.n_total_convention)?;
            let mc = term2b_monte_carlo(point, &thermo, samples, seed)?;
            let reduced = thermal_thermal_term(point, &thermo, cfg)?.value;
            let row = vec![
                ("delta", p.delta.into()),
                ("tau", p.tau.into()),
                ("samples", (mc.samples as i64).into()),
                ("seed", (seed as i64).into()),
                ("estimate", mc.estimate.into()),
                ("standard_error", mc.standard_error.into()),
                ("reduced", reduced.into()),
                ("pull", ((mc.estimate - reduced) / mc.standard_error).into()),
            ];
            Report::single("oracle mc", cfg, row)
        }
        OracleCommand::Box(a) => box_report(a, settings)?,
        OracleCommand::Energy(a) => energy_report(a, settings)?,
    };
    finish(&report, settings, Format::Text)
}

fn check_spacing(spacing: f64) -> Result<f64, CliError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(CliError::usage(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    Ok(2.0 * PI / spacing)
}

fn box_report(a: BoxArgs, settings: &Settings) -> Result<Report, CliError> {
    let model = BoxModel::equilibrium(a.tau, check_spacing(a.spacing)?, a.max_mode)?;
    let rate = box_rate(&model, a.delta_mode)?;
    if rate.cutoff_warning {
        eprintln!(
            "warning: boundary occupancy {:e} exceeds the truncation limit; raise --max-mode",
            rate.boundary_occupancy
        );
    }
    let [i, j, l] = a.delta_mode;
    let delta = a.spacing * ((i * i + j * j + l * l) as f64).sqrt();
    let point = ScaledPoint::new(delta, a.tau)?;
    let cfg = settings
        .quadrature
        .with_convention(bose_scatter::Convention::Integral);
    let continuum = total_rate(point, &cfg)?;
    let thermo = ThermoState::new(a.tau, cfg.n_total_convention)?;
    let row = vec![
        ("tau", a.tau.into()),
        ("spacing", a.spacing.into()),
        ("max_mode", i64::from(a.max_mode).into()),
        ("delta", delta.into()),
        ("box_total", rate.total.into()),
        ("box_stimulated", rate.stimulated.into()),
        ("box_condensate_involving", rate.condensate_involving.into()),
        ("continuum_total", continuum.total.into()),
        (
            "continuum_condensate",
            condensate_term(point, &thermo).into(),
        ),
        (
            "relative_difference",
            (rate.total / continuum.total - 1.0).into(),
        ),
        ("boundary_occupancy", rate.boundary_occupancy.into()),
        ("cutoff_warning", rate.cutoff_warning.into()),
    ];
    let mut report = Report::single("oracle box", &cfg, row);
    report
        .parameters
        .push(("delta_mode", format!("{i};{j};{l}").into()));
    Ok(report)
}

fn energy_report(a: EnergyArgs, settings: &Settings) -> Result<Report, CliError> {
    let model = BoxModel::equilibrium(a.tau, check_spacing(a.spacing)?, a.max_mode)?;
    let b = stimulated_energy_balance(&model);
    let row = vec![
        ("tau", a.tau.into()),
        ("spacing", a.spacing.into()),
        ("max_mode", i64::from(a.max_mode).into()),
        ("modes", (b.modes as i64).into()),
        ("stimulated_net", b.stimulated_net.into()),
        ("stimulated_gross", b.stimulated_gross.into()),
        (
            "stimulated_relative",
            (b.stimulated_net / b.stimulated_gross).into(),
        ),
        ("unstimulated_net", b.unstimulated_net.into()),
        ("heating_per_scattering", b.heating_per_scattering.into()),
        ("mean_recoil", b.mean_recoil.into()),
        ("mean_energy", b.mean_energy.into()),
        ("boundary_occupancy", model.boundary_occupancy().into()),
    ];
    Ok(Report::single("oracle energy", &settings.quadrature, row))
}
