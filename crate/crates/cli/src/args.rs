use std::path::PathBuf;

use bose_scatter::lab_units::PolarizationMode;
use bose_scatter::Convention;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bose-scatter",
    version,
    about = "Bose-enhanced light scattering rate R(Δ, τ) of a uniform ideal Bose gas",
    after_help = "Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.\n\
                  BOSE_SCATTER_THREADS caps the number of worker threads."
)]
pub struct Cli {
    #[command(flatten)]
    pub engine: EngineArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Relative tolerance of every adaptive quadrature.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,

    /// Subdivision budget of every adaptive quadrature.
    #[arg(long, global = true)]
    pub max_subdivisions: Option<usize>,

    /// Normalization of the stimulated terms. `paper_constant` halves the
    /// critical density, doubling the thermal-thermal term.
    #[arg(long, global = true, value_parser = parse_convention)]
    pub convention: Option<Convention>,

    /// Momentum cutoff in units of the thermal momentum √(2τ).
    #[arg(long = "p-truncation", global = true)]
    pub p_truncation_multiplier: Option<f64>,

    /// key=value file with defaults for the flags above (same names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file (a directory for `figure1`); standard output otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    s.parse().map_err(|e: bose_scatter::Error| e.to_string())
}

fn parse_polarization(s: &str) -> Result<PolarizationMode, String> {
    s.parse().map_err(|e: bose_scatter::Error| e.to_string())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected MIN:MAX, got '{s}'"))?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn parse_mode(s: &str) -> Result<[i32; 3], String> {
    let parts: Vec<i32> = s
        .split(',')
        .map(|x| x.trim().parse::<i32>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected three integers i,j,l, got '{s}'"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate R and its three contributions at one point.
    Rate(PointArgs),
    /// Sweep τ at fixed Δ.
    SweepTau(SweepTauArgs),
    /// Sweep Δ at fixed τ.
    SweepDelta(SweepDeltaArgs),
    /// Total and condensate curves R(τ) for a family of Δ, one CSV per Δ.
    Figure1(Figure1Args),
    /// Angle-integrated enhancement 4π∫Δ²(R - 1)dΔ against its closed form.
    Sumrule(SumruleArgs),
    /// Laboratory units to scaled momentum transfer.
    Convert(ConvertArgs),
    /// Independent cross-checks of the engine.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct SweepTauArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    /// Explicit comma-separated τ values; overrides the range.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_range, default_value = "0.6:2.0")]
    pub tau_range: (f64, f64),
    #[arg(long, default_value_t = 141)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct SweepDeltaArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    /// Explicit comma-separated Δ values; overrides the range.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_range, default_value = "0.01:5.0")]
    pub delta_range: (f64, f64),
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Space the range logarithmically.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct Figure1Args {
    #[arg(long, value_delimiter = ',', default_value = "0.03,0.1,0.3,1.0")]
    pub delta_list: Vec<f64>,
    #[arg(long, value_parser = parse_range, default_value = "0.6:2.0")]
    pub tau_range: (f64, f64),
    #[arg(long, default_value_t = 141)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct SumruleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub mass_amu: f64,
    #[arg(long)]
    pub wavelength_nm: f64,
    #[arg(long)]
    pub tc_nk: f64,
    /// Scattering angle in milliradians.
    #[arg(long)]
    pub angle_mrad: Option<f64>,
    /// Scaled momentum transfer to convert back to an angle.
    #[arg(long)]
    pub delta: Option<f64>,
    /// With --angle-mrad: also report R there, and its ratio to R at 90°.
    #[arg(long)]
    pub tau: Option<f64>,
    /// With --angle-mrad: report the dipole angular factor for this polarization.
    #[arg(long, value_parser = parse_polarization)]
    pub polarization: Option<PolarizationMode>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Thermal-thermal term by direct radial × polar quadrature.
    Quad3d(PointArgs),
    /// Thermal-thermal term by Monte Carlo.
    Mc(McArgs),
    /// Rate in a finite periodic box against the continuum.
    Box(BoxArgs),
    /// Energy exchanged by stimulated and spontaneous scattering in a box.
    Energy(EnergyArgs),
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoxArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    /// Momentum spacing 2π/L.
    #[arg(long, default_value_t = 0.25)]
    pub spacing: f64,
    #[arg(long, default_value_t = 34)]
    pub max_mode: i32,
    /// Momentum transfer as a lattice vector i,j,l.
    #[arg(long, value_parser = parse_mode, default_value = "2,0,0")]
    pub delta_mode: [i32; 3],
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.42)]
    pub spacing: f64,
    #[arg(long, default_value_t = 16)]
    pub max_mode: i32,
}
