//! Engine settings from defaults, an optional key=value file, and flags, in
//! increasing order of precedence.

use std::path::{Path, PathBuf};

use bose_scatter::{Convention, QuadratureConfig};

use crate::args::{EngineArgs, Format};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Settings {
    pub quadrature: QuadratureConfig,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, PartialEq)]
struct FileValues {
    rel_tol: Option<f64>,
    max_subdivisions: Option<usize>,
    convention: Option<Convention>,
    p_truncation_multiplier: Option<f64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn parse_file(text: &str, origin: &Path) -> Result<FileValues, CliError> {
    let mut values = FileValues::default();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", origin.display(), number + 1);
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("{}: expected key=value, got '{line}'", at()))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |e: String| CliError::usage(format!("{}: {key}: {e}", at()));
        match key.as_str() {
            "rel-tol" => values.rel_tol = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "max-subdivisions" => {
                values.max_subdivisions = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "convention" => {
                values.convention = Some(
                    value
                        .parse()
                        .map_err(|e: bose_scatter::Error| bad(e.to_string()))?,
                )
            }
            "p-truncation" => {
                values.p_truncation_multiplier =
                    Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "format" => {
                values.format = Some(match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    "text" => Format::Text,
                    other => return Err(bad(format!("unknown format '{other}'"))),
                })
            }
            "out" => values.out = Some(PathBuf::from(value)),
            other => return Err(CliError::usage(format!("{}: unknown key '{other}'", at()))),
        }
    }
    Ok(values)
}

impl Settings {
    pub fn resolve(args: &EngineArgs) -> Result<Settings, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_file(&text, path)?
            }
            None => FileValues::default(),
        };
        let defaults = QuadratureConfig::default();
        let quadrature = QuadratureConfig {
            rel_tol: args.rel_tol.or(file.rel_tol).unwrap_or(defaults.rel_tol),
            max_subdivisions: args
                .max_subdivisions
                .or(file.max_subdivisions)
                .unwrap_or(defaults.max_subdivisions),
            n_total_convention: args
                .convention
                .or(file.convention)
                .unwrap_or(defaults.n_total_convention),
            p_truncation_multiplier: args
                .p_truncation_multiplier
                .or(file.p_truncation_multiplier)
                .unwrap_or(defaults.p_truncation_multiplier),
        };
        quadrature.validate()?;
        Ok(Settings {
            quadrature,
            format: args.format.or(file.format),
            out: args.out.clone().or(file.out),
        })
    }
}
