//! Tabular reports rendered as CSV, JSON or aligned text.
//!
//! CSV carries no timestamp, so identical inputs give identical bytes; run
//! metadata sits in `#` lines above the header. JSON adds a generation time
//! and follows `schema/report.schema.json`.

use std::io::Write;
use std::path::Path;

use bose_scatter::QuadratureConfig;
use serde_json::{json, Map, Value as Json};

use crate::args::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Num(x) if x.is_nan() => "NaN".into(),
            Value::Num(x) => format!("{x:.16e}"),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn text(&self) -> String {
        match self {
            Value::Num(x) if *x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e7) => format!("{x:.6e}"),
            Value::Num(x) => format!("{x:.8}"),
            other => other.csv(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Num(x) if x.is_finite() => json!(x),
            Value::Num(_) => Json::Null,
            Value::Int(i) => json!(i),
            Value::Bool(b) => json!(b),
            Value::Text(s) => json!(s),
        }
    }
}

pub type Record = Vec<(&'static str, Value)>;

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: QuadratureConfig,
    pub parameters: Record,
    pub rows: Vec<Record>,
    /// Points that could not be evaluated, with the reason.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config: &QuadratureConfig) -> Self {
        Report {
            command: command.to_string(),
            config: *config,
            parameters: Vec::new(),
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn single(command: &str, config: &QuadratureConfig, row: Record) -> Self {
        let mut r = Report::new(command, config);
        r.rows.push(row);
        r
    }

    fn columns(&self) -> Vec<&'static str> {
        self.rows
            .first()
            .map(|r| r.iter().map(|(k, _)| *k).collect())
            .unwrap_or_default()
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        out.push_str(&format!("# bose-scatter {}\n", bose_scatter::VERSION));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!(
            "# rel_tol={:e} max_subdivisions={} convention={} p_truncation={}\n",
            self.config.rel_tol,
            self.config.max_subdivisions,
            self.config.n_total_convention,
            self.config.p_truncation_multiplier
        ));
        for (k, v) in &self.parameters {
            out.push_str(&format!("# {k}={}\n", v.csv()));
        }
        for f in &self.failures {
            out.push_str(&format!("# failed: {f}\n"));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(self.columns())?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|(_, v)| v.csv()))?;
        }
        let body = writer
            .into_inner()
            .map_err(|e| CliError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8_lossy(&body));
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let object = |rec: &Record| -> Json {
            Json::Object(
                rec.iter()
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect::<Map<_, _>>(),
            )
        };
        let doc = json!({
            "command": self.command,
            "engine_version": bose_scatter::VERSION,
            "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "config": self.config,
            "parameters": object(&self.parameters),
            "rows": self.rows.iter().map(object).collect::<Vec<_>>(),
            "failures": self.failures,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.parameters {
            out.push_str(&format!("{k}: {}\n", v.text()));
        }
        if let [row] = self.rows.as_slice() {
            let width = row.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in row {
                out.push_str(&format!("{k:<width$}  {}\n", v.text()));
            }
        } else if !self.rows.is_empty() {
            let cells: Vec<Vec<String>> = self
                .rows
                .iter()
                .map(|r| r.iter().map(|(_, v)| v.text()).collect())
                .collect();
            let columns = self.columns();
            let widths: Vec<usize> = columns
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    cells
                        .iter()
                        .map(|r| r[j].len())
                        .chain([c.len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |items: Vec<String>| -> String {
                let padded: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            out.push_str(&line(columns.iter().map(|c| c.to_string()).collect()));
            for r in cells {
                out.push_str(&line(r));
            }
        }
        for f in &self.failures {
            out.push_str(&format!("failed: {f}\n"));
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Text => Ok(self.to_text()),
        }
    }
}

/// Write to `path`, or standard output when absent.
pub fn emit(content: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}
