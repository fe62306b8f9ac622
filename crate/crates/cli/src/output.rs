//! Tabular results and their CSV / JSON encodings.
//!
//! Both formats carry the library version and the normalised run
//! configuration, so every file can be traced back to (and re-run from) the
//! exact parameters that produced it. Non-finite values are written as the
//! tokens `inf`, `-inf` and `nan`.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Prefix of the CSV comment line holding the configuration echo.
pub const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(format_num(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<wqed::Limit<f64>> for Cell {
    fn from(v: wqed::Limit<f64>) -> Self {
        Cell::Num(v.value())
    }
}

/// Shortest round-tripping decimal, locale independent.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Parse a cell written by [`format_num`].
pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Columns, rows in grid order, and summary lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// `key: value` summary lines (trace checks, thresholds, ...).
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.footer.push(line.into());
    }

    pub fn write(&self, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
        match config.output.format {
            Format::Csv => self.write_csv(config, out),
            Format::Json => self.write_json(config, out),
        }
    }

    fn write_csv(&self, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
        let echo = serde_json::to_string(config).expect("configs serialise");
        writeln!(out, "# wqed {}", wqed::VERSION)?;
        writeln!(out, "{CONFIG_PREFIX}{echo}")?;
        {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
            w.write_record(&self.columns).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::csv)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        for line in &self.footer {
            writeln!(out, "# {line}")?;
        }
        Ok(())
    }

    fn write_json(&self, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
        let doc = json!({
            "wqed_version": wqed::VERSION,
            "config": config,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "footer": self.footer,
        });
        serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Recover the configuration echoed into a CSV or JSON output file.
pub fn read_config_echo(text: &str) -> Result<RunConfig, CliError> {
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix(CONFIG_PREFIX)) {
        return RunConfig::from_json(line);
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Schema(format!("output: {e}")))?;
    let cfg = doc.get("config").ok_or_else(|| CliError::schema("config", "no configuration echo found"))?;
    RunConfig::from_json(&cfg.to_string())
}
