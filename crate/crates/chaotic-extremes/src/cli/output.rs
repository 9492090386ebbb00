//! Atomic file emission and row formatting.
//!
//! Numeric CSV fields use Rust's default float display, the shortest decimal
//! form that parses back to the identical value.

use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A table about to be emitted: a header and stringly-typed rows.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| {
                                let value = v
                                    .parse::<f64>()
                                    .ok()
                                    .and_then(serde_json::Number::from_f64)
                                    .map(serde_json::Value::Number)
                                    .unwrap_or_else(|| serde_json::Value::String(v.clone()));
                                (c.clone(), value)
                            })
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let mut text = serde_json::to_string_pretty(&objects).expect("rows serialize");
                text.push('\n');
                text
            }
        }
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes through a temp file in the same directory, then renames into place.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".tmp-{name}"));
    fs::write(&tmp, contents)?;
    let target = dir.join(name);
    fs::rename(&tmp, &target)?;
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering_round_trips_floats() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![fmt_f64(0.1), fmt_f64(1.0 / 3.0)]);
        let text = t.render(OutputFormat::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y"));
        let row: Vec<f64> =
            lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row, vec![0.1, 1.0 / 3.0]);
    }

    #[test]
    fn json_rendering() {
        let mut t = Table::new(&["x"]);
        t.push(vec![fmt_f64(-0.5)]);
        let text = t.render(OutputFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["x"], serde_json::json!(-0.5));
    }
}
