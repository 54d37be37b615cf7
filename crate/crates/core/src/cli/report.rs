use serde_json::Value;

use super::{CliError, Format};

pub const FORMAT_VERSION: u32 = 1;

/// Output of one command in all three formats.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Always carries `format_version`.
    pub json: Value,
    pub exit_code: i32,
}

/// 17 significant digits, enough to round-trip any double.
pub(crate) fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Table => Ok(self.table.clone()),
            Format::Json => serde_json::to_string_pretty(&self.json)
                .map(|s| s + "\n")
                .map_err(|e| CliError::Output(e.to_string())),
            Format::Csv => {
                // RFC 4180 line endings
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::CRLF)
                    .from_writer(Vec::new());
                let out = |e: csv::Error| CliError::Output(e.to_string());
                w.write_record(&self.header).map_err(out)?;
                for row in &self.rows {
                    w.write_record(row).map_err(out)?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| CliError::Output(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
            }
        }
    }
}
