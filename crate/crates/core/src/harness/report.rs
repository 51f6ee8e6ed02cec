use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricsReport;
use crate::error::{QssError, Result};

/// Column order of the tabular report.
pub const COLUMNS: [&str; 13] = [
    "variant",
    "strategy",
    "n",
    "p",
    "m",
    "trials",
    "detection_rate",
    "detection_ci_low",
    "detection_ci_high",
    "cheater_accuracy",
    "reconstruction_rate",
    "epsilon_hat",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = QssError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(QssError::Parse(format!("unknown report format {other:?}"))),
        }
    }
}

/// One serialized report line. Undefined rates (no denominator) are empty
/// in CSV and `null` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub strategy: String,
    pub n: usize,
    pub p: f64,
    pub m: usize,
    pub trials: u64,
    pub detection_rate: f64,
    pub detection_ci_low: f64,
    pub detection_ci_high: f64,
    pub cheater_accuracy: Option<f64>,
    pub reconstruction_rate: Option<f64>,
    pub epsilon_hat: Option<f64>,
    pub seed: u64,
}

impl From<&MetricsReport> for ReportRow {
    fn from(r: &MetricsReport) -> Self {
        Self {
            variant: r.variant.to_string(),
            strategy: r.strategy.clone(),
            n: r.copies,
            p: r.check_rate,
            m: r.attacked,
            trials: r.trials,
            detection_rate: r.detection_rate,
            detection_ci_low: r.detection_ci.low,
            detection_ci_high: r.detection_ci.high,
            cheater_accuracy: r.cheater_accuracy,
            reconstruction_rate: r.reconstruction_rate,
            epsilon_hat: r.epsilon_hat,
            seed: r.master_seed,
        }
    }
}

pub fn render_report(reports: &[MetricsReport], format: ReportFormat) -> Result<String> {
    let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).map_err(|e| QssError::Parse(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            let csv_err = |e: csv::Error| QssError::Parse(e.to_string());
            w.write_record(COLUMNS).map_err(csv_err)?;
            for row in &rows {
                w.serialize(row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| QssError::Parse(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| QssError::Parse(e.to_string()))
        }
    }
}

pub fn write_report(reports: &[MetricsReport], path: &Path, format: ReportFormat) -> Result<()> {
    let text = render_report(reports, format)?;
    fs::write(path, text).map_err(|source| QssError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: &Path, format: ReportFormat) -> Result<Vec<ReportRow>> {
    let text = fs::read_to_string(path).map_err(|source| QssError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_report(&text, format)
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<ReportRow>> {
    match format {
        ReportFormat::Json => serde_json::from_str(text).map_err(|e| QssError::Parse(e.to_string())),
        ReportFormat::Csv => csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<Vec<ReportRow>, _>>()
            .map_err(|e| QssError::Parse(e.to_string())),
    }
}
