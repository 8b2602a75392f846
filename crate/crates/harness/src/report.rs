//! Report emission: a records CSV and a summary JSON document.
//!
//! Floats are written in shortest round-trip decimal form in both formats,
//! so byte comparison of reports is meaningful and read-back is exact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Mode;
use crate::survey::TrialRecord;
use crate::tail::SurveySummary;
use crate::{Error, Result};

/// Layout of the emitted report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Records CSV at the given path, summary JSON at `<path>.summary.json`.
    Csv,
    /// One JSON document holding the summary and the records.
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("format must be 'csv' or 'json', got '{other}'")),
        }
    }
}

const CSV_HEADER: &str =
    "trial_id,trial_seed,d,n_sites,lambda,mode,qnl_value,sweeps_used,restarts_used,wall_ms";

#[derive(Debug, Serialize, Deserialize)]
struct ReportDocument {
    summary: SurveySummary,
    records: Vec<TrialRecord>,
}

/// Writes the report. The CSV layout has exactly the columns of
/// [`CSV_HEADER`]; the JSON layout nests `{summary, records}`.
pub fn emit_report(
    summary: &SurveySummary,
    records: &[TrialRecord],
    format: ReportFormat,
    path: &Path,
) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            write_file(path, &records_to_csv(records))?;
            let summary_text =
                serde_json::to_string_pretty(summary).map_err(|source| Error::Json {
                    path: path.to_path_buf(),
                    source,
                })?;
            write_file(&summary_sidecar_path(path), &summary_text)
        }
        ReportFormat::Json => {
            let doc = ReportDocument {
                summary: summary.clone(),
                records: records.to_vec(),
            };
            let text = serde_json::to_string_pretty(&doc).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            write_file(path, &text)
        }
    }
}

/// Where the CSV layout puts the summary document.
pub fn summary_sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    path.with_file_name(name)
}

/// Serializes records with the exact CSV column set.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.trial_id,
            r.trial_seed,
            r.d,
            r.n_sites,
            r.lambda,
            r.mode.as_str(),
            r.qnl_value,
            r.sweeps_used,
            r.restarts_used,
            r.wall_ms
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Reads back a records CSV written by [`emit_report`].
pub fn read_records_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |line: usize, reason: String| Error::Malformed {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        other => {
            return Err(malformed(
                1,
                format!("bad header: {:?}", other.map(|(_, h)| h)),
            ))
        }
    }
    let mut records = Vec::new();
    for (ix, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(malformed(ix + 1, format!("expected 10 fields, got {}", fields.len())));
        }
        let parse = |what: &str, s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| malformed(ix + 1, format!("{what}: {e}")))
        };
        let parse_u64 = |what: &str, s: &str| -> Result<u64> {
            s.parse()
                .map_err(|e| malformed(ix + 1, format!("{what}: {e}")))
        };
        records.push(TrialRecord {
            trial_id: parse_u64("trial_id", fields[0])?,
            trial_seed: parse_u64("trial_seed", fields[1])?,
            d: parse_u64("d", fields[2])? as usize,
            n_sites: parse_u64("n_sites", fields[3])? as usize,
            lambda: parse("lambda", fields[4])?,
            mode: Mode::from_str(fields[5]).map_err(|e| malformed(ix + 1, e))?,
            qnl_value: parse("qnl_value", fields[6])?,
            sweeps_used: parse_u64("sweeps_used", fields[7])? as u32,
            restarts_used: parse_u64("restarts_used", fields[8])? as u32,
            wall_ms: parse_u64("wall_ms", fields[9])?,
        });
    }
    Ok(records)
}

/// Reads back a JSON report written by [`emit_report`].
pub fn read_report_json(path: &Path) -> Result<(SurveySummary, Vec<TrialRecord>)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: ReportDocument = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((doc.summary, doc.records))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
