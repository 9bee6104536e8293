//! CSV and JSON-lines export of result records and curves.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::{complete_line, format_f64, RecordLine, ResultRecord, RECORD_COLUMNS};
use crate::analysis::ComplexityCurve;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Jsonl,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "jsonl" => Ok(ExportFormat::Jsonl),
            other => Err(Error::InvalidParameter(format!("unknown export format \"{other}\" (csv | jsonl)"))),
        }
    }
}

/// Curve CSV column order.
pub const CURVE_COLUMNS: [&str; 9] =
    ["experiment_id", "family", "learner", "m", "trials", "successes", "mean_value_error", "ci_halfwidth", "seed"];

fn sorted(records: &[ResultRecord]) -> Vec<&ResultRecord> {
    let mut rows: Vec<&ResultRecord> = records.iter().collect();
    rows.sort_by_key(|r| (r.m, r.trial));
    rows
}

pub fn write_records_csv<W: Write>(w: W, records: &[ResultRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RECORD_COLUMNS)?;
    for r in sorted(records) {
        out.write_record(r.csv_fields())?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Records followed by the `complete` footer, one JSON object per line.
pub fn write_records_jsonl<W: Write>(mut w: W, records: &[ResultRecord]) -> std::io::Result<()> {
    for r in sorted(records) {
        writeln!(w, "{}", r.json_line())?;
    }
    writeln!(w, "{}", complete_line(records.len()))?;
    w.flush()
}

/// Writes `records` sorted by `(m, trial)`.
pub fn export_records(path: &Path, records: &[ResultRecord], format: ExportFormat) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to export".into()));
    }
    let mut buf = Vec::new();
    match format {
        ExportFormat::Csv => write_records_csv(&mut buf, records)?,
        ExportFormat::Jsonl => write_records_jsonl(&mut buf, records).expect("writing to memory"),
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let header = reader.headers()?.clone();
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(Error::Shape(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    reader.records().map(|row| ResultRecord::from_csv_fields(&row?)).collect()
}

/// Records of a JSON-lines file and whether the `complete` footer was seen.
pub fn read_records_jsonl(path: &Path) -> Result<(Vec<ResultRecord>, bool)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut complete = false;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line).map_err(|e| Error::json(path, e))? {
            RecordLine::Result(r) => records.push(r),
            RecordLine::Complete { records: n } => {
                if n != records.len() {
                    return Err(Error::Shape(format!(
                        "{}: footer counts {n} records, file has {}",
                        path.display(),
                        records.len()
                    )));
                }
                complete = true;
            }
        }
    }
    Ok((records, complete))
}

pub fn write_curve_csv<W: Write>(w: W, experiment_id: &str, curve: &ComplexityCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_COLUMNS)?;
    for p in &curve.points {
        out.write_record([
            experiment_id.to_string(),
            curve.family.clone(),
            curve.learner.clone(),
            p.m.to_string(),
            p.trials.to_string(),
            p.successes.to_string(),
            format_f64(p.mean_value_error),
            format_f64(p.ci_halfwidth),
            curve.seed.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn export_curve(path: &Path, experiment_id: &str, curve: &ComplexityCurve) -> Result<()> {
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, experiment_id, curve)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
