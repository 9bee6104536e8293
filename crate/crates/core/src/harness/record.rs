//! Per-trial result records and their flat-file encodings.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses
//! back to the same `f64`, so CSV and JSON-lines files round-trip
//! byte-identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub family: String,
    pub learner: String,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    /// Index of the ground truth drawn for this trial.
    pub truth_index: usize,
    pub value_error: f64,
    /// Exact true error against the expert; DPL only.
    pub classification_error: Option<f64>,
    pub selected_hypothesis_index: usize,
    pub wall_ms: u64,
}

/// CSV column order of [`ResultRecord`].
pub const RECORD_COLUMNS: [&str; 11] = [
    "experiment_id",
    "family",
    "learner",
    "m",
    "trial",
    "seed",
    "truth_index",
    "value_error",
    "classification_error",
    "selected_hypothesis_index",
    "wall_ms",
];

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

impl ResultRecord {
    pub fn csv_fields(&self) -> [String; 11] {
        [
            self.experiment_id.clone(),
            self.family.clone(),
            self.learner.clone(),
            self.m.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.truth_index.to_string(),
            format_f64(self.value_error),
            self.classification_error.map(format_f64).unwrap_or_default(),
            self.selected_hypothesis_index.to_string(),
            self.wall_ms.to_string(),
        ]
    }

    pub fn from_csv_fields(fields: &csv::StringRecord) -> Result<Self> {
        if fields.len() != RECORD_COLUMNS.len() {
            return Err(Error::Shape(format!("record has {} fields, expected {}", fields.len(), RECORD_COLUMNS.len())));
        }
        fn parse<T: std::str::FromStr>(fields: &csv::StringRecord, i: usize) -> Result<T> {
            fields[i]
                .parse()
                .map_err(|_| Error::Shape(format!("column {}: cannot parse \"{}\"", RECORD_COLUMNS[i], &fields[i])))
        }
        Ok(Self {
            experiment_id: fields[0].to_string(),
            family: fields[1].to_string(),
            learner: fields[2].to_string(),
            m: parse(fields, 3)?,
            trial: parse(fields, 4)?,
            seed: parse(fields, 5)?,
            truth_index: parse(fields, 6)?,
            value_error: parse(fields, 7)?,
            classification_error: if fields[8].is_empty() { None } else { Some(parse(fields, 8)?) },
            selected_hypothesis_index: parse(fields, 9)?,
            wall_ms: parse(fields, 10)?,
        })
    }

    /// One JSON-lines entry tagged `"kind":"result"`, fields in column order.
    pub fn json_line(&self) -> String {
        format!(
            "{{\"kind\":\"result\",\"experiment_id\":{},\"family\":{},\"learner\":{},\"m\":{},\"trial\":{},\"seed\":{},\
             \"truth_index\":{},\"value_error\":{},\"classification_error\":{},\"selected_hypothesis_index\":{},\
             \"wall_ms\":{}}}",
            json_string(&self.experiment_id),
            json_string(&self.family),
            json_string(&self.learner),
            self.m,
            self.trial,
            self.seed,
            self.truth_index,
            format_f64(self.value_error),
            self.classification_error.map_or_else(|| "null".to_string(), format_f64),
            self.selected_hypothesis_index,
            self.wall_ms,
        )
    }
}

/// One line of a records JSON-lines file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordLine {
    Result(ResultRecord),
    /// Written last; its absence marks a partial run.
    Complete { records: usize },
}

pub fn complete_line(records: usize) -> String {
    format!("{{\"kind\":\"complete\",\"records\":{records}}}")
}
