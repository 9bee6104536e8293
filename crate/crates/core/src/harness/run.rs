//! Experiment orchestration: certify, run every `(m, trial)` cell on a
//! bounded worker pool, and write results incrementally.
//!
//! The output directory receives `records.jsonl` (written as cells finish,
//! in `(m, trial)` order, closed by a `complete` footer), `records.csv`,
//! `curve.csv` and `curve.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::export::{export_curve, export_records, ExportFormat};
use super::record::{complete_line, ResultRecord};
use crate::analysis::{assemble_curve, cell_seed, certify_family, CertificationReport, ComplexityCurve};
use crate::error::{Error, Result};
use crate::io::write_json;

/// Cells handed to the pool between two writes of `records.jsonl`.
const MIN_CHUNK: usize = 64;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `experiment.workers`; falls back to the available cores.
    pub workers: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub certification: CertificationReport,
    pub warnings: Vec<String>,
    pub records: Vec<ResultRecord>,
    pub curve: ComplexityCurve,
    pub records_jsonl: PathBuf,
    pub records_csv: PathBuf,
    pub curve_csv: PathBuf,
    pub curve_json: PathBuf,
}

pub fn resolve_workers(options: &RunOptions, config: &ExperimentConfig) -> Result<usize> {
    let n = options
        .workers
        .or(config.experiment.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    Ok(n)
}

pub fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build a pool of {workers} workers: {e}")))
}

/// Runs the configured experiment end to end. The family is certified
/// before any trial runs; a failed certificate aborts with
/// [`Error::CertificateFailed`] and writes nothing.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary> {
    config.check()?;
    let experiment = config.build_experiment()?;
    let certification = certify_family(experiment.family())?;
    certification.ensure_passed()?;
    let workers = resolve_workers(options, config)?;
    let pool = build_pool(workers)?;

    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let records_jsonl = dir.join("records.jsonl");
    let mut sink = BufWriter::new(File::create(&records_jsonl).map_err(|e| Error::io(&records_jsonl, e))?);
    let write_err = |e: std::io::Error| Error::io(&records_jsonl, e);

    let eval = &config.evaluation;
    let base = config.experiment.seed;
    let chunk = MIN_CHUNK.max(8 * workers);
    let mut records = Vec::with_capacity(eval.m_grid.len() * eval.trials);
    for &m in &eval.m_grid {
        for start in (0..eval.trials).step_by(chunk) {
            let end = (start + chunk).min(eval.trials);
            let batch: Vec<ResultRecord> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|trial| {
                        let seed = cell_seed(base, m, trial);
                        let clock = Instant::now();
                        let out = experiment.run_episode(m, seed)?;
                        Ok(ResultRecord {
                            experiment_id: config.experiment.id.clone(),
                            family: experiment.family().kind().into(),
                            learner: experiment.learner().name().into(),
                            m,
                            trial,
                            seed,
                            truth_index: out.truth_index,
                            value_error: out.value_error,
                            classification_error: out.classification_error,
                            selected_hypothesis_index: out.selected_hypothesis_index,
                            wall_ms: clock.elapsed().as_millis() as u64,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            for r in &batch {
                writeln!(sink, "{}", r.json_line()).map_err(write_err)?;
            }
            sink.flush().map_err(write_err)?;
            records.extend(batch);
        }
    }
    writeln!(sink, "{}", complete_line(records.len())).map_err(write_err)?;
    sink.flush().map_err(write_err)?;

    let errors: Vec<Vec<f64>> = records.chunks(eval.trials).map(|c| c.iter().map(|r| r.value_error).collect()).collect();
    let curve = assemble_curve(&experiment, eval.epsilon, eval.delta, base, &eval.m_grid, &errors);

    let records_csv = dir.join("records.csv");
    let curve_csv = dir.join("curve.csv");
    let curve_json = dir.join("curve.json");
    export_records(&records_csv, &records, ExportFormat::Csv)?;
    export_curve(&curve_csv, &config.experiment.id, &curve)?;
    write_json(&curve_json, &curve)?;

    Ok(RunSummary {
        certification,
        warnings: experiment.family().warnings().to_vec(),
        records,
        curve,
        records_jsonl,
        records_csv,
        curve_csv,
        curve_json,
    })
}

/// `value_error` column of a records CSV, verbatim.
pub fn value_error_column(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Shape(format!("{}: {other:?}", path.display())),
    })?;
    let col = reader
        .headers()?
        .iter()
        .position(|h| h == "value_error")
        .ok_or_else(|| Error::Shape(format!("{}: no value_error column", path.display())))?;
    reader.records().map(|r| Ok(r?[col].to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::export::{read_records_csv, read_records_jsonl};

    fn config(dir: &Path, trials: usize, grid: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            r#"
[experiment]
id = "unit"
seed = 7

[family]
kind = "tree"
branching = 2
depth = 3
epsilon = 0.3

[learner]
kind = "mle"
data = "one_step"

[evaluation]
epsilon = 0.05
delta = 0.1
m_grid = {grid}
trials = {trials}

[output]
dir = "{}"
"#,
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn one_cell_gives_one_record() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_experiment(&config(dir.path(), 1, "[5]"), &RunOptions { workers: Some(1) }).unwrap();
        assert_eq!(summary.records.len(), 1);
        let (jsonl, complete) = read_records_jsonl(&summary.records_jsonl).unwrap();
        assert!(complete);
        assert_eq!(jsonl, summary.records);
        assert_eq!(read_records_csv(&summary.records_csv).unwrap(), summary.records);
        assert_eq!(std::fs::read_to_string(&summary.curve_csv).unwrap().lines().count(), 2);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run_experiment(&config(a.path(), 70, "[1, 20]"), &RunOptions { workers: Some(1) }).unwrap();
        let rb = run_experiment(&config(b.path(), 70, "[1, 20]"), &RunOptions { workers: Some(4) }).unwrap();
        assert_eq!(value_error_column(&ra.records_csv).unwrap(), value_error_column(&rb.records_csv).unwrap());
        let keys = |s: &RunSummary| s.records.iter().map(|r| (r.m, r.trial, r.seed)).collect::<Vec<_>>();
        assert_eq!(keys(&ra), keys(&rb));
        assert_eq!(ra.curve, rb.curve);
    }
}
