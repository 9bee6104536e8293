//! Configuration, orchestration and flat-file result storage.

pub mod config;
pub mod export;
pub mod record;
pub mod run;

pub use config::ExperimentConfig;
pub use export::{
    export_curve, export_records, read_records_csv, read_records_jsonl, write_curve_csv, ExportFormat, CURVE_COLUMNS,
};
pub use record::{format_f64, RecordLine, ResultRecord, RECORD_COLUMNS};
pub use run::{build_pool, resolve_workers, run_experiment, value_error_column, RunOptions, RunSummary};
