//! Run configuration, the record store and report emission.

pub mod checks;
pub mod config;
pub mod report;
pub mod store;

pub use checks::{identity_suite, CheckResult};
pub use config::{Exponent, RunConfig, OUT_DIR_ENV, RECORDS_FILE, SUMMARY_FILE};
pub use report::{emit_csv, emit_jsonl, emit_plotdata, expectation_for, parse_plotdata, summarize, PlotSeries, Series};
pub use store::{append_records, parse_store, read_store, record_hash, unique_records, StoreEntry};
