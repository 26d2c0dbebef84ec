//! Append-only JSON-lines record store.
//!
//! Each line wraps one [`ExperimentRecord`] with the SHA-256 of its
//! canonical JSON and the time it was written. The hash ignores the
//! timestamp, so re-running a seeded experiment appends lines with equal
//! hashes and readers can drop the repeats.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sharpness::ExperimentRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreEntry {
    pub hash: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub record: ExperimentRecord,
}

/// Hex SHA-256 of the record's JSON encoding.
pub fn record_hash(record: &ExperimentRecord) -> String {
    let json = serde_json::to_vec(record).expect("records always serialise");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

impl StoreEntry {
    pub fn new(record: ExperimentRecord) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            hash: record_hash(&record),
            timestamp,
            record,
        }
    }

    /// True when the stored hash matches the payload.
    pub fn verify(&self) -> bool {
        self.hash == record_hash(&self.record)
    }
}

/// Appends records to `path`, creating it and its directory if needed.
pub fn append_records(path: &Path, records: &[ExperimentRecord]) -> Result<Vec<StoreEntry>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let e = StoreEntry::new(r.clone());
        let line = serde_json::to_string(&e).map_err(|err| Error::Store(err.to_string()))?;
        writeln!(file, "{line}")?;
        out.push(e);
    }
    Ok(out)
}

/// Parses store text; blank lines are skipped, anything else must be a
/// valid entry whose hash matches its record.
pub fn parse_store(text: &str) -> Result<Vec<StoreEntry>> {
    parse_lines(text.lines().map(|l| Ok(l.to_string())))
}

fn parse_lines(lines: impl Iterator<Item = std::io::Result<String>>) -> Result<Vec<StoreEntry>> {
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: StoreEntry =
            serde_json::from_str(&line).map_err(|err| Error::Store(format!("line {}: {err}", i + 1)))?;
        if !e.verify() {
            return Err(Error::Store(format!("line {}: hash does not match the record", i + 1)));
        }
        out.push(e);
    }
    Ok(out)
}

pub fn read_store(path: &Path) -> Result<Vec<StoreEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Store(format!("cannot open {}: {e}", path.display())))?;
    parse_lines(BufReader::new(file).lines())
}

/// Records in store order with repeated payloads removed.
pub fn unique_records(entries: &[StoreEntry]) -> Vec<ExperimentRecord> {
    let mut seen = HashSet::new();
    entries
        .iter()
        .filter(|e| seen.insert(e.hash.clone()))
        .map(|e| e.record.clone())
        .collect()
}
