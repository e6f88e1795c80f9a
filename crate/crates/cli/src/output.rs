//! Artifact emission: versioned CSV files, atomic writes, and the run
//! manifest.
//!
//! Every CSV starts with the comment line `# schema=1` followed by a header
//! row; rerunning a config with the same seed must reproduce every byte, so
//! nothing here records timestamps, absolute paths, or hash-map iteration
//! order. Files are written to a temporary name in the destination directory
//! and renamed into place, so a crashed run never leaves a half-written
//! artifact under its final name.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use sha2::{Digest, Sha256};

use brain_core::RunRecord;

/// Current CSV schema version, emitted as the first line of every CSV.
pub const SCHEMA_LINE: &str = "# schema=1";

/// One output file produced by an experiment driver.
///
/// Drivers build artifacts in memory and hand them back; the harness writes
/// them all and then the manifest. `seed_label` records which seed (or seed
/// aggregation) produced the file, and is copied into the manifest.
#[derive(Debug, Clone)]
pub struct Artifact {
    /// File name relative to the run's output directory.
    pub name: String,
    pub bytes: Vec<u8>,
    /// "3" for a per-seed file, "1,2,3" for an aggregate, "-" for files
    /// that do not depend on any seed (ground truth, fits over aggregates).
    pub seed_label: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>, seed_label: impl Into<String>) -> Self {
        Artifact { name: name.into(), bytes, seed_label: seed_label.into() }
    }
}

/// Incremental CSV builder that pins the schema line and header up front.
pub struct CsvBuilder {
    text: String,
}

impl CsvBuilder {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = String::new();
        text.push_str(SCHEMA_LINE);
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvBuilder { text }
    }

    /// Append one row of already-formatted cells.
    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Format a float for CSV output.
///
/// Rust's shortest-roundtrip `Display` is used so that values parse back to
/// exactly the same f64 and identical runs produce identical bytes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Render a training/chain record as a run-trace CSV.
pub fn run_record_csv(record: &RunRecord) -> Vec<u8> {
    let mut csv = CsvBuilder::new(&["iter", "mean_reward", "loss_est", "batch_abs_mag", "cum_evals"]);
    for row in record.rows() {
        csv.row(&[
            row.iter.to_string(),
            fmt_f64(row.mean_reward),
            fmt_f64(row.loss_est),
            fmt_f64(row.batch_abs_mag),
            row.cum_evals.to_string(),
        ]);
    }
    csv.into_bytes()
}

/// Render a parameter snapshot (one value per line, with its index).
pub fn params_csv(params: &[f64]) -> Vec<u8> {
    let mut csv = CsvBuilder::new(&["index", "value"]);
    for (i, value) in params.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(*value)]);
    }
    csv.into_bytes()
}

/// Join seeds into a manifest label like "1;2;3".
///
/// Semicolons keep multi-seed labels inside a single CSV cell without
/// needing quoting.
pub fn seeds_label(seeds: &[u64]) -> String {
    let mut label = String::new();
    for (i, s) in seeds.iter().enumerate() {
        if i > 0 {
            label.push(';');
        }
        let _ = write!(label, "{s}");
    }
    label
}

/// Write `bytes` to `dir/name` atomically (temp file + rename).
///
/// The temporary file lives in the same directory so the rename cannot cross
/// a filesystem boundary.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    let final_path = dir.join(name);
    if let Some(parent) = final_path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let file_name = final_path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("artifact");
    let tmp_path = final_path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp_path, bytes).with_context(|| format!("writing {}", tmp_path.display()))?;
    fs::rename(&tmp_path, &final_path)
        .with_context(|| format!("renaming into {}", final_path.display()))?;
    Ok(final_path)
}

/// SHA-256 of the raw config file text, hex-encoded.
pub fn config_hash(config_text: &str) -> String {
    let digest = Sha256::digest(config_text.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Write all artifacts plus `manifest.csv` into `out_dir`.
///
/// The manifest lists every emitted file with the config hash and the seed
/// label the driver attached; it is itself written atomically, last, so its
/// presence marks a completed run.
pub fn write_run(
    out_dir: &Path,
    artifacts: &[Artifact],
    config_text: &str,
) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let hash = config_hash(config_text);
    let mut written = Vec::with_capacity(artifacts.len() + 1);
    let mut manifest = CsvBuilder::new(&["file", "config_hash", "seed"]);
    for artifact in artifacts {
        written.push(write_atomic(out_dir, &artifact.name, &artifact.bytes)?);
        manifest.row(&[artifact.name.clone(), hash.clone(), artifact.seed_label.clone()]);
    }
    written.push(write_atomic(out_dir, "manifest.csv", &manifest.into_bytes())?);
    Ok(written)
}
