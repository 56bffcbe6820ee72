//! Staged output files, number formatting and the run manifest.
//!
//! Outputs are written to temporary files inside the target directory and
//! only renamed into place once every file of the run has been produced.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// 17 significant digits, round-trip exact, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Rewrites every float in `value` with 17 significant digits; non-finite
/// values become `null`.
fn normalize_numbers(value: &mut Value) {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                *n = serde_json::Number::from_str(&fmt_f64(x)).expect("finite float");
            }
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_numbers),
        Value::Object(map) => map.values_mut().for_each(normalize_numbers),
        _ => {}
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut v =
        serde_json::to_value(value).map_err(|e| CliError::Usage(format!("serialization: {e}")))?;
    normalize_numbers(&mut v);
    let mut bytes = serde_json::to_vec_pretty(&v).expect("serializable value");
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub input_sha256: Option<String>,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn manifest_name(command: &str) -> String {
    format!("manifest_{command}.json")
}

struct Staged {
    name: String,
    file: NamedTempFile,
    sha256: String,
}

/// Files of one run, held back until [`OutputSet::commit`].
pub struct OutputSet {
    dir: PathBuf,
    staged: Vec<Staged>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        })
    }

    pub fn add_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut file = NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        file.write_all(bytes).map_err(|e| CliError::io(&path, e))?;
        file.as_file()
            .sync_all()
            .map_err(|e| CliError::io(&path, e))?;
        self.staged.push(Staged {
            name: name.to_string(),
            file,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    /// CSV with a header row and RFC 4180 quoting, `\n` line ends.
    pub fn add_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let err = |e: csv::Error| CliError::input(name, e.to_string());
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(&row).map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::input(name, e.to_string()))?;
        self.add_bytes(name, &bytes)
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.add_bytes(name, &to_json_bytes(value)?)
    }

    pub fn digests(&self) -> Vec<OutputDigest> {
        self.staged
            .iter()
            .map(|s| OutputDigest {
                file: s.name.clone(),
                sha256: s.sha256.clone(),
            })
            .collect()
    }

    /// Moves every staged file into place, then writes the manifest.
    pub fn commit(self, manifest: &RunManifest) -> CliResult<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.staged.len() + 1);
        let mut manifest_file =
            NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let manifest_path = self.dir.join(manifest_name(&manifest.command));
        manifest_file
            .write_all(&to_json_bytes(manifest)?)
            .map_err(|e| CliError::io(&manifest_path, e))?;
        for staged in self.staged {
            let path = self.dir.join(&staged.name);
            staged
                .file
                .persist(&path)
                .map_err(|e| CliError::io(&path, e.error))?;
            written.push(path);
        }
        manifest_file
            .persist(&manifest_path)
            .map_err(|e| CliError::io(&manifest_path, e.error))?;
        written.push(manifest_path);
        Ok(written)
    }
}
