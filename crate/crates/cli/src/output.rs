//! Result envelopes and all-or-nothing output files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Wraps a command result with everything needed to reproduce it.
pub fn envelope(cfg: &RunConfig, result: Value) -> Value {
    let config: Map<String, Value> = cfg.values().iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "chemsim_version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "seed": cfg.seed(),
        "config": config,
        "config_hash": cfg.hash(),
        "result": result,
    })
}

pub fn render(value: &Value) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Outputs are written to temporary files next to their targets and only
/// moved into place by [`Staged::commit`], so a failed run leaves nothing
/// behind.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
    stdout: Vec<String>,
}

impl Staged {
    /// `None` sends the text to stdout at commit time.
    pub fn add(&mut self, path: Option<&Path>, text: &str) -> CliResult<()> {
        let Some(path) = path else {
            self.stdout.push(text.to_string());
            return Ok(());
        };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        tmp.write_all(text.as_bytes())?;
        tmp.flush()?;
        self.files.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> CliResult<()> {
        for (tmp, path) in self.files {
            tmp.persist(&path)
                .map_err(|e| CliError::Input(format!("cannot write {}: {}", path.display(), e.error)))?;
        }
        let mut out = std::io::stdout().lock();
        for text in self.stdout {
            out.write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

/// Reads the command and configuration recorded in a result file and
/// checks them against the stored hash.
pub fn read_recorded(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let bad = |what: &str| CliError::Input(format!("{}: missing or malformed '{what}'", path.display()));
    let command = v["command"].as_str().ok_or_else(|| bad("command"))?.parse()?;
    let config = v["config"].as_object().ok_or_else(|| bad("config"))?;
    let mut values = std::collections::BTreeMap::new();
    for (k, val) in config {
        values.insert(k.clone(), val.as_str().ok_or_else(|| bad("config"))?.to_string());
    }
    let cfg = RunConfig::from_recorded(command, values)?;
    let recorded = v["config_hash"].as_str().ok_or_else(|| bad("config_hash"))?;
    if recorded != cfg.hash() {
        return Err(CliError::Input(format!("{}: config_hash does not match the recorded config", path.display())));
    }
    Ok(cfg)
}
