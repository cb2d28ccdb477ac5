//! Run configuration: `key = value` files merged with command-line
//! overrides, checked against a per-command schema.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Map,
    Spectrum,
    Vqe,
    Evolve,
    Qpe,
    Qite,
    Mitigate,
}

/// `(key, default)`; keys without a default are required.
type Schema = &'static [(&'static str, Option<&'static str>)];

const HAMILTONIAN: Schema = &[("input", None), ("encoding", Some("jw")), ("taper", Some("false"))];

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Map => "map",
            Command::Spectrum => "spectrum",
            Command::Vqe => "vqe",
            Command::Evolve => "evolve",
            Command::Qpe => "qpe",
            Command::Qite => "qite",
            Command::Mitigate => "mitigate",
        }
    }

    fn own_keys(self) -> Schema {
        match self {
            Command::Map => &[],
            Command::Spectrum => &[("levels", Some("all"))],
            Command::Vqe => &[
                ("ansatz", Some("uccsd")),
                ("layers", Some("2")),
                ("optimizer", Some("gradient_descent")),
                ("max_iters", Some("500")),
                ("mode", Some("exact")),
                ("shots", Some("100000")),
            ],
            Command::Evolve => &[
                ("method", Some("trotter")),
                ("time", Some("1.0")),
                ("steps", Some("16,32,64,128,256")),
                ("orders", Some("1,2")),
                ("initial", Some("hf")),
            ],
            Command::Qpe => &[
                ("ancillas", Some("6")),
                ("e_min", Some("auto")),
                ("e_max", Some("auto")),
                ("initial", Some("ground")),
                ("shots", Some("1000")),
            ],
            Command::Qite => &[("dtau", Some("0.1")), ("steps", Some("50")), ("initial", Some("hf"))],
            Command::Mitigate => &[
                ("technique", Some("zne")),
                ("initial", Some("ground")),
                ("mode", Some("exact")),
                ("shots", Some("100000")),
                ("noise", Some("on")),
                ("depolarizing", Some("0.02")),
                ("amplitude_damping", Some("0")),
                ("phase_damping", Some("0")),
                ("scales", Some("1,1.5,2")),
                ("zne_order", Some("2")),
                ("flip_rate", Some("0.05")),
            ],
        }
    }

    fn schema(self) -> impl Iterator<Item = &'static (&'static str, Option<&'static str>)> {
        HAMILTONIAN.iter().chain(self.own_keys())
    }

    fn accepts(self, key: &str) -> bool {
        key == "seed" || self.schema().any(|(k, _)| *k == key)
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "map" => Command::Map,
            "spectrum" => Command::Spectrum,
            "vqe" => Command::Vqe,
            "evolve" => Command::Evolve,
            "qpe" => Command::Qpe,
            "qite" => Command::Qite,
            "mitigate" => Command::Mitigate,
            _ => return Err(CliError::Input(format!("unknown command '{s}'"))),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str, origin: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Input(format!("{origin}:{}: expected 'key = value', found '{line}'", i + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Input(format!("{origin}:{}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// A fully materialized configuration: every schema key has a value and
/// the seed is fixed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merges `file` entries with `overrides` (later wins), fills defaults
    /// and draws a seed if none was given.
    pub fn build(command: Command, file: Option<&Path>, overrides: Vec<(String, String)>) -> CliResult<Self> {
        let mut entries = Vec::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
            entries = parse_key_values(&text, &path.display().to_string())?;
        }
        entries.extend(overrides);
        let mut values = BTreeMap::new();
        for (k, v) in entries {
            if !command.accepts(&k) {
                return Err(CliError::Input(format!("key '{k}' is not used by {command}")));
            }
            values.insert(k, v);
        }
        for (k, default) in command.schema() {
            if !values.contains_key(*k) {
                match default {
                    Some(d) => {
                        values.insert(k.to_string(), d.to_string());
                    }
                    None => return Err(CliError::Input(format!("{command} needs '{k}'"))),
                }
            }
        }
        if !values.contains_key("seed") {
            let seed: u64 = rand::random();
            log::info!("no seed given; using {seed}");
            values.insert("seed".into(), seed.to_string());
        }
        let cfg = RunConfig { command, values };
        cfg.get::<u64>("seed")?;
        let input = cfg.str("input")?;
        if !Path::new(input).is_file() {
            return Err(CliError::Input(format!("cannot read input file {input}")));
        }
        Ok(cfg)
    }

    /// Rebuilds a configuration recorded in a result file.
    pub fn from_recorded(command: Command, values: BTreeMap<String, String>) -> CliResult<Self> {
        let overrides = values.into_iter().collect();
        RunConfig::build(command, None, overrides)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, key: &str) -> CliResult<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Input(format!("missing '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.str(key)?;
        v.parse().map_err(|_| CliError::Input(format!("bad value '{v}' for '{key}'")))
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.str(key)? {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            v => Err(CliError::Input(format!("bad value '{v}' for '{key}'; expected on/off"))),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> CliResult<Vec<T>> {
        let v = self.str(key)?;
        v.split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::Input(format!("bad entry '{s}' in '{key}'"))))
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.get("seed").expect("seed validated at build")
    }

    /// SHA-256 over the command name and the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.name().as_bytes());
        h.update(b"\n");
        for (k, v) in &self.values {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        format!("{:x}", h.finalize())
    }
}
