//! JSON experiment files.
//!
//! An experiment file is a flat object whose keys are the simulation
//! parameters plus a few output options. Only `nt`, `nr` and `ntrx` are
//! required. A `results.json` written by `run` is itself a valid experiment
//! file: its `results` block is ignored on load.

use std::fmt;
use std::path::Path;

use hybridsim::channel::ArrayGeometry;
use hybridsim::harness::{default_snr_grid, LossesDb, SimConfig, DEFAULT_SEED, DEFAULT_TRIALS};
use hybridsim::{Error, Method};
use serde::de::{DeserializeOwned, IgnoredAny};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub nt: usize,
    pub nr: usize,
    pub ntrx: usize,
    /// Defaults to `min(ntrx, nr)`.
    #[serde(default)]
    pub ns: Option<usize>,
    #[serde(default = "default_paths")]
    pub l_paths: usize,
    #[serde(default = "default_spread")]
    pub angular_spread_deg: f64,
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub losses_db: LossesDb,
    /// `null` means unlimited resolution.
    #[serde(default = "default_bits")]
    pub phase_bits: Option<u32>,
    #[serde(default = "default_codebook_bits")]
    pub codebook_bits: u32,
    /// Defaults to the most nearly square planar array with `nt` elements.
    #[serde(default)]
    pub tx_geometry: Option<ArrayGeometry>,
    /// Defaults to a half-wavelength linear array with `nr` elements.
    #[serde(default)]
    pub rx_geometry: Option<ArrayGeometry>,
    #[serde(default)]
    pub literal_streams: bool,
    #[serde(default)]
    pub on_grid_departures: bool,
    /// Write `rates.svg` next to the CSV.
    #[serde(default = "yes")]
    pub plot: bool,
    /// Worker threads; omitted means one per core.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing)]
    pub results: Option<IgnoredAny>,
}

fn default_paths() -> usize {
    10
}
fn default_spread() -> f64 {
    10.0
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_bits() -> Option<u32> {
    Some(6)
}
fn default_codebook_bits() -> u32 {
    6
}
fn yes() -> bool {
    true
}

impl ExperimentFile {
    /// A file with every optional field at its default.
    pub fn new(nt: usize, nr: usize, ntrx: usize) -> Self {
        Self::from_sim(&SimConfig::new(nt, nr, ntrx))
    }

    /// The fully explicit form of a configuration, as echoed in results.
    pub fn from_sim(c: &SimConfig) -> Self {
        Self {
            nt: c.nt,
            nr: c.nr,
            ntrx: c.ntrx,
            ns: Some(c.ns),
            l_paths: c.l_paths,
            angular_spread_deg: c.angular_spread_deg,
            snr_grid_db: c.snr_grid_db.clone(),
            trials: c.trials,
            master_seed: c.master_seed,
            methods: c.methods.clone(),
            losses_db: c.losses_db,
            phase_bits: c.phase_bits,
            codebook_bits: c.codebook_bits,
            tx_geometry: Some(c.tx_geometry),
            rx_geometry: Some(c.rx_geometry),
            literal_streams: c.literal_streams,
            on_grid_departures: c.on_grid_departures,
            plot: true,
            workers: None,
            results: None,
        }
    }

    pub fn to_sim(&self) -> SimConfig {
        SimConfig {
            nt: self.nt,
            nr: self.nr,
            ntrx: self.ntrx,
            ns: self.ns.unwrap_or(self.ntrx.min(self.nr)),
            l_paths: self.l_paths,
            angular_spread_deg: self.angular_spread_deg,
            snr_grid_db: self.snr_grid_db.clone(),
            trials: self.trials,
            master_seed: self.master_seed,
            methods: self.methods.clone(),
            losses_db: self.losses_db,
            phase_bits: self.phase_bits,
            codebook_bits: self.codebook_bits,
            tx_geometry: self.tx_geometry.unwrap_or_else(|| ArrayGeometry::square_upa(self.nt)),
            rx_geometry: self.rx_geometry.unwrap_or_else(|| ArrayGeometry::ula(self.nr)),
            literal_streams: self.literal_streams,
            on_grid_departures: self.on_grid_departures,
        }
    }
}

/// A configuration problem, located in the source text when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.path, self.message),
            (Some(l), None) => write!(f, "{}:{l}: {}", self.path, self.message),
            _ => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Reads and parses a JSON document, reporting syntax and schema errors
/// with their line and column.
pub fn parse_file<T: DeserializeOwned>(path: &Path) -> Result<(T, String), ConfigError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: shown.clone(),
        line: None,
        column: None,
        message: format!("cannot read config: {e}"),
    })?;
    match serde_json::from_str::<T>(&text) {
        Ok(v) => Ok((v, text)),
        Err(e) => Err(ConfigError {
            path: shown,
            line: Some(e.line()).filter(|&l| l > 0),
            column: Some(e.column()).filter(|&c| c > 0),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        }),
    }
}

/// Line of the first occurrence of `"key"` used as an object key.
pub fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| {
        l.find(&needle).is_some_and(|i| l[i + needle.len()..].trim_start().starts_with(':'))
    })
    .map(|i| i + 1)
}

/// Wraps a validation failure of the loaded document with the line of the
/// offending key.
pub fn validation_error(path: &Path, text: &str, err: &Error) -> ConfigError {
    let (line, message) = match err {
        Error::Config { field, message } => {
            let line = key_line(text, field);
            let note = if line.is_none() { " (default value)" } else { "" };
            (line, format!("{field}: {message}{note}"))
        }
        other => (None, other.to_string()),
    };
    ConfigError { path: path.display().to_string(), line, column: None, message }
}

pub fn load_experiment(path: &Path) -> Result<(ExperimentFile, SimConfig), ConfigError> {
    let (file, text) = parse_file::<ExperimentFile>(path)?;
    if file.workers == Some(0) {
        return Err(validation_error(
            path,
            &text,
            &Error::Config { field: "workers", message: "must be at least 1".into() },
        ));
    }
    let sim = file.to_sim();
    sim.validate().map_err(|e| validation_error(path, &text, &e))?;
    Ok((file, sim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let f = write(r#"{"nt": 16, "nr": 4, "ntrx": 2}"#);
        let (file, sim) = load_experiment(f.path()).unwrap();
        assert_eq!(sim, SimConfig::new(16, 4, 2));
        assert!(file.plot);
    }

    #[test]
    fn unknown_key_is_located() {
        let f = write("{\n  \"nt\": 16,\n  \"nr\": 4,\n  \"ntrx\": 2,\n  \"trails\": 5\n}\n");
        let err = load_experiment(f.path()).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("trails"), "{}", err.message);
    }

    #[test]
    fn invalid_value_points_at_its_key() {
        let f = write("{\n  \"nt\": 16,\n  \"nr\": 4,\n  \"ntrx\": 2,\n  \"trials\": 0\n}\n");
        let err = load_experiment(f.path()).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.to_string().contains(":5: trials"), "{err}");
    }

    #[test]
    fn null_phase_bits_means_unlimited() {
        let f = write(r#"{"nt": 16, "nr": 4, "ntrx": 2, "phase_bits": null}"#);
        assert_eq!(load_experiment(f.path()).unwrap().1.phase_bits, None);
    }

    #[test]
    fn explicit_echo_round_trips() {
        let sim = SimConfig { trials: 3, master_seed: 42, ..SimConfig::new(16, 4, 2) };
        let text = serde_json::to_string_pretty(&ExperimentFile::from_sim(&sim)).unwrap();
        let f = write(&text);
        assert_eq!(load_experiment(f.path()).unwrap().1, sim);
    }

    #[test]
    fn key_line_ignores_values() {
        let text = "{\n \"a\": \"trials\",\n \"trials\": 1\n}";
        assert_eq!(key_line(text, "trials"), Some(3));
    }
}
