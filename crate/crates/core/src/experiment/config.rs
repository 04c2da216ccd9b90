//! Line-oriented experiment configuration: `key = value` pairs grouped in
//! one section per experiment, plus an optional `[general]` section.

use crate::error::{Error, Result};
use crate::manifold::ModelKind;
use ini::Ini;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Spectrum,
    Lattice,
    Cubature,
    Pp,
    Kernel,
    Wave,
    Product,
    Widths,
    Rates,
    Calibrate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Spectrum,
        ExperimentKind::Lattice,
        ExperimentKind::Cubature,
        ExperimentKind::Pp,
        ExperimentKind::Kernel,
        ExperimentKind::Wave,
        ExperimentKind::Product,
        ExperimentKind::Widths,
        ExperimentKind::Rates,
        ExperimentKind::Calibrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Lattice => "lattice",
            ExperimentKind::Cubature => "cubature",
            ExperimentKind::Pp => "pp",
            ExperimentKind::Kernel => "kernel",
            ExperimentKind::Wave => "wave",
            ExperimentKind::Product => "product",
            ExperimentKind::Widths => "widths",
            ExperimentKind::Rates => "rates",
            ExperimentKind::Calibrate => "calibrate",
        }
    }

    /// Parameter keys and their defaults. A `None` default means the key is optional.
    pub fn parameters(self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            ExperimentKind::Spectrum => &[("omega", Some("100")), ("weyl", Some("100, 300, 1000, 3000, 10000"))],
            ExperimentKind::Lattice => &[("omega", Some("64")), ("rho", None)],
            ExperimentKind::Cubature => {
                &[("omega", Some("72")), ("rho", None), ("lattice", None), ("max_spread", Some("50"))]
            }
            ExperimentKind::Pp => {
                &[("omega", Some("64, 256")), ("p", Some("2")), ("ensemble", Some("16")), ("max_drift", None)]
            }
            ExperimentKind::Kernel => &[
                ("profile", Some("gaussian_vanishing")),
                ("t", Some("0.5, 0.25, 0.125, 0.0625, 0.03125")),
                ("pairs", Some("1000")),
                ("points", Some("20")),
                ("alpha", Some("1, 2, inf")),
                ("max_ratio", Some("10")),
            ],
            ExperimentKind::Wave => &[("t", Some("0.2, 0.1, 0.05")), ("threshold", Some("1e-8"))],
            ExperimentKind::Product => &[("omega", None), ("pairs", Some("100")), ("tolerance", Some("1e-10"))],
            ExperimentKind::Widths => &[
                ("p", Some("2")),
                ("q", Some("2")),
                ("r", Some("2")),
                ("kind", Some("d_n")),
                ("n", Some("16, 32, 64, 128, 256")),
            ],
            ExperimentKind::Rates => &[
                ("p", Some("2")),
                ("q", Some("2")),
                ("r", Some("2")),
                ("kind", Some("d_n")),
                ("n", Some("16, 32, 64, 128, 256, 512")),
                ("tolerance", Some("0.1")),
            ],
            ExperimentKind::Calibrate => &[("bump_power", Some("2"))],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// One experiment run. Parameters are kept as text and parsed on access so
/// the report can echo them verbatim.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    /// Worker threads for independent parameter points. Never affects outputs.
    #[serde(skip)]
    pub jobs: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

const GENERAL_KEYS: [&str; 3] = ["model", "seed", "out_dir"];

impl ExperimentConfig {
    /// Defaults for every parameter.
    pub fn new(experiment: ExperimentKind, model: ModelKind) -> Self {
        let params = experiment
            .parameters()
            .iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v.to_string())))
            .collect();
        ExperimentConfig { experiment, model, seed: 0, params, jobs: 1, out_dir: PathBuf::from("out").join(experiment.name()) }
    }

    /// Read the `[general]` section and the section named after the experiment.
    /// Keys in the experiment section override `[general]`.
    pub fn from_ini_str(text: &str, experiment: ExperimentKind) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        let mut cfg = ExperimentConfig::new(experiment, ModelKind::Circle);
        for (section, props) in ini.iter() {
            let name = section.unwrap_or("general");
            if name != "general" && name.parse::<ExperimentKind>().is_err() {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
            if name != "general" && name != experiment.name() {
                continue;
            }
            for (key, value) in props.iter() {
                cfg.set(name, key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path, experiment: ExperimentKind) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_ini_str(&text, experiment)
    }

    /// Set one key, rejecting names the experiment does not know.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "model" => self.model = value.parse().map_err(|_| Error::Config(format!("[{section}] model: unknown model '{value}'")))?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("[{section}] seed: '{value}' is not a non-negative integer")))?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ if section == "general" => {
                return Err(Error::Config(format!("unknown key '{key}' in [general]; expected one of {GENERAL_KEYS:?}")))
            }
            _ => {
                if !self.experiment.parameters().iter().any(|(k, _)| *k == key) {
                    let known: Vec<&str> = self.experiment.parameters().iter().map(|(k, _)| *k).collect();
                    return Err(Error::Config(format!(
                        "unknown key '{key}' in [{}]; expected one of {known:?}",
                        self.experiment
                    )));
                }
                self.params.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    /// Parse every parameter once so errors surface before any work starts.
    pub fn validate(&self) -> Result<()> {
        for (key, value) in &self.params {
            match key.as_str() {
                "profile" | "lattice" => {}
                "kind" => {
                    value.parse::<crate::widths::WidthKind>().map_err(|e| self.bad(key, &e.to_string()))?;
                }
                "n" | "pairs" | "points" | "ensemble" | "bump_power" => {
                    let v = self.list_usize(key)?;
                    if v.is_empty() {
                        return Err(self.bad(key, "range is empty"));
                    }
                }
                _ => {
                    let v = self.list_f64(key)?;
                    if v.is_empty() {
                        return Err(self.bad(key, "range is empty"));
                    }
                }
            }
        }
        Ok(())
    }

    fn bad(&self, key: &str, why: &str) -> Error {
        Error::Config(format!("[{}] {key}: {why}", self.experiment))
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        self.params.get(key).map(String::as_str).ok_or_else(|| self.bad(key, "missing"))
    }

    pub fn list_f64(&self, key: &str) -> Result<Vec<f64>> {
        self.text(key)?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => Ok(f64::INFINITY),
                t => t.parse::<f64>().ok().filter(|v| !v.is_nan()).ok_or_else(|| self.bad(key, &format!("'{s}' is not a number"))),
            })
            .collect()
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.list_f64(key)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(self.bad(key, "expected a single number")),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.has(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn list_usize(&self, key: &str) -> Result<Vec<usize>> {
        self.text(key)?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| self.bad(key, &format!("'{s}' is not a non-negative integer"))))
            .collect()
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        match self.list_usize(key)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(self.bad(key, "expected a single integer")),
        }
    }
}
