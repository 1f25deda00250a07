//! Run configuration: defaults, `key = value` files and command-line overrides.
//!
//! File grammar, one setting per line:
//!
//! ```text
//! # comment
//! key = value        # trailing comment
//! ```
//!
//! Keys are the snake_case names listed in [`KEYS`]; `-` is accepted in
//! place of `_`. Blank lines are ignored, unknown or repeated keys are errors.
//! Lists (`distances`, `p_levels`) are comma-separated.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use repeater_core::link::{
    DEFAULT_BETA_SQ, DEFAULT_C_M_PER_S, DEFAULT_ETA_D, DEFAULT_ETA_M, DEFAULT_L_ATT_KM, DEFAULT_P1,
};
use repeater_core::rate::Efficiencies;
use repeater_core::{DetectorModel, RepeaterParams, SimConfig, SourceModel};

pub const KEYS: &[&str] = &[
    "length_km",
    "nesting",
    "l_att_km",
    "c_m_per_s",
    "eta_m",
    "eta_d",
    "p_dark",
    "swap_p_dark",
    "number_resolving",
    "source",
    "p1",
    "p2",
    "beta_sq",
    "pair_p",
    "two_pair_terms",
    "distances",
    "target_fidelity",
    "trials",
    "seed",
    "p_levels",
    "slot_duration",
    "format",
    "out",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    SinglePhoton,
    Pair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub length_km: f64,
    pub nesting: usize,
    pub l_att_km: f64,
    pub c_m_per_s: f64,
    pub eta_m: f64,
    pub eta_d: f64,
    pub p_dark: f64,
    pub swap_p_dark: f64,
    pub number_resolving: bool,
    pub source: SourceKind,
    pub p1: f64,
    pub p2: f64,
    pub beta_sq: f64,
    pub pair_p: f64,
    pub two_pair_terms: bool,
    pub distances: Vec<f64>,
    pub target_fidelity: f64,
    pub trials: usize,
    pub seed: u64,
    /// Explicit `P_0, …, P_n, P_pr` for `simulate`; derived from the chain otherwise.
    pub p_levels: Option<Vec<f64>>,
    pub slot_duration: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            length_km: 1000.0,
            nesting: 3,
            l_att_km: DEFAULT_L_ATT_KM,
            c_m_per_s: DEFAULT_C_M_PER_S,
            eta_m: DEFAULT_ETA_M,
            eta_d: DEFAULT_ETA_D,
            p_dark: 0.0,
            swap_p_dark: 0.0,
            number_resolving: true,
            source: SourceKind::SinglePhoton,
            p1: DEFAULT_P1,
            p2: 0.0,
            beta_sq: DEFAULT_BETA_SQ,
            pair_p: 0.003,
            two_pair_terms: false,
            distances: vec![1000.0, 1500.0, 2000.0, 2500.0],
            target_fidelity: 0.9,
            trials: 10_000,
            seed: 1,
            p_levels: None,
            slot_duration: None,
            format: Format::Csv,
            out: None,
        }
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(format!("{key}: expected a finite number, got {value:?}")),
    }
}

fn integer<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got {value:?}")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => err(format!("{key}: expected true or false, got {value:?}")),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match normalize_key(key).as_str() {
            "length_km" => self.length_km = number(key, value)?,
            "nesting" => self.nesting = integer(key, value)?,
            "l_att_km" => self.l_att_km = number(key, value)?,
            "c_m_per_s" => self.c_m_per_s = number(key, value)?,
            "eta_m" => self.eta_m = number(key, value)?,
            "eta_d" => self.eta_d = number(key, value)?,
            "p_dark" => self.p_dark = number(key, value)?,
            "swap_p_dark" => self.swap_p_dark = number(key, value)?,
            "number_resolving" => self.number_resolving = boolean(key, value)?,
            "source" => {
                self.source = match value.to_ascii_lowercase().as_str() {
                    "sps" | "single-photon" | "single_photon" => SourceKind::SinglePhoton,
                    "pair" | "dlcz" => SourceKind::Pair,
                    _ => return err(format!("source: expected sps or pair, got {value:?}")),
                }
            }
            "p1" => self.p1 = number(key, value)?,
            "p2" => self.p2 = number(key, value)?,
            "beta_sq" => self.beta_sq = number(key, value)?,
            "pair_p" => self.pair_p = number(key, value)?,
            "two_pair_terms" => self.two_pair_terms = boolean(key, value)?,
            "distances" => self.distances = list(key, value)?,
            "target_fidelity" => self.target_fidelity = number(key, value)?,
            "trials" => self.trials = integer(key, value)?,
            "seed" => self.seed = integer(key, value)?,
            "p_levels" => self.p_levels = Some(list(key, value)?),
            "slot_duration" => self.slot_duration = Some(number(key, value)?),
            "format" => {
                self.format = match value.to_ascii_lowercase().as_str() {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return err(format!("format: expected csv or json, got {value:?}")),
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            other => {
                return err(format!(
                    "unknown configuration key {other:?}; known keys: {}",
                    KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    pub fn apply_file_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("{origin}:{}: expected key = value", lineno + 1));
            };
            let key = normalize_key(key);
            if !seen.insert(key.clone()) {
                return err(format!("{origin}:{}: {key} set twice", lineno + 1));
            }
            self.set(&key, value)
                .map_err(|e| ConfigError(format!("{origin}:{}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        self.apply_file_text(&text, &path.display().to_string())
    }

    pub fn efficiencies(&self) -> Efficiencies {
        Efficiencies {
            eta_m: self.eta_m,
            eta_d: self.eta_d,
            l_att_km: self.l_att_km,
            c_m_per_s: self.c_m_per_s,
        }
    }

    pub fn source_model(&self) -> SourceModel {
        match self.source {
            SourceKind::SinglePhoton => SourceModel::SinglePhoton {
                p1: self.p1,
                p2: self.p2,
            },
            SourceKind::Pair => SourceModel::Pair {
                p: self.pair_p,
                two_pair_terms: self.two_pair_terms,
            },
        }
    }

    pub fn repeater_params(&self) -> RepeaterParams {
        RepeaterParams {
            length_km: self.length_km,
            nesting: self.nesting,
            l_att_km: self.l_att_km,
            c_m_per_s: self.c_m_per_s,
            eta_m: self.eta_m,
            detector: DetectorModel {
                eta_d: self.eta_d,
                p_dark: self.p_dark,
                number_resolving: self.number_resolving,
            },
            swap_p_dark: self.swap_p_dark,
            beta_sq: self.beta_sq,
            source: self.source_model(),
        }
    }

    /// Checks every setting before any computation runs.
    pub fn validate(&self) -> Result<()> {
        self.repeater_params()
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        if self.nesting > repeater_core::link::MAX_NESTING {
            return err(format!(
                "nesting must be at most {}, got {}",
                repeater_core::link::MAX_NESTING,
                self.nesting
            ));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return err(format!(
                "target_fidelity must lie in (0, 1], got {}",
                self.target_fidelity
            ));
        }
        if self.trials == 0 {
            return err("trials must be at least 1");
        }
        if let Some(bad) = self.distances.iter().find(|&&d| !(d > 0.0)) {
            return err(format!("distances must be positive, got {bad}"));
        }
        if let Some(levels) = &self.p_levels {
            self.sim_config(levels.clone(), 1.0)
                .validate()
                .map_err(|e| ConfigError(e.to_string()))?;
        }
        if let Some(s) = self.slot_duration {
            if !(s > 0.0) {
                return err(format!("slot_duration must be positive, got {s}"));
            }
        }
        Ok(())
    }

    pub fn sim_config(&self, p_levels: Vec<f64>, slot_duration: f64) -> SimConfig {
        SimConfig {
            p_levels,
            slot_duration,
            trials: self.trials,
            seed: self.seed,
        }
    }
}
