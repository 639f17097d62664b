//! Experiment configuration: a flat `key = value` file merged with command
//! line overrides.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use exitsim::model::ShiftedGamma;
use exitsim::{BuiltinModel, Diffusion, EpsilonSchedule, RewardKind};

use crate::CliError;

/// Keys accepted in a config file and as overrides.
pub const KEYS: &[&str] = &[
    "model", "params", "a", "b", "x", "T", "N", "N_min", "N0", "epsilon", "M", "seed", "reward", "out", "timing",
];

/// Largest slicing parameter accepted by any command.
pub const MAX_N: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    /// Rectangle horizon; `f64::INFINITY` for `inf`.
    pub horizon: f64,
    pub n: usize,
    /// Lower end of the sweep range.
    pub n_min: usize,
    pub n0: usize,
    pub epsilon: EpsilonSchedule,
    pub m: u64,
    pub seed: u64,
    pub reward: RewardKind,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "sin".into(),
            params: BTreeMap::new(),
            a: 0.0,
            b: 7.0,
            x: 3.0,
            horizon: 1.0,
            n: 14,
            n_min: 2,
            n0: 21,
            epsilon: EpsilonSchedule::Fixed(0.1),
            m: 1000,
            seed: 1,
            reward: RewardKind::WorkUnits,
            out: None,
            timing: false,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses the contents of a config file into a key map.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected `key = value`", no + 1)))?;
        let key = k.trim();
        if !KEYS.contains(&key) {
            return Err(config_err(format!("line {}: unknown key `{key}`", no + 1)));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// `k=3,theta=7,sigma=1`; an empty string gives no parameters.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("parameter `{item}` is not of the form name=value")))?;
        out.insert(k.trim().to_string(), parse_f64("params", v)?);
    }
    Ok(out)
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| config_err(format!("`{key}` expects a number, got `{v}`")))?;
    if x.is_nan() {
        return Err(config_err(format!("`{key}` must not be NaN")));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| config_err(format!("`{key}` expects a nonnegative integer, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(config_err(format!("`{key}` expects true or false, got `{other}`"))),
    }
}

/// `inf` or a positive number.
pub fn parse_horizon(v: &str) -> Result<f64, CliError> {
    let t = match v.trim() {
        "inf" | "Inf" | "infinity" => f64::INFINITY,
        other => parse_f64("T", other)?,
    };
    if t <= 0.0 {
        return Err(config_err(format!("`T` must be positive or inf, got `{v}`")));
    }
    Ok(t)
}

/// `decay` or a number in `(0, 1]`.
pub fn parse_epsilon(v: &str) -> Result<EpsilonSchedule, CliError> {
    if v.trim() == "decay" {
        return Ok(EpsilonSchedule::CubeRootDecay);
    }
    let e = parse_f64("epsilon", v)?;
    if !(e > 0.0 && e <= 1.0) {
        return Err(config_err(format!("`epsilon` must lie in (0, 1], got {e}")));
    }
    Ok(EpsilonSchedule::Fixed(e))
}

pub fn format_horizon(t: f64) -> String {
    if t.is_infinite() {
        "inf".into()
    } else {
        t.to_string()
    }
}

impl ExperimentConfig {
    /// Defaults, then `file`, then `overrides`; later entries win.
    pub fn from_maps(
        file: &BTreeMap<String, String>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut merged = file.clone();
        merged.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut cfg = Self::default();
        for (k, v) in &merged {
            match k.as_str() {
                "model" => cfg.model = v.trim().to_string(),
                "params" => cfg.params = parse_params(v)?,
                "a" => cfg.a = parse_f64(k, v)?,
                "b" => cfg.b = parse_f64(k, v)?,
                "x" => cfg.x = parse_f64(k, v)?,
                "T" => cfg.horizon = parse_horizon(v)?,
                "N" => cfg.n = parse_int(k, v)?,
                "N_min" => cfg.n_min = parse_int(k, v)?,
                "N0" => cfg.n0 = parse_int(k, v)?,
                "epsilon" => cfg.epsilon = parse_epsilon(v)?,
                "M" => cfg.m = parse_int(k, v)?,
                "seed" => cfg.seed = parse_int(k, v)?,
                "reward" => cfg.reward = v.trim().parse().map_err(CliError::from)?,
                "out" => cfg.out = Some(PathBuf::from(v.trim())),
                "timing" => cfg.timing = parse_bool(k, v)?,
                other => return Err(config_err(format!("unknown key `{other}`"))),
            }
        }
        if cfg.reward == RewardKind::WallTime {
            cfg.timing = true;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if !(self.a.is_finite() && self.b.is_finite() && self.x.is_finite()) {
            return Err(config_err("a, b and x must be finite"));
        }
        if !(self.a < self.x && self.x < self.b) {
            return Err(config_err(format!(
                "need a < x < b, got a = {}, x = {}, b = {}",
                self.a, self.x, self.b
            )));
        }
        if self.m == 0 {
            return Err(config_err("`M` must be at least 1"));
        }
        for (key, n) in [("N", self.n), ("N_min", self.n_min), ("N0", self.n0)] {
            if !(2..=MAX_N).contains(&n) {
                return Err(config_err(format!("`{key}` must lie in 2..={MAX_N}, got {n}")));
            }
        }
        if self.n_min > self.n0 {
            return Err(config_err(format!("`N_min` = {} exceeds `N0` = {}", self.n_min, self.n0)));
        }
        let model = self.build_model()?;
        if !model.domain().contains_closed(self.a, self.b) {
            return Err(config_err(format!(
                "[{}, {}] is not inside the state space of `{}`",
                self.a, self.b, self.model
            )));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<BuiltinModel, CliError> {
        Ok(BuiltinModel::from_name(&self.model, &self.params)?)
    }

    /// The model, optionally with `gamma` shifted (validation hook).
    pub fn build_dyn_model(&self, gamma_shift: Option<f64>) -> Result<Box<dyn Diffusion>, CliError> {
        let base = self.build_model()?;
        Ok(match gamma_shift {
            Some(shift) => Box::new(ShiftedGamma { model: base, shift }),
            None => Box::new(base),
        })
    }

    /// One-line `key=value` description used in CSV metadata.
    pub fn describe(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let epsilon = match self.epsilon {
            EpsilonSchedule::Fixed(e) => e.to_string(),
            EpsilonSchedule::CubeRootDecay => "decay".into(),
        };
        let mut s = String::new();
        let _ = write!(
            s,
            "model={} params={} a={} b={} x={} T={} N={} N_min={} N0={} epsilon={} M={} seed={} reward={}",
            self.model,
            params,
            self.a,
            self.b,
            self.x,
            format_horizon(self.horizon),
            self.n,
            self.n_min,
            self.n0,
            epsilon,
            self.m,
            self.seed,
            self.reward
        );
        s
    }
}
