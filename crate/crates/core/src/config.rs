//! Flat key=value study configuration. One key per line, `#` comments,
//! unknown keys rejected by name so typos never silently fall back to a
//! default.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Converge,
    Evolve,
    Derive,
    Dispersion,
    Strichartz,
}

impl std::str::FromStr for Mode {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converge" => Ok(Mode::Converge),
            "evolve" => Ok(Mode::Evolve),
            "derive" => Ok(Mode::Derive),
            "dispersion" => Ok(Mode::Dispersion),
            "strichartz" => Ok(Mode::Strichartz),
            other => Err(LabError::config(format!(
                "unknown mode \"{other}\" (expected converge|evolve|derive|dispersion|strichartz)"
            ))),
        }
    }
}

/// How the per-c horizon is chosen: a fixed T for plain comparisons, or
/// the theorem-shaped window gamma * c^{2(r-1)} for horizon studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TRule {
    Fixed,
    Horizon,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyConfig {
    pub mode: Mode,
    pub d: usize,
    pub n: usize,
    pub box_len: f64,
    pub c_list: Vec<f64>,
    pub lambda: f64,
    pub l: u32,
    pub r: usize,
    /// per-c step is dt0 / c^2
    pub dt0: f64,
    pub t_rule: TRule,
    /// horizon for TRule::Fixed
    pub t_fixed: f64,
    /// horizon scale for TRule::Horizon
    pub gamma: f64,
    pub sobolev_k: f64,
    /// datum decay exponent; None means alpha_min + 0.25
    pub alpha: Option<f64>,
    /// datum norm is amplitude * c^{-alpha} in H^k
    pub amplitude: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// runs needing more steps per c are truncated, with a recorded flag
    pub step_budget: u64,
    /// evolve mode: write per-sample field CSVs
    pub snapshots: bool,
}

pub const DEFAULTS_HELP: &str = "\
config file keys (flat key=value, # comments, unknown keys rejected):
  mode        converge|evolve|derive|dispersion|strichartz (required in file)
  d           space dimension                    [2]
  N           grid points per axis, power of two [64]
  L           box side length                    [2*pi]
  c_list      comma-separated speeds, increasing [2,4,8]
  lambda      coupling                           [1]
  l           nonlinearity half-degree (2l-1)    [2]
  r           normalized expansion order         [1]
  dt0         base step; per-c step is dt0/c^2   [0.01]
  T_rule      fixed|horizon                      [fixed]
  T           horizon when T_rule=fixed          [1]
  gamma       horizon scale gamma*c^{2(r-1)}     [0.1]
  sobolev_k   comparison norm H^k                [2]
  alpha       datum decay exponent               [alpha_min + 0.25]
  amplitude   datum H^k norm is amplitude*c^-a   [0.1]
  seed        datum seed                         [7]
  output_dir  report directory                   [out]
  step_budget per-c step cap, truncates + flags  [400000]
  snapshots   evolve mode field CSVs, true|false [false]";

impl StudyConfig {
    pub fn new(mode: Mode) -> Self {
        StudyConfig {
            mode,
            d: 2,
            n: 64,
            box_len: std::f64::consts::TAU,
            c_list: vec![2.0, 4.0, 8.0],
            lambda: 1.0,
            l: 2,
            r: 1,
            dt0: 0.01,
            t_rule: TRule::Fixed,
            t_fixed: 1.0,
            gamma: 0.1,
            sobolev_k: 2.0,
            alpha: None,
            amplitude: 0.1,
            seed: 7,
            output_dir: PathBuf::from("out"),
            step_budget: 400_000,
            snapshots: false,
        }
    }

    /// Applies one key=value assignment; the CLI --override path and the
    /// file parser share this, so both reject the same unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| {
                LabError::config(format!("key \"{key}\": cannot parse \"{value}\""))
            })
        }
        let value = value.trim();
        match key {
            "mode" => self.mode = value.parse()?,
            "d" => self.d = num(key, value)?,
            "N" => self.n = num(key, value)?,
            "L" => self.box_len = num(key, value)?,
            "c_list" => {
                let mut cs = Vec::new();
                for part in value.split(',') {
                    cs.push(num::<f64>(key, part)?);
                }
                self.c_list = cs;
            }
            "lambda" => self.lambda = num(key, value)?,
            "l" => self.l = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "dt0" => self.dt0 = num(key, value)?,
            "T_rule" => {
                self.t_rule = match value {
                    "fixed" => TRule::Fixed,
                    "horizon" => TRule::Horizon,
                    other => {
                        return Err(LabError::config(format!(
                            "key \"T_rule\": expected fixed|horizon, got \"{other}\""
                        )))
                    }
                }
            }
            "T" => self.t_fixed = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "sobolev_k" => self.sobolev_k = num(key, value)?,
            "alpha" => self.alpha = Some(num(key, value)?),
            "amplitude" => self.amplitude = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "step_budget" => self.step_budget = num(key, value)?,
            "snapshots" => self.snapshots = num(key, value)?,
            other => {
                return Err(LabError::config(format!("unknown key \"{other}\"")));
            }
        }
        Ok(())
    }

    /// The per-c horizon under the configured rule.
    pub fn horizon(&self, c: f64) -> f64 {
        match self.t_rule {
            TRule::Fixed => self.t_fixed,
            TRule::Horizon => self.gamma * c.powi(2 * (self.r as i32 - 1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_list.is_empty() {
            return Err(LabError::config("c_list must not be empty"));
        }
        for w in self.c_list.windows(2) {
            if !(w[1] > w[0]) {
                return Err(LabError::config(format!(
                    "c_list must be strictly increasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        if !self.c_list.iter().all(|&c| c >= 1.0 && c.is_finite()) {
            return Err(LabError::config("c_list entries must be finite and >= 1"));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(LabError::config("dt0 must be positive"));
        }
        if !(self.t_fixed > 0.0 && self.gamma > 0.0) {
            return Err(LabError::config("T and gamma must be positive"));
        }
        if !(self.amplitude > 0.0) {
            return Err(LabError::config("amplitude must be positive"));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(LabError::config("alpha must be a finite value >= 0"));
            }
        }
        if self.step_budget == 0 {
            return Err(LabError::config("step_budget must be >= 1"));
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<StudyConfig> {
    let mut assigns = Vec::new();
    let mut mode = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            LabError::config(format!("line {}: expected key=value, got \"{line}\"", lineno + 1))
        })?;
        let key = key.trim();
        if key == "mode" {
            mode = Some(value.trim().parse::<Mode>()?);
        }
        assigns.push((key.to_string(), value.trim().to_string()));
    }
    let mode = mode.ok_or_else(|| LabError::config("missing required key: mode"))?;
    let mut cfg = StudyConfig::new(mode);
    for (key, value) in &assigns {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
