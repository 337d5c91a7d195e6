use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::activation::Solver;
use crate::channel::Propagation;
use crate::error::{Error, Result};
use crate::params::{self, NetworkParams};

/// Sweep settings plus the physical parameters shared by every grid point.
///
/// Missing keys fall back to WiFi-like defaults: 15 dBm transmit power, a
/// 22 MHz channel, noise variance 0.01, `alpha = 3` and `R_min = 100 kb/s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<f64>,
    pub reps: u64,
    pub alpha: f64,
    pub power_w: f64,
    pub noise_var: f64,
    pub bandwidth_hz: f64,
    pub r_min: f64,
    pub gamma_exp: f64,
    pub mark_radius: f64,
    pub window_area: f64,
    pub solver: Solver,
    pub mode: Propagation,
    pub master_seed: u64,
    /// Use exactly `n * window_area` dipoles instead of a Poisson count.
    pub fixed_count: bool,
}

pub const KEYS: &[&str] = &[
    "n_grid",
    "reps",
    "alpha",
    "power_w",
    "noise_var",
    "bandwidth_hz",
    "r_min",
    "gamma_exp",
    "mark_radius",
    "window_area",
    "solver",
    "mode",
    "master_seed",
    "fixed_count",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_grid: (1..=10).map(|k| 100.0 * k as f64).collect(),
            reps: 100,
            alpha: params::DEFAULT_ALPHA,
            power_w: params::DEFAULT_POWER_W,
            noise_var: params::DEFAULT_NOISE_VAR,
            bandwidth_hz: params::DEFAULT_BANDWIDTH_HZ,
            r_min: params::DEFAULT_R_MIN,
            gamma_exp: params::DEFAULT_GAMMA_EXP,
            mark_radius: params::DEFAULT_MARK_RADIUS,
            window_area: params::DEFAULT_WINDOW_AREA,
            solver: Solver::Tblas,
            mode: Propagation::PathLoss,
            master_seed: 1,
            fixed_count: false,
        }
    }
}

fn take<T: serde::de::DeserializeOwned>(key: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::config(key, e.to_string()))
}

fn require(key: &str, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, what))
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let Value::Object(map) = root else {
            return Err(Error::config("<document>", "top level must be a JSON object"));
        };
        Self::from_map(map)
    }

    fn from_map(map: Map<String, Value>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (key, v) in map {
            match key.as_str() {
                "n_grid" => cfg.n_grid = take(&key, v)?,
                "reps" => cfg.reps = take(&key, v)?,
                "alpha" => cfg.alpha = take(&key, v)?,
                "power_w" => cfg.power_w = take(&key, v)?,
                "noise_var" => cfg.noise_var = take(&key, v)?,
                "bandwidth_hz" => cfg.bandwidth_hz = take(&key, v)?,
                "r_min" => cfg.r_min = take(&key, v)?,
                "gamma_exp" => cfg.gamma_exp = take(&key, v)?,
                "mark_radius" => cfg.mark_radius = take(&key, v)?,
                "window_area" => cfg.window_area = take(&key, v)?,
                "solver" => cfg.solver = take(&key, v)?,
                "mode" => cfg.mode = take(&key, v)?,
                "master_seed" => cfg.master_seed = take(&key, v)?,
                "fixed_count" => cfg.fixed_count = take(&key, v)?,
                _ => return Err(Error::config(key, "unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        require("n_grid", !self.n_grid.is_empty(), "must not be empty")?;
        require(
            "n_grid",
            self.n_grid.iter().all(|n| n.is_finite() && *n > 1.0),
            "every intensity must be finite and greater than 1",
        )?;
        require(
            "n_grid",
            self.n_grid.windows(2).all(|w| w[0] < w[1]),
            "must be strictly ascending",
        )?;
        require("reps", self.reps >= 1, "must be at least 1")?;
        require("alpha", self.alpha.is_finite() && self.alpha >= 2.0, "must be at least 2")?;
        for (key, v) in [
            ("power_w", self.power_w),
            ("noise_var", self.noise_var),
            ("bandwidth_hz", self.bandwidth_hz),
            ("r_min", self.r_min),
        ] {
            require(key, v.is_finite() && v > 0.0, "must be positive")?;
        }
        require(
            "gamma_exp",
            self.gamma_exp > 0.0 && self.gamma_exp < 0.5,
            "must lie strictly between 0 and 1/2",
        )?;
        require(
            "mark_radius",
            self.mark_radius.is_finite() && self.mark_radius >= 0.0,
            "must be nonnegative",
        )?;
        require(
            "window_area",
            self.window_area.is_finite() && self.window_area >= 1.0,
            "must be at least 1",
        )?;
        Ok(())
    }

    pub fn params(&self, n: f64) -> NetworkParams {
        NetworkParams {
            n,
            alpha: self.alpha,
            power: self.power_w,
            noise_var: self.noise_var,
            bandwidth: self.bandwidth_hz,
            r_min: self.r_min,
            gamma_exp: self.gamma_exp,
            window_area: self.window_area,
            mark_radius: self.mark_radius,
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json_str(&text)
}
