use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and asymptotic parameters of one network instance.
///
/// Rates are `bandwidth * ln(1 + SINR)`, so `r_min` is in nats/s when
/// `bandwidth` is in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Intensity of the receiver process, per unit area.
    pub n: f64,
    pub alpha: f64,
    pub power: f64,
    pub noise_var: f64,
    pub bandwidth: f64,
    pub r_min: f64,
    /// Threshold exponent: TBLAS activates links with direct gain above `gamma_exp * ln n`.
    pub gamma_exp: f64,
    pub window_area: f64,
    /// Radius of the disc the transmitter displacement is drawn from.
    pub mark_radius: f64,
}

pub const DEFAULT_POWER_W: f64 = 0.032;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 22.0e6;
pub const DEFAULT_NOISE_VAR: f64 = 0.01;
pub const DEFAULT_ALPHA: f64 = 3.0;
pub const DEFAULT_R_MIN: f64 = 100.0e3;
pub const DEFAULT_GAMMA_EXP: f64 = 0.45;
pub const DEFAULT_WINDOW_AREA: f64 = 4.0;
pub const DEFAULT_MARK_RADIUS: f64 = 0.01;

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            n: 100.0,
            alpha: DEFAULT_ALPHA,
            power: DEFAULT_POWER_W,
            noise_var: DEFAULT_NOISE_VAR,
            bandwidth: DEFAULT_BANDWIDTH_HZ,
            r_min: DEFAULT_R_MIN,
            gamma_exp: DEFAULT_GAMMA_EXP,
            window_area: DEFAULT_WINDOW_AREA,
            mark_radius: DEFAULT_MARK_RADIUS,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}

impl NetworkParams {
    pub fn with_n(self, n: f64) -> Self {
        NetworkParams { n, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        positive("n", self.n)?;
        positive("power", self.power)?;
        positive("noise_var", self.noise_var)?;
        positive("bandwidth", self.bandwidth)?;
        positive("r_min", self.r_min)?;
        check_alpha(self.alpha)?;
        if !(self.gamma_exp > 0.0 && self.gamma_exp < 0.5) {
            return Err(Error::param(format!(
                "gamma_exp must lie in (0, 1/2), got {}",
                self.gamma_exp
            )));
        }
        if !(self.window_area.is_finite() && self.window_area >= 1.0) {
            return Err(Error::param(format!(
                "window_area must be at least one unit area, got {}",
                self.window_area
            )));
        }
        if !(self.mark_radius.is_finite() && self.mark_radius >= 0.0) {
            return Err(Error::param(format!(
                "mark_radius must be nonnegative, got {}",
                self.mark_radius
            )));
        }
        Ok(())
    }

    pub fn window_radius(&self) -> f64 {
        (self.window_area / PI).sqrt()
    }

    /// Smallest SINR meeting `r_min`: `exp(r_min / B) - 1`.
    pub fn sinr_threshold(&self) -> f64 {
        (self.r_min / self.bandwidth).exp_m1()
    }

    /// Direct gain a link needs to meet `r_min` with no interference.
    pub fn interference_free_gain(&self) -> f64 {
        self.noise_var * self.sinr_threshold() / self.power
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 2.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must be at least 2, got {alpha}")))
    }
}
