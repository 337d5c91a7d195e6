//! Channel gains: exponential direct gains and heavy-tailed interference gains.
//!
//! An interfering transmitter at distance `D` from a receiver contributes
//! `g * D^-alpha` when `D <= 1` and nothing otherwise, with `g ~ Exp(1)`.
//! Conditioned on the transmitter being uniform in the unit disc, the
//! survival function of that gain is
//!
//! ```text
//! P(h > z) = 2 * integral_0^1 u exp(-z u^alpha) du
//!          = (2/alpha) * lower_gamma(2/alpha, z) * z^(-2/alpha)
//! ```
//!
//! so `z^(2/alpha) P(h > z)` increases to `(2/alpha) Gamma(2/alpha)`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::field::{DipoleField, Point2};
use crate::params::{check_alpha, NetworkParams};
use crate::rng;

const DIRECT_STREAM: u64 = 0xD1EC7;
const CROSS_KEY: u64 = 0xC2055;

/// How interference gains depend on geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// `g * D^-alpha`, truncated at distance 1.
    #[default]
    #[serde(rename = "pathloss")]
    PathLoss,
    /// i.i.d. `Exp(1)` for every ordered pair, no truncation.
    #[serde(rename = "no_pathloss")]
    NoPathLoss,
}

impl Propagation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Propagation::PathLoss => "pathloss",
            Propagation::NoPathLoss => "no_pathloss",
        }
    }
}

impl std::str::FromStr for Propagation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pathloss" => Ok(Propagation::PathLoss),
            "no_pathloss" => Ok(Propagation::NoPathLoss),
            other => Err(Error::param(format!("unknown propagation mode `{other}`"))),
        }
    }
}

/// Power-law bounds `c2 z^-beta <= P(h > z) <= c1 z^-beta` for `z >= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub b: f64,
}

impl TailLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_cutoff(alpha, 1.0)
    }

    /// `c1` is the `z -> inf` plateau and `c2` the plateau value at `b`; the
    /// plateau is nondecreasing so both bounds hold on `[b, inf)`.
    pub fn with_cutoff(alpha: f64, b: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::param(format!("cutoff b must be positive, got {b}")));
        }
        let beta = 2.0 / alpha;
        Ok(TailLaw {
            alpha,
            beta,
            c1: plateau_limit(alpha),
            c2: b.powf(beta) * tail_probability(b, alpha)?,
            b,
        })
    }

    /// `(c2 z^-beta, c1 z^-beta)`.
    pub fn bounds(&self, z: f64) -> (f64, f64) {
        let s = z.powf(-self.beta);
        (self.c2 * s, self.c1 * s)
    }
}

/// `(2/alpha) Gamma(2/alpha)`, the limit of `z^(2/alpha) P(h > z)`.
pub fn plateau_limit(alpha: f64) -> f64 {
    let a = 2.0 / alpha;
    a * gamma(a)
}

pub fn sample_direct_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// `fading * distance^-alpha` inside the unit distance, zero beyond it.
pub fn interference_gain(fading: f64, distance: f64, alpha: f64) -> f64 {
    if distance > 1.0 {
        0.0
    } else {
        fading * distance.powf(-alpha)
    }
}

/// One interference gain for a transmitter uniform in the unit disc around the receiver.
pub fn sample_interference_gain<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(draw_interference_gain(alpha, rng))
}

#[inline]
pub(crate) fn draw_interference_gain<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let g: f64 = Exp1.sample(rng);
    // density 2u on [0, 1]; 1 - U keeps the distance away from zero
    let d = (1.0 - rng.random::<f64>()).sqrt();
    g * d.powf(-alpha)
}

/// `P(h > z) = 2 * integral_0^1 u exp(-z u^alpha) du`.
pub fn tail_probability(z: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(z >= 0.0) {
        return Err(Error::param(format!("z must be nonnegative, got {z}")));
    }
    Ok(tail_probability_unchecked(z, alpha))
}

pub(crate) fn tail_probability_unchecked(z: f64, alpha: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    if z.is_infinite() {
        return 0.0;
    }
    if z < 1e-9 {
        // 1 - 2z/(alpha+2) + z^2/(2alpha+2) - ...
        return 1.0 - 2.0 * z / (alpha + 2.0) + z * z / (2.0 * alpha + 2.0);
    }
    let a = 2.0 / alpha;
    a * gamma(a) * gamma_lr(a, z) * z.powf(-a)
}

/// `z^(2/alpha) P(h > z)` at each grid point.
pub fn tail_exponent_plateau(alpha: f64, z_grid: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if z_grid.is_empty() {
        return Err(Error::param("z grid is empty"));
    }
    z_grid
        .iter()
        .map(|&z| {
            if !(z > 0.0) {
                return Err(Error::param(format!("grid point {z} is not positive")));
            }
            Ok(z.powf(2.0 / alpha) * tail_probability_unchecked(z, alpha))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum CrossGains {
    Table(BTreeMap<(usize, usize), f64>),
    Geometric {
        tx: Vec<Point2>,
        rx: Vec<Point2>,
        key: u64,
    },
    Unbounded {
        len: usize,
        key: u64,
    },
}

/// Direct gains plus interference gains for one field realization.
///
/// `cross_gain(i, j)` is the power gain from transmitter `j` at receiver `i`.
/// Realizations sampled from a field evaluate cross gains on demand from the
/// geometry and a per-pair keyed fading draw, so a gain is the same no matter
/// which subset of links asks for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    direct: Vec<f64>,
    cross: CrossGains,
    alpha: f64,
}

impl ChannelRealization {
    /// Explicit gains; `cross` is keyed `(receiver, transmitter)`.
    pub fn from_table(
        direct: Vec<f64>,
        cross: impl IntoIterator<Item = ((usize, usize), f64)>,
        alpha: f64,
    ) -> Result<Self> {
        let len = direct.len();
        if let Some(g) = direct.iter().find(|g| !(**g >= 0.0)) {
            return Err(Error::param(format!("direct gain {g} is negative or NaN")));
        }
        let mut table = BTreeMap::new();
        for ((i, j), g) in cross {
            if i >= len || j >= len {
                return Err(Error::Index {
                    index: i.max(j),
                    len,
                });
            }
            if i == j {
                return Err(Error::param(format!("cross gain on the diagonal ({i}, {i})")));
            }
            if !(g >= 0.0) {
                return Err(Error::param(format!("cross gain ({i}, {j}) = {g} is negative or NaN")));
            }
            table.insert((i, j), g);
        }
        Ok(ChannelRealization {
            direct,
            cross: CrossGains::Table(table),
            alpha,
        })
    }

    /// Table built from field geometry with caller-supplied fading `g(receiver, transmitter)`.
    pub fn from_fading(
        field: &DipoleField,
        direct: Vec<f64>,
        alpha: f64,
        mut fading: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        if direct.len() != field.len() {
            return Err(Error::param(format!(
                "{} direct gains for {} dipoles",
                direct.len(),
                field.len()
            )));
        }
        let mut table = Vec::new();
        for r in field.dipoles() {
            for t in field.dipoles() {
                if r.index == t.index {
                    continue;
                }
                let d = t.tx.distance(&r.rx);
                if d <= 1.0 {
                    table.push((
                        (r.index, t.index),
                        interference_gain(fading(r.index, t.index), d, alpha),
                    ));
                }
            }
        }
        Self::from_table(direct, table, alpha)
    }

    pub fn len(&self) -> usize {
        self.direct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.direct.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn direct(&self) -> &[f64] {
        &self.direct
    }

    pub fn direct_gain(&self, i: usize) -> f64 {
        self.direct[i]
    }

    /// Gain from transmitter `transmitter` at receiver `receiver`; zero on the diagonal.
    pub fn cross_gain(&self, receiver: usize, transmitter: usize) -> f64 {
        if receiver == transmitter {
            return 0.0;
        }
        match &self.cross {
            CrossGains::Table(t) => t.get(&(receiver, transmitter)).copied().unwrap_or(0.0),
            CrossGains::Geometric { tx, rx, key } => {
                let d = tx[transmitter].distance(&rx[receiver]);
                if d > 1.0 {
                    0.0
                } else {
                    rng::keyed_exp1(*key, receiver, transmitter) * d.powf(-self.alpha)
                }
            }
            CrossGains::Unbounded { key, .. } => rng::keyed_exp1(*key, receiver, transmitter),
        }
    }

    /// Every nonzero-support cross entry `((receiver, transmitter), gain)`, sorted.
    pub fn cross_entries(&self) -> Vec<((usize, usize), f64)> {
        match &self.cross {
            CrossGains::Table(t) => t.iter().map(|(k, v)| (*k, *v)).collect(),
            CrossGains::Geometric { tx, rx, .. } => {
                let mut out = Vec::new();
                for (i, r) in rx.iter().enumerate() {
                    for (j, t) in tx.iter().enumerate() {
                        if i != j && t.distance(r) <= 1.0 {
                            out.push(((i, j), self.cross_gain(i, j)));
                        }
                    }
                }
                out
            }
            CrossGains::Unbounded { len, .. } => {
                let len = *len;
                let mut out = Vec::with_capacity(len * len.saturating_sub(1));
                for i in 0..len {
                    for j in 0..len {
                        if i != j {
                            out.push(((i, j), self.cross_gain(i, j)));
                        }
                    }
                }
                out
            }
        }
    }
}

pub fn realize_channel(field: &DipoleField, params: &NetworkParams, seed: u64) -> Result<ChannelRealization> {
    realize_channel_with(field, params, seed, Propagation::PathLoss)
}

pub fn realize_channel_with(
    field: &DipoleField,
    params: &NetworkParams,
    seed: u64,
    propagation: Propagation,
) -> Result<ChannelRealization> {
    check_alpha(params.alpha)?;
    let mut stream = rng::stream(rng::derive_seed(seed, DIRECT_STREAM));
    let direct = (0..field.len()).map(|_| sample_direct_gain(&mut stream)).collect();
    let key = rng::derive_seed(seed, CROSS_KEY);
    let cross = match propagation {
        Propagation::PathLoss => CrossGains::Geometric {
            tx: field.transmitters().collect(),
            rx: field.receivers().collect(),
            key,
        },
        Propagation::NoPathLoss => CrossGains::Unbounded {
            len: field.len(),
            key,
        },
    };
    Ok(ChannelRealization {
        direct,
        cross,
        alpha: params.alpha,
    })
}
