//! Link rates and link activation under a minimum-rate constraint.
//!
//! A set `A` of simultaneously active links is feasible when every `i` in `A`
//! achieves
//!
//! ```text
//! B ln(1 + P h_ii / (sigma^2 + sum_{j in A, j != i} P h_ij)) >= R_min
//! ```
//!
//! where `h_ij` is the gain from transmitter `j` at receiver `i` (zero beyond
//! unit distance). Removing links only lowers interference, so feasibility is
//! downward closed; the exact solver relies on that to prune.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::params::NetworkParams;

/// Largest instance the exhaustive solver accepts.
pub const EXACT_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Tblas,
    Exact,
    Greedy,
}

impl Solver {
    pub fn as_str(&self) -> &'static str {
        match self {
            Solver::Tblas => "tblas",
            Solver::Exact => "exact",
            Solver::Greedy => "greedy",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tblas" => Ok(Solver::Tblas),
            "exact" => Ok(Solver::Exact),
            "greedy" => Ok(Solver::Greedy),
            other => Err(Error::param(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivationResult {
    pub solver: Solver,
    /// Links with direct gain strictly above `h0`.
    pub good_set: Vec<usize>,
    /// Links that are on and meet `r_min`.
    pub active_set: Vec<usize>,
    /// Rate of every link that was switched on.
    pub rates: BTreeMap<usize, f64>,
    pub h0: f64,
    pub p0: f64,
    pub m_n: usize,
    pub eta_n: usize,
}

impl ActivationResult {
    pub fn min_active_rate(&self) -> Option<f64> {
        self.active_set
            .iter()
            .map(|i| self.rates[i])
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Threshold `h0 = gamma ln n` and `p0 = P(h_ii > h0) = n^-gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodSet {
    pub indices: Vec<usize>,
    pub h0: f64,
    pub p0: f64,
}

#[inline]
fn rate(direct: f64, interference: f64, params: &NetworkParams) -> f64 {
    let sinr = params.power * direct / (params.noise_var + params.power * interference);
    params.bandwidth * sinr.ln_1p()
}

/// Rate of link `i` when exactly the links in `active` transmit.
pub fn link_rate(i: usize, active: &[usize], ch: &ChannelRealization, params: &NetworkParams) -> Result<f64> {
    if !active.contains(&i) {
        return Err(Error::Contract(format!("link {i} is not in the active set")));
    }
    if i >= ch.len() {
        return Err(Error::Index { index: i, len: ch.len() });
    }
    let interference: f64 = active
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| ch.cross_gain(i, j))
        .sum();
    Ok(rate(ch.direct_gain(i), interference, params))
}

/// True when every member of `active` meets `r_min` under that activation.
pub fn is_feasible(active: &[usize], ch: &ChannelRealization, params: &NetworkParams) -> bool {
    active.iter().all(|&i| {
        link_rate(i, active, ch, params)
            .map(|r| r >= params.r_min)
            .unwrap_or(false)
    })
}

pub fn tblas_threshold(params: &NetworkParams) -> Result<(f64, f64)> {
    if !(params.n > 1.0) {
        return Err(Error::param(format!(
            "TBLAS threshold needs n > 1 so that ln n > 0, got {}",
            params.n
        )));
    }
    let h0 = params.gamma_exp * params.n.ln();
    Ok((h0, (-h0).exp()))
}

pub fn good_set_above(ch: &ChannelRealization, h0: f64) -> Vec<usize> {
    ch.direct()
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > h0)
        .map(|(i, _)| i)
        .collect()
}

pub fn tblas_good_set(ch: &ChannelRealization, params: &NetworkParams) -> Result<GoodSet> {
    let (h0, p0) = tblas_threshold(params)?;
    Ok(GoodSet {
        indices: good_set_above(ch, h0),
        h0,
        p0,
    })
}

/// Switch on every good link, then count those that meet `r_min`.
pub fn tblas_activate(ch: &ChannelRealization, params: &NetworkParams) -> Result<ActivationResult> {
    let good = tblas_good_set(ch, params)?;
    Ok(activate_set(ch, params, good))
}

fn activate_set(ch: &ChannelRealization, params: &NetworkParams, good: GoodSet) -> ActivationResult {
    let on = &good.indices;
    let mut rates = BTreeMap::new();
    let mut active_set = Vec::new();
    for &i in on {
        let interference: f64 = on.iter().filter(|&&j| j != i).map(|&j| ch.cross_gain(i, j)).sum();
        let r = rate(ch.direct_gain(i), interference, params);
        if r >= params.r_min {
            active_set.push(i);
        }
        rates.insert(i, r);
    }
    ActivationResult {
        solver: Solver::Tblas,
        m_n: on.len(),
        eta_n: active_set.len(),
        good_set: good.indices,
        active_set,
        rates,
        h0: good.h0,
        p0: good.p0,
    }
}

/// Good set reported alongside exact/greedy results. Falls back to `h0 = 0`
/// when `n <= 1`.
fn reference_good_set(ch: &ChannelRealization, params: &NetworkParams) -> GoodSet {
    tblas_good_set(ch, params).unwrap_or_else(|_| GoodSet {
        indices: good_set_above(ch, 0.0),
        h0: 0.0,
        p0: 1.0,
    })
}

fn finish(
    solver: Solver,
    mut active: Vec<usize>,
    ch: &ChannelRealization,
    params: &NetworkParams,
) -> ActivationResult {
    active.sort_unstable();
    let good = reference_good_set(ch, params);
    let rates = active
        .iter()
        .map(|&i| (i, link_rate(i, &active, ch, params).expect("member of active set")))
        .collect();
    ActivationResult {
        solver,
        m_n: good.indices.len(),
        eta_n: active.len(),
        good_set: good.indices,
        active_set: active,
        rates,
        h0: good.h0,
        p0: good.p0,
    }
}

/// Running interference totals for an active set that grows one link at a time.
struct Packing<'a> {
    ch: &'a ChannelRealization,
    params: &'a NetworkParams,
    members: Vec<usize>,
    interference: Vec<f64>,
    history: Option<Vec<Vec<f64>>>,
}

impl<'a> Packing<'a> {
    fn new(ch: &'a ChannelRealization, params: &'a NetworkParams, undoable: bool) -> Self {
        Packing {
            ch,
            params,
            members: Vec::new(),
            interference: Vec::new(),
            history: undoable.then(Vec::new),
        }
    }

    /// Adds `k` if the augmented set stays feasible.
    fn try_push(&mut self, k: usize, gain: impl Fn(usize, usize) -> f64) -> bool {
        let r_min = self.params.r_min;
        let own: f64 = self.members.iter().map(|&j| gain(k, j)).sum();
        if rate(self.ch.direct_gain(k), own, self.params) < r_min {
            return false;
        }
        let ok = self.members.iter().zip(&self.interference).all(|(&i, &acc)| {
            rate(self.ch.direct_gain(i), acc + gain(i, k), self.params) >= r_min
        });
        if !ok {
            return false;
        }
        if let Some(h) = self.history.as_mut() {
            h.push(self.interference.clone());
        }
        for (&i, acc) in self.members.iter().zip(self.interference.iter_mut()) {
            *acc += gain(i, k);
        }
        self.members.push(k);
        self.interference.push(own);
        true
    }

    /// Undoes the last successful `try_push`, restoring the exact previous sums.
    fn pop(&mut self) {
        self.members.pop().expect("nonempty packing");
        self.interference = self
            .history
            .as_mut()
            .and_then(Vec::pop)
            .expect("pop on an undoable packing");
    }
}

/// Maximum-cardinality feasible set by exhaustive search.
///
/// Sets are explored depth-first in lexicographic order and only feasible sets
/// are extended, so the first maximum found is the lexicographically smallest.
pub fn max_active_exact(ch: &ChannelRealization, params: &NetworkParams) -> Result<ActivationResult> {
    let n = ch.len();
    if n > EXACT_CAP {
        return Err(Error::Size { size: n, cap: EXACT_CAP });
    }
    let gains: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| ch.cross_gain(i, j)).collect())
        .collect();
    let gain = |i: usize, j: usize| gains[i][j];

    let mut best: Vec<usize> = Vec::new();
    let mut packing = Packing::new(ch, params, true);
    search(&mut packing, 0, n, &gain, &mut best);
    Ok(finish(Solver::Exact, best, ch, params))
}

fn search(
    packing: &mut Packing<'_>,
    start: usize,
    n: usize,
    gain: &impl Fn(usize, usize) -> f64,
    best: &mut Vec<usize>,
) {
    for k in start..n {
        // even taking every remaining candidate cannot beat the incumbent
        if packing.members.len() + (n - k) <= best.len() {
            return;
        }
        if packing.try_push(k, gain) {
            if packing.members.len() > best.len() {
                *best = packing.members.clone();
            }
            search(packing, k + 1, n, gain, best);
            packing.pop();
        }
    }
}

/// Adds links in order of decreasing direct gain, keeping each one only if
/// the whole set stays feasible.
pub fn max_active_greedy(ch: &ChannelRealization, params: &NetworkParams) -> Result<ActivationResult> {
    let mut order: Vec<usize> = (0..ch.len()).collect();
    order.sort_by(|&a, &b| ch.direct_gain(b).total_cmp(&ch.direct_gain(a)).then(a.cmp(&b)));
    let mut packing = Packing::new(ch, params, false);
    for k in order {
        packing.try_push(k, |i, j| ch.cross_gain(i, j));
    }
    Ok(finish(Solver::Greedy, packing.members, ch, params))
}

pub fn activate(ch: &ChannelRealization, params: &NetworkParams, solver: Solver) -> Result<ActivationResult> {
    match solver {
        Solver::Tblas => tblas_activate(ch, params),
        Solver::Exact => max_active_exact(ch, params),
        Solver::Greedy => max_active_greedy(ch, params),
    }
}
