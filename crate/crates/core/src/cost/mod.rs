//! Expected-cost models for i.i.d. binary data and Monte-Carlo estimators
//! that measure the same quantities on the real data structures.

mod simulate;
mod ta_sky;
mod top_down;
mod tree;

use serde::Serialize;

use crate::error::{Error, Result};

pub use simulate::{
    simulate_discovered, simulate_list_is_dominated, simulate_ta_sky, simulate_top_down,
    simulate_tree_costs, Estimate, TreeOp,
};
pub use ta_sky::{expected_discovered, expected_ta_sky_sorted_accesses, p_seen};
pub use top_down::expected_top_down_cost;
pub use tree::{
    expected_is_dominated_cost, expected_prune_cost, is_dominated_cost_for_probe, ProbeAverage,
    MAX_TREE_SIZE,
};

/// Binary i.i.d. data: attribute `j` is 1 with probability `p[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IidModel {
    p: Vec<f64>,
    /// Relation size, for the models that need one.
    n: usize,
}

impl IidModel {
    pub fn new(p: Vec<f64>, n: usize) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("model needs at least one attribute"));
        }
        if let Some(bad) = p.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::invalid(format!("probability {bad} outside (0, 1)")));
        }
        Ok(Self { p, n })
    }

    pub fn uniform(m: usize, p: f64, n: usize) -> Result<Self> {
        Self::new(vec![p; m], n)
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn is_uniform(&self) -> bool {
        self.p.iter().all(|&x| x == self.p[0])
    }
}

/// Table of `ln k!` for binomial terms.
#[derive(Debug, Clone)]
pub(crate) struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut t = Vec::with_capacity(max + 1);
        t.push(0.0);
        for k in 1..=max {
            t.push(t[k - 1] + (k as f64).ln());
        }
        Self(t)
    }

    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }

    /// `P[X = k]` for `X ~ Bin(n, q)`, computed in log space.
    pub fn binom_pmf(&self, n: usize, k: usize, q: f64) -> f64 {
        (self.ln_choose(n, k) + k as f64 * q.ln() + (n - k) as f64 * (-q).ln_1p()).exp()
    }
}

/// Terms of `Bin(n, q)` below this log-ratio to the mode are dropped.
const LOG_CUTOFF: f64 = -36.0;

/// The contiguous range of `k` whose `Bin(n, q)` mass is not negligible,
/// with the pmf over that range.
pub(crate) fn binom_window(lf: &LnFactorial, n: usize, q: f64) -> (usize, Vec<f64>) {
    let mode = (((n + 1) as f64) * q).floor().min(n as f64) as usize;
    let log_at = |k: usize| lf.ln_choose(n, k) + k as f64 * q.ln() + (n - k) as f64 * (-q).ln_1p();
    let peak = log_at(mode);
    let mut lo = mode;
    while lo > 0 && log_at(lo - 1) - peak > LOG_CUTOFF {
        lo -= 1;
    }
    let mut hi = mode;
    while hi < n && log_at(hi + 1) - peak > LOG_CUTOFF {
        hi += 1;
    }
    (lo, (lo..=hi).map(|k| log_at(k).exp()).collect())
}
