//! Expected node visits of IS-DOMINATED and PRUNE-DOMINATED-TUPLES on a
//! tree of `s` i.i.d. binary tuples.
//!
//! `C(l, c)` is the expected number of recursive calls made on a subtree at
//! level `l` holding `c` tuples, counting calls that land on empty child
//! slots. At level `l`, `i` of the `c` tuples take the 0 edge with
//! probability `Bin(c, 1 - p_l)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{binom_window, IidModel, LnFactorial};

/// Largest tree size the evaluators accept.
pub const MAX_TREE_SIZE: usize = 1 << 16;

fn check_size(s: usize) -> Result<()> {
    if s > MAX_TREE_SIZE {
        return Err(Error::ResourceCap {
            message: format!("tree size {s} exceeds the evaluator budget of {MAX_TREE_SIZE}"),
            metrics: None,
        });
    }
    Ok(())
}

/// `C(0, s)` for PRUNE-DOMINATED-TUPLES.
///
/// The 0 edge is always followed; the 1 edge only when the probe has a 1 at
/// this level, which happens with probability `p_l`.
pub fn expected_prune_cost(model: &IidModel, s: usize) -> Result<f64> {
    check_size(s)?;
    let lf = LnFactorial::new(s);
    let mut next = vec![1.0; s + 1];
    for l in (0..model.m()).rev() {
        let p = model.p()[l];
        let mut cur = vec![1.0; s + 1];
        for (c, slot) in cur.iter_mut().enumerate().skip(1) {
            let (lo, w) = binom_window(&lf, c, 1.0 - p);
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let zeros = lo + k;
                acc += wk * (next[zeros] + p * next[c - zeros]);
            }
            *slot = 1.0 + acc;
        }
        next = cur;
    }
    Ok(next[s])
}

/// `C(0, s)` for IS-DOMINATED against one fixed probe.
///
/// The 1 edge is always searched first. The 0 edge is searched only when the
/// probe has a 0 at this level and the 1 subtree holds no tuple matching the
/// probe's remaining ones, an event of probability `(1 - P)^(c - i)` with
/// `P` the product of `p_j` over the probe's later 1 attributes.
pub fn is_dominated_cost_for_probe(model: &IidModel, s: usize, probe: &[bool]) -> Result<f64> {
    check_size(s)?;
    if probe.len() != model.m() {
        return Err(Error::invalid(format!(
            "probe of length {} for a model of {} attributes",
            probe.len(),
            model.m()
        )));
    }
    Ok(probe_cost(model, s, probe, &windows(model, s)))
}

/// `Bin(c, 1 - p_l)` windows for every level `l` and count `c <= s`.
type Windows = Vec<Vec<(usize, Vec<f64>)>>;

fn windows(model: &IidModel, s: usize) -> Windows {
    let lf = LnFactorial::new(s);
    let mut out: Windows = Vec::with_capacity(model.m());
    for (l, &p) in model.p().iter().enumerate() {
        if l > 0 && model.p()[l - 1] == p {
            let prev = out[l - 1].clone();
            out.push(prev);
        } else {
            out.push((0..=s).map(|c| binom_window(&lf, c, 1.0 - p)).collect());
        }
    }
    out
}

fn probe_cost(model: &IidModel, s: usize, probe: &[bool], windows: &Windows) -> f64 {
    let m = model.m();
    let mut next = vec![1.0; s + 1];
    let mut ones_product: f64 = 1.0;
    let mut miss = vec![1.0; s + 1];
    for l in (0..m).rev() {
        let p = model.p()[l];
        let zero_here = !probe[l];
        if zero_here {
            // miss[k] = (1 - P)^k, the chance none of k tuples covers the
            // probe's later 1 attributes.
            let base = 1.0 - ones_product;
            for (k, slot) in miss.iter_mut().enumerate() {
                *slot = base.powi(k as i32);
            }
        }
        let mut cur = vec![1.0; s + 1];
        for (c, slot) in cur.iter_mut().enumerate().skip(1) {
            let (lo, w) = &windows[l][c];
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let zeros = lo + k;
                let ones = c - zeros;
                let mut term = next[ones];
                if zero_here {
                    term += miss[ones] * next[zeros];
                }
                acc += wk * term;
            }
            *slot = 1.0 + acc;
        }
        next = cur;
        if probe[l] {
            ones_product *= p;
        }
    }
    next[s]
}

/// How IS-DOMINATED's probe-dependent cost is averaged over probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeAverage {
    /// Weighted sum over all `2^m'` probes; `m'` must be at most 16.
    Exact,
    /// Mean over probes drawn from the model.
    Sampled { probes: usize, seed: u64 },
}

/// Expected IS-DOMINATED cost with the probe drawn from the same model.
pub fn expected_is_dominated_cost(
    model: &IidModel,
    s: usize,
    average: ProbeAverage,
) -> Result<f64> {
    check_size(s)?;
    let windows = windows(model, s);
    let m = model.m();
    match average {
        ProbeAverage::Exact => {
            if m > 16 {
                return Err(Error::invalid(format!(
                    "exact probe averaging enumerates 2^{m} probes; use sampling"
                )));
            }
            let mut total = 0.0;
            let mut probe = vec![false; m];
            for bits in 0u32..(1 << m) {
                let mut weight = 1.0;
                for (j, slot) in probe.iter_mut().enumerate() {
                    *slot = bits >> j & 1 == 1;
                    let p = model.p()[j];
                    weight *= if *slot { p } else { 1.0 - p };
                }
                total += weight * probe_cost(model, s, &probe, &windows);
            }
            Ok(total)
        }
        ProbeAverage::Sampled { probes, seed } => {
            if probes == 0 {
                return Err(Error::invalid("at least one probe is required"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut total = 0.0;
            let mut probe = vec![false; m];
            for _ in 0..probes {
                for (slot, &p) in probe.iter_mut().zip(model.p()) {
                    *slot = rng.random_bool(p);
                }
                total += probe_cost(model, s, &probe, &windows);
            }
            Ok(total / probes as f64)
        }
    }
}
