//! Expected discovery and sorted-access counts of TA-SKY on i.i.d. binary
//! data with uniformly random tie order inside each list.

use crate::error::{Error, Result};

use super::{IidModel, LnFactorial};

/// Probability that a given tuple has been read from at least one list
/// after `i` rounds.
///
/// In list `j` with `k` ones, a tuple with a 0 sits among the last `n - k`
/// entries and a tuple with a 1 among the first `k`; its slot inside that
/// block is uniform.
pub fn p_seen(model: &IidModel, i: usize) -> Result<f64> {
    let n = model.n();
    if i > n {
        return Err(Error::invalid(format!("round {i} beyond n = {n}")));
    }
    if i == 0 {
        return Ok(0.0);
    }
    let lf = LnFactorial::new(n);
    Ok(p_seen_with(model, i, &lf))
}

fn p_seen_with(model: &IidModel, i: usize, lf: &LnFactorial) -> f64 {
    let n = model.n();
    if i == 0 {
        return 0.0;
    }
    let mut unseen = 1.0;
    for &p in model.p() {
        let pl: Vec<f64> = (0..=n).map(|k| lf.binom_pmf(n, k, p)).collect();
        let zero_unseen: f64 = (0..i.min(n + 1))
            .map(|k| pl[k] * (n - i) as f64 / (n - k) as f64)
            .sum::<f64>()
            + pl[i..].iter().sum::<f64>();
        let one_unseen: f64 = (i + 1..=n).map(|k| pl[k] * (k - i) as f64 / k as f64).sum();
        unseen *= (1.0 - p) * zero_unseen + p * one_unseen;
    }
    (1.0 - unseen).clamp(0.0, 1.0)
}

/// Expected number of distinct tuples read after `i` rounds.
pub fn expected_discovered(model: &IidModel, i: usize) -> Result<f64> {
    Ok(model.n() as f64 * p_seen(model, i)?)
}

/// Expected sorted accesses until TA-SKY stops.
///
/// For each round `i`, `k` counts the query attributes whose list has
/// already run out of ones. The stop weight of round `i` combines the chance
/// of that configuration with the chance that one of the `i'` tuples seen so
/// far covers the threshold tuple. The weights overlap across rounds, so
/// they are normalised into a distribution before taking the expectation.
/// If every weight vanishes the scan is assumed to run to the end.
pub fn expected_ta_sky_sorted_accesses(model: &IidModel) -> Result<f64> {
    let n = model.n();
    let m = model.m();
    if n == 0 {
        return Err(Error::invalid("TA-SKY cost needs n >= 1"));
    }
    if !model.is_uniform() && m > 20 {
        return Err(Error::invalid(format!(
            "non-uniform models enumerate 2^{m} attribute subsets; at most 20 attributes"
        )));
    }
    let lf = LnFactorial::new(n.max(m));
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let seen = n as f64 * p_seen_with(model, i, &lf);
        weights.push(stop_weight(model, i, seen, &lf));
    }
    let z: f64 = weights.iter().sum();
    if z <= 0.0 || !z.is_finite() {
        return Ok((m * n) as f64);
    }
    let mean: f64 = weights
        .iter()
        .enumerate()
        .map(|(k, w)| (k + 1) as f64 * w)
        .sum::<f64>()
        / z;
    Ok(m as f64 * mean)
}

fn stop_weight(model: &IidModel, i: usize, seen: f64, lf: &LnFactorial) -> f64 {
    let n = model.n();
    let m = model.m();
    let exhausted = |p: f64| (1.0 - p).powi((n - i) as i32);
    let choose = |k: usize| lf.ln_choose(m, k).exp();
    if model.is_uniform() {
        let p = model.p()[0];
        let pj0 = exhausted(p);
        (1..=m)
            .map(|k| {
                let p0 = choose(k) * pj0.powi(k as i32) * (1.0 - pj0).powi((m - k) as i32);
                let cover = p.powi((m - k) as i32) * (1.0 - (1.0 - p).powi(k as i32));
                p0 * choose(k) * (1.0 - (1.0 - cover).powf(seen))
            })
            .sum()
    } else {
        let mut total = 0.0;
        for mask in 1u32..(1 << m) {
            let k = mask.count_ones() as usize;
            let mut p0 = 1.0;
            let mut rest_ones = 1.0;
            let mut all_zero = 1.0;
            for (j, &p) in model.p().iter().enumerate() {
                if mask >> j & 1 == 1 {
                    p0 *= exhausted(p);
                    all_zero *= 1.0 - p;
                } else {
                    p0 *= 1.0 - exhausted(p);
                    rest_ones *= p;
                }
            }
            let cover = rest_ones * (1.0 - all_zero);
            total += p0 * choose(k) * (1.0 - (1.0 - cover).powf(seen));
        }
        total
    }
}
