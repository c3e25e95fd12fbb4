//! Monte-Carlo estimators that run the real data structures on sampled
//! i.i.d. binary data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algos::{ta_sky, top_down, NullSink, TaSkyOptions, TopDownOptions};
use crate::error::{Error, Result};
use crate::index::{SortedIndex, TiePolicy};
use crate::model::{dominates, Query, Relation, Value};
use crate::tree::DominanceTree;

use super::IidModel;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    fn from_samples(xs: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
        for x in xs {
            n += 1;
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let var = if n > 1 {
            ((sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            trials: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeOp {
    IsDominated,
    Prune,
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    Ok(())
}

fn sample_tuple(model: &IidModel, rng: &mut ChaCha8Rng) -> Vec<Value> {
    model
        .p()
        .iter()
        .map(|&p| rng.random_bool(p) as Value)
        .collect()
}

fn sample_relation(model: &IidModel, rng: &mut ChaCha8Rng) -> Result<Relation> {
    let rows = (0..model.n()).map(|_| sample_tuple(model, rng)).collect();
    Relation::from_rows(&vec![2; model.m()], rows)
}

/// Mean recursive calls (nodes plus empty slots) of one operation on a tree
/// of `s` sampled tuples, with a freshly sampled probe per trial.
pub fn simulate_tree_costs(
    model: &IidModel,
    s: usize,
    op: TreeOp,
    bounds: bool,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cards = vec![2; model.m()];
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut tree = DominanceTree::new(&cards)?.with_bounds(bounds);
        for id in 0..s {
            tree.insert(id as u32, &sample_tuple(model, &mut rng));
        }
        let probe = sample_tuple(model, &mut rng);
        match op {
            TreeOp::IsDominated => {
                tree.is_dominated(&probe);
            }
            TreeOp::Prune => {
                tree.prune_dominated(&probe);
            }
        }
        samples.push(tree.visits().calls() as f64);
    }
    Ok(Estimate::from_samples(samples))
}

/// Mean attribute comparisons of a dominance check against a flat list of
/// `s` sampled tuples, scanning until a dominator is found. Each tuple
/// comparison is charged `m'`.
pub fn simulate_list_is_dominated(
    model: &IidModel,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = model.m() as f64;
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let list: Vec<Vec<Value>> = (0..s).map(|_| sample_tuple(model, &mut rng)).collect();
        let probe = sample_tuple(model, &mut rng);
        let scanned = list
            .iter()
            .position(|c| dominates(c, &probe))
            .map_or(s, |k| k + 1);
        samples.push(scanned as f64 * m);
    }
    Ok(Estimate::from_samples(samples))
}

/// Mean distinct tuples among the first `i` entries of every list, with
/// ties inside each list placed uniformly at random.
pub fn simulate_discovered(
    model: &IidModel,
    i: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    check_trials(trials)?;
    let n = model.n();
    if i > n {
        return Err(Error::invalid(format!("round {i} beyond n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    let mut seen = vec![false; n];
    for _ in 0..trials {
        seen.iter_mut().for_each(|x| *x = false);
        let rows: Vec<Vec<Value>> = (0..n).map(|_| sample_tuple(model, &mut rng)).collect();
        #[allow(clippy::needless_range_loop)] // `j` is a column index.
        for j in 0..model.m() {
            let (mut ones, mut zeros): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&t| rows[t][j] == 1);
            ones.shuffle(&mut rng);
            zeros.shuffle(&mut rng);
            for &t in ones.iter().chain(&zeros).take(i) {
                seen[t] = true;
            }
        }
        samples.push(seen.iter().filter(|&&x| x).count() as f64);
    }
    Ok(Estimate::from_samples(samples))
}

/// Mean sorted accesses of TA-SKY on sampled relations of `model.n()` rows,
/// with ties shuffled independently per list.
pub fn simulate_ta_sky(model: &IidModel, trials: usize, seed: u64) -> Result<Estimate> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let rel = sample_relation(model, &mut rng)?;
        let idx = SortedIndex::build(&rel, TiePolicy::Random(rng.random()));
        let q = Query::all(&rel)?;
        let r = ta_sky(&rel, &idx, &q, &TaSkyOptions::default(), &mut NullSink)?;
        samples.push(r.metrics.sorted_accesses as f64);
    }
    Ok(Estimate::from_samples(samples))
}

/// Mean TOP-DOWN cost, lattice lookups times `k`, on sampled relations.
pub fn simulate_top_down(model: &IidModel, k: f64, trials: usize, seed: u64) -> Result<Estimate> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let rel = sample_relation(model, &mut rng)?;
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        let q = Query::all(&rel)?;
        let r = top_down(&rel, &idx, &q, &TopDownOptions::default(), &mut NullSink)?;
        samples.push(r.metrics.lattice_nodes_queried as f64 * k);
    }
    Ok(Estimate::from_samples(samples))
}
