//! ST-P: pivot-based space partitioning over the dominance tree.
//!
//! A skyline pivot splits the remaining tuples into regions by a bitmask
//! (bit `j` set iff the tuple is at least the pivot on attribute `j`). A
//! tuple can only be dominated by tuples in its own region or in a region
//! whose mask is a strict superset, so cross-region pruning only looks at
//! superset pairs; each region is then solved recursively.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{dominates, project, ProjectedTuple, Query, Relation, Scorer};
use crate::tree::DominanceTree;

use super::{ProgressiveSink, Run, RunMetrics, SkylineResult};

pub const DEFAULT_PIVOT_SEED: u64 = 0x5eed_0001;
const PIVOT_CANDIDATES: usize = 64;
const PIVOT_EVAL: usize = 256;

#[derive(Debug, Clone)]
pub struct StpOptions {
    /// Seed for pivot sampling.
    pub seed: u64,
}

impl Default for StpOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_PIVOT_SEED,
        }
    }
}

/// Picks a pivot that no tuple of `tuples` dominates.
///
/// Up to 64 candidates are scored by how many of up to 256 sampled tuples
/// they dominate or are incomparable with; the best candidate is then
/// replaced by a dominator, transitively, until a full scan finds none.
pub fn select_pivot<'a>(
    tuples: &'a [ProjectedTuple],
    rng: &mut ChaCha8Rng,
    metrics: &mut RunMetrics,
) -> Option<&'a ProjectedTuple> {
    let n = tuples.len();
    if n == 0 {
        return None;
    }
    let candidates = sample(rng, n, PIVOT_CANDIDATES.min(n));
    let eval = sample(rng, n, PIVOT_EVAL.min(n));
    let mut best = candidates.index(0);
    let mut best_score = 0usize;
    for (k, c) in candidates.iter().enumerate() {
        let cv = &tuples[c].values;
        let mut score = 0;
        for e in eval.iter() {
            let ev = &tuples[e].values;
            metrics.dominance_tests += 1;
            if cv == ev {
                continue;
            }
            if dominates(cv, ev) || !dominates(ev, cv) {
                score += 1;
            }
        }
        if k == 0 || score > best_score {
            best = c;
            best_score = score;
        }
    }
    let mut pivot = &tuples[best];
    'climb: loop {
        for t in tuples {
            metrics.dominance_tests += 1;
            if dominates(&t.values, &pivot.values) {
                pivot = t;
                continue 'climb;
            }
        }
        return Some(pivot);
    }
}

/// ST-P over the projection of `relation` onto `query`.
pub fn st_p(
    relation: &Relation,
    query: &Query,
    options: &StpOptions,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    let scorer = Scorer::for_query(relation, query)?;
    st_p_tuples(project(relation, query), &scorer, options, sink)
}

/// ST-P over an explicit tuple list whose values follow `scorer`'s domains.
/// Skyline members are emitted as their regions are resolved.
pub fn st_p_tuples(
    tuples: Vec<ProjectedTuple>,
    scorer: &Scorer,
    options: &StpOptions,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    let m = scorer.len();
    if m > 128 {
        return Err(Error::invalid(format!(
            "ST-P region masks support at most 128 query attributes, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut run = Run::new(sink);
    run.metrics.tuples_accessed = tuples.len() as u64;
    let mut work = vec![tuples];
    while let Some(list) = work.pop() {
        if list.len() <= 1 {
            for t in &list {
                run.emit(t.id, &t.values);
            }
            continue;
        }
        let pivot = select_pivot(&list, &mut rng, &mut run.metrics)
            .expect("non-empty list")
            .clone();
        let mut regions: BTreeMap<u128, Vec<ProjectedTuple>> = BTreeMap::new();
        for t in list {
            if t.values == pivot.values {
                run.emit(t.id, &t.values);
                continue;
            }
            let mask = t
                .values
                .iter()
                .zip(&pivot.values)
                .enumerate()
                .fold(0u128, |acc, (j, (a, b))| acc | (((a >= b) as u128) << j));
            if mask != 0 {
                regions.entry(mask).or_default().push(t);
            }
        }
        let masks: Vec<u128> = regions.keys().copied().collect();
        // Later regions are pushed first so the stack resolves masks in
        // ascending order.
        let mut resolved = Vec::with_capacity(masks.len());
        for &i in &masks {
            let members = &regions[&i];
            let mut tree = DominanceTree::with_scorer(scorer.clone());
            for t in members {
                tree.insert_tuple(t);
            }
            // The pivot sits in the all-ones region, a superset of every mask.
            // Tuples tying it on the set bits and worse elsewhere are only
            // caught here.
            run.metrics.dominance_tests += 1;
            tree.prune_dominated(&pivot.values);
            for &j in &masks {
                if j != i && j & i == i {
                    for t in &regions[&j] {
                        if tree.is_empty() {
                            break;
                        }
                        run.metrics.dominance_tests += 1;
                        tree.prune_dominated(&t.values);
                    }
                }
            }
            run.metrics.add_tree(&tree);
            resolved.push(tree.tuples());
        }
        for survivors in resolved.into_iter().rev() {
            if !survivors.is_empty() {
                work.push(survivors);
            }
        }
    }
    Ok(run.finish())
}
