//! ST-S: sort-based skyline over the dominance tree.
//!
//! Tuples are scanned in descending max-C order, so no tuple can be
//! dominated by one that comes after it. A tuple not dominated by the tree
//! is therefore final the moment it is inserted. The stop point (the
//! inserted tuple with the largest minimum coordinate) ends the scan once it
//! is at least as good as everything left.

use crate::error::Result;
use crate::model::{dominates, project, ProjectedTuple, Query, Relation, Scorer, Value};
use crate::tree::DominanceTree;

use super::{sort_max_c, ProgressiveSink, Run, RunMetrics, SkylineResult};

/// The stop point of a scan and the tuples it let the scan skip.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopTrace {
    pub stop: Option<ProjectedTuple>,
    pub skipped: Vec<ProjectedTuple>,
}

pub(crate) trait Candidates {
    fn is_dominated(&mut self, values: &[Value], metrics: &mut RunMetrics) -> bool;
    fn prune(&mut self, values: &[Value], metrics: &mut RunMetrics);
    fn insert(&mut self, t: &ProjectedTuple);
}

impl Candidates for DominanceTree {
    fn is_dominated(&mut self, values: &[Value], metrics: &mut RunMetrics) -> bool {
        metrics.dominance_tests += 1;
        DominanceTree::is_dominated(self, values)
    }

    fn prune(&mut self, values: &[Value], metrics: &mut RunMetrics) {
        metrics.dominance_tests += 1;
        self.prune_dominated(values);
    }

    fn insert(&mut self, t: &ProjectedTuple) {
        self.insert_tuple(t);
    }
}

/// Flat candidate list with linear scans.
#[derive(Debug, Default)]
pub(crate) struct CandidateList(pub Vec<ProjectedTuple>);

impl Candidates for CandidateList {
    fn is_dominated(&mut self, values: &[Value], metrics: &mut RunMetrics) -> bool {
        for c in &self.0 {
            metrics.dominance_tests += 1;
            if dominates(&c.values, values) {
                return true;
            }
        }
        false
    }

    fn prune(&mut self, values: &[Value], metrics: &mut RunMetrics) {
        metrics.dominance_tests += self.0.len() as u64;
        self.0.retain(|c| !dominates(values, &c.values));
    }

    fn insert(&mut self, t: &ProjectedTuple) {
        self.0.push(t.clone());
    }
}

fn min_value(values: &[Value]) -> Value {
    values.iter().copied().min().unwrap_or(0)
}

fn max_value(values: &[Value]) -> Value {
    values.iter().copied().max().unwrap_or(0)
}

/// Folds a max-C sorted batch into `set`.
///
/// With `prune` set, every surviving tuple first removes what it dominates
/// from the set; otherwise the fold is insertion-only. Inserted tuples are
/// emitted through `run` when `emit` is set.
pub(crate) fn fold_sorted<C: Candidates>(
    set: &mut C,
    batch: &[ProjectedTuple],
    prune: bool,
    emit: bool,
    run: &mut Run<'_>,
) -> StopTrace {
    let mut trace = StopTrace::default();
    let mut stop_min: Value = 0;
    let mut prev_inserted = false;
    for (i, t) in batch.iter().enumerate() {
        if let Some(stop) = &trace.stop {
            if stop_min >= max_value(&t.values) && stop.values != t.values {
                trace.skipped.extend_from_slice(&batch[i..]);
                break;
            }
        }
        let inserted = if i > 0 && batch[i - 1].values == t.values {
            prev_inserted
        } else if set.is_dominated(&t.values, &mut run.metrics) {
            false
        } else {
            if prune {
                set.prune(&t.values, &mut run.metrics);
            }
            true
        };
        prev_inserted = inserted;
        if !inserted {
            continue;
        }
        set.insert(t);
        let t_min = min_value(&t.values);
        if trace.stop.is_none() || t_min > stop_min {
            stop_min = t_min;
            trace.stop = Some(t.clone());
        }
        if emit {
            run.emit(t.id, &t.values);
        }
    }
    trace
}

/// ST-S over the projection of `relation` onto `query`.
pub fn st_s(
    relation: &Relation,
    query: &Query,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    let tree = DominanceTree::for_query(relation, query)?;
    st_s_seeded(relation, query, tree, sink).map(|(r, _, _)| r)
}

/// As [`st_s`], also returning the stop trace for auditing.
pub fn st_s_traced(
    relation: &Relation,
    query: &Query,
    sink: &mut dyn ProgressiveSink,
) -> Result<(SkylineResult, StopTrace)> {
    let tree = DominanceTree::for_query(relation, query)?;
    st_s_seeded(relation, query, tree, sink).map(|(r, _, t)| (r, t))
}

/// ST-S starting from an existing tree. Tuples already in `tree` act as
/// dominators but are not emitted; the final tree is returned.
pub fn st_s_seeded(
    relation: &Relation,
    query: &Query,
    mut tree: DominanceTree,
    sink: &mut dyn ProgressiveSink,
) -> Result<(SkylineResult, DominanceTree, StopTrace)> {
    let scorer = tree.scorer().clone();
    let mut tuples = project(relation, query);
    sort_max_c(&mut tuples, &scorer);
    let mut run = Run::new(sink);
    run.metrics.tuples_accessed = tuples.len() as u64;
    let before = tree.visits();
    let trace = fold_sorted(&mut tree, &tuples, false, true, &mut run);
    let after = tree.visits();
    run.metrics.node_visits += after.nodes - before.nodes;
    run.metrics.empty_links += after.empty_links - before.empty_links;
    Ok((run.finish(), tree, trace))
}

/// ST-S with a flat candidate list instead of the tree. Dominance tests
/// count pairwise comparisons.
pub fn list_candidate_variant(
    relation: &Relation,
    query: &Query,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    let scorer = Scorer::for_query(relation, query)?;
    let tuples = project(relation, query);
    Ok(list_skyline(tuples, &scorer, sink))
}

pub(crate) fn list_skyline(
    mut tuples: Vec<ProjectedTuple>,
    scorer: &Scorer,
    sink: &mut dyn ProgressiveSink,
) -> SkylineResult {
    sort_max_c(&mut tuples, scorer);
    let mut run = Run::new(sink);
    run.metrics.tuples_accessed = tuples.len() as u64;
    fold_sorted(
        &mut CandidateList::default(),
        &tuples,
        false,
        true,
        &mut run,
    );
    run.finish()
}
