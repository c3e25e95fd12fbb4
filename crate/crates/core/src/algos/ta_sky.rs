//! TA-SKY: threshold-style skyline over the sorted lists.
//!
//! Each round performs one sorted access per query list. The values just
//! read form the threshold tuple `t_syn`: every tuple not yet seen in list
//! `j` has a value of at most `t_syn[j]` there. Whenever the threshold moves,
//! the partially seen tuples that can no longer be beaten by anything unseen
//! are completed by random access and folded into the dominance tree. The
//! scan stops as soon as the tree strictly dominates `t_syn`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::index::{IndexCursor, SortedIndex};
use crate::model::{ProjectedTuple, Query, Relation, TupleId, Value};
use crate::tree::DominanceTree;

use super::st_s::fold_sorted;
use super::{check_index, sort_max_c, ProgressiveSink, Run, SkylineResult};

/// Which partially seen tuples are completed when the threshold moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSelection {
    /// Only tuples with a sorted-access value strictly above the current
    /// threshold on that attribute. Such tuples cannot be dominated by any
    /// unseen tuple, so those the tree admits are emitted immediately.
    #[default]
    Threshold,
    /// Every seen tuple is completed, with no value inference. The tree then
    /// holds a provisional candidate set that later tuples may prune, and
    /// the skyline is emitted only when the scan ends.
    Full,
}

#[derive(Debug, Clone)]
pub struct TaSkyOptions {
    pub selection: CandidateSelection,
    /// In `Threshold` mode, fill a missing attribute with 0 without a random
    /// access when its list has already dropped to 0.
    pub infer_floor: bool,
}

impl Default for TaSkyOptions {
    fn default() -> Self {
        Self {
            selection: CandidateSelection::Threshold,
            infer_floor: true,
        }
    }
}

/// A tuple known only through some sorted accesses.
struct Partial {
    values: Vec<Value>,
    /// Attributes whose value came from sorted access.
    seen: Vec<bool>,
}

pub fn ta_sky(
    relation: &Relation,
    index: &SortedIndex,
    query: &Query,
    options: &TaSkyOptions,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    check_index(relation, index)?;
    let n = relation.tuple_count();
    let m = query.len();
    let attrs = query.attrs();
    let full = options.selection == CandidateSelection::Full;
    let mut tree = DominanceTree::for_query(relation, query)?;
    let mut cursor = index.cursor();
    let mut run = Run::new(sink);

    let mut pending: HashMap<TupleId, Partial> = HashMap::new();
    let mut touched = vec![false; n];
    let mut resolved = vec![false; n];
    let mut tau: Vec<Value> = vec![0; m];
    let mut prev_tau: Option<Vec<Value>> = None;
    let mut stopped = false;

    loop {
        let mut read_any = false;
        for (j, &a) in attrs.iter().enumerate() {
            let Some((id, v)) = cursor.sorted_access(a) else {
                continue;
            };
            read_any = true;
            tau[j] = v;
            if !std::mem::replace(&mut touched[id as usize], true) {
                run.metrics.tuples_accessed += 1;
            }
            if resolved[id as usize] {
                continue;
            }
            let p = pending.entry(id).or_insert_with(|| Partial {
                values: vec![0; m],
                seen: vec![false; m],
            });
            p.values[j] = v;
            p.seen[j] = true;
        }
        if !read_any {
            break;
        }
        run.metrics.iterations += 1;
        let moved = prev_tau.as_ref().is_some_and(|p| *p != tau);
        if moved {
            let chosen: Vec<TupleId> = pending
                .iter()
                .filter(|(_, p)| {
                    full || p
                        .seen
                        .iter()
                        .zip(&p.values)
                        .zip(&tau)
                        .any(|((&s, &v), &c)| s && v > c)
                })
                .map(|(&id, _)| id)
                .collect();
            let mut batch = Vec::with_capacity(chosen.len());
            for id in chosen {
                let p = pending.remove(&id).expect("chosen from pending");
                resolved[id as usize] = true;
                batch.push(complete(id, p, attrs, &tau, options, &mut cursor)?);
            }
            fold(&mut tree, batch, full, &mut run);
            run.metrics.dominance_tests += 1;
            if tree.is_dominated(&tau) {
                stopped = true;
                break;
            }
        }
        prev_tau = Some(tau.clone());
    }

    if !stopped {
        // Every list is exhausted, so every tuple has been seen.
        let mut batch = Vec::with_capacity(pending.len());
        for (id, p) in pending.drain() {
            batch.push(complete(id, p, attrs, &tau, options, &mut cursor)?);
        }
        fold(&mut tree, batch, full, &mut run);
    }
    if full {
        for t in tree.tuples() {
            run.emit(t.id, &t.values);
        }
    }
    let counters = cursor.counters();
    run.metrics.sorted_accesses = counters.sorted_accesses;
    run.metrics.random_accesses = counters.random_accesses;
    run.metrics.node_visits = tree.visits().nodes;
    run.metrics.empty_links = tree.visits().empty_links;
    Ok(run.finish())
}

fn complete(
    id: TupleId,
    mut p: Partial,
    attrs: &[usize],
    tau: &[Value],
    options: &TaSkyOptions,
    cursor: &mut IndexCursor<'_>,
) -> Result<ProjectedTuple> {
    let infer = options.infer_floor && options.selection == CandidateSelection::Threshold;
    for (j, &a) in attrs.iter().enumerate() {
        if p.seen[j] {
            continue;
        }
        // Unseen in list j means at or below the current read position.
        p.values[j] = if infer && tau[j] == 0 && cursor.position(a) > 0 {
            0
        } else {
            cursor.random_access(a, id)?
        };
    }
    Ok(ProjectedTuple {
        id,
        values: p.values,
    })
}

fn fold(tree: &mut DominanceTree, mut batch: Vec<ProjectedTuple>, full: bool, run: &mut Run<'_>) {
    let scorer = tree.scorer().clone();
    sort_max_c(&mut batch, &scorer);
    fold_sorted(tree, &batch, full, !full, run);
}
