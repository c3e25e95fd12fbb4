//! TOP-DOWN: breadth-first descent of the query lattice.
//!
//! Starting at the all-max combination, each lattice node is looked up in
//! the sorted lists. A node holding tuples is a skyline combination and
//! dominates its whole down-set, so it is never expanded. A node is only
//! queried when every parent was queried and found empty; any other node is
//! dominated by a present ancestor.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::index::SortedIndex;
use crate::model::{ProjectedTuple, Query, Relation, Value};

use super::lattice::{Lattice, LatticeNodeId};
use super::{check_index, ProgressiveSink, Run, SkylineResult};

pub const DEFAULT_LATTICE_CAP: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct TopDownOptions {
    /// Largest number of lattice ids the run may track before aborting.
    pub cap: usize,
    /// Keep a record of every queried node.
    pub record_queries: bool,
}

impl Default for TopDownOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_LATTICE_CAP,
            record_queries: false,
        }
    }
}

/// One lattice lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopDownQuery {
    pub id: LatticeNodeId,
    pub values: Vec<Value>,
    pub present: bool,
}

/// Tuples whose projection onto `query` is exactly `values`, by
/// intersecting per-attribute value ranges, smallest first.
pub fn get_tuples(index: &SortedIndex, query: &Query, values: &[Value]) -> Vec<ProjectedTuple> {
    let mut sets: Vec<&[u32]> = query
        .attrs()
        .iter()
        .zip(values)
        .map(|(&a, &v)| index.list(a).ids_with_value_sorted(v))
        .collect();
    sets.sort_by_key(|s| s.len());
    let Some((first, rest)) = sets.split_first() else {
        return Vec::new();
    };
    let mut acc: Vec<u32> = first.to_vec();
    for s in rest {
        if acc.is_empty() {
            break;
        }
        acc = intersect(&acc, s);
    }
    acc.into_iter()
        .map(|id| ProjectedTuple {
            id,
            values: values.to_vec(),
        })
        .collect()
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn top_down(
    relation: &Relation,
    index: &SortedIndex,
    query: &Query,
    options: &TopDownOptions,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    top_down_logged(relation, index, query, options, sink).map(|(r, _)| r)
}

/// As [`top_down`], also returning the query log when `record_queries` is set.
pub fn top_down_logged(
    relation: &Relation,
    index: &SortedIndex,
    query: &Query,
    options: &TopDownOptions,
    sink: &mut dyn ProgressiveSink,
) -> Result<(SkylineResult, Vec<TopDownQuery>)> {
    check_index(relation, index)?;
    let lattice = Lattice::new(&query.cardinalities(relation))?;
    let mut run = Run::new(sink);
    let mut log = Vec::new();
    if relation.tuple_count() == 0 {
        return Ok((run.finish(), log));
    }
    // `empty[id]` records queried nodes; true means no tuple maps there.
    let mut empty: HashMap<LatticeNodeId, bool> = HashMap::new();
    let mut enqueued: HashSet<LatticeNodeId> = HashSet::new();
    let mut queue = VecDeque::new();
    let top = lattice.id(&lattice.top())?;
    queue.push_back(top);
    enqueued.insert(top);
    while let Some(node) = queue.pop_front() {
        let parents_empty = lattice
            .parents(node)?
            .iter()
            .all(|p| empty.get(p).copied().unwrap_or(false));
        if !parents_empty {
            continue;
        }
        let values = lattice.invid(node)?;
        let tuples = get_tuples(index, query, &values);
        run.metrics.lattice_nodes_queried += 1;
        let present = !tuples.is_empty();
        empty.insert(node, !present);
        if options.record_queries {
            log.push(TopDownQuery {
                id: node,
                values: values.clone(),
                present,
            });
        }
        if present {
            run.metrics.tuples_accessed += tuples.len() as u64;
            for t in &tuples {
                run.emit(t.id, &t.values);
            }
            continue;
        }
        for child in lattice.children(node)? {
            if enqueued.insert(child) {
                queue.push_back(child);
            }
        }
        if enqueued.len() + empty.len() > options.cap {
            let message = format!(
                "lattice traversal tracked more than {} node ids after querying {} nodes",
                options.cap, run.metrics.lattice_nodes_queried
            );
            let metrics = run.finish().metrics;
            return Err(Error::ResourceCap {
                message,
                metrics: Some(Box::new(metrics)),
            });
        }
    }
    Ok((run.finish(), log))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::table3;
    use super::super::NullSink;
    use super::*;
    use crate::index::TiePolicy;
    use crate::model::brute_force_skyline;

    #[test]
    fn table3_six_queries() {
        let rel = table3();
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        let q = Query::new(vec![0, 1, 2, 3], &rel).unwrap();
        let opts = TopDownOptions {
            record_queries: true,
            ..Default::default()
        };
        let (r, log) = top_down_logged(&rel, &idx, &q, &opts, &mut NullSink).unwrap();
        assert_eq!(r.ids, vec![0, 4, 5]);
        assert_eq!(r.metrics.lattice_nodes_queried, 6);
        assert_eq!(log.len(), 6);
        assert_eq!(log.iter().filter(|e| e.present).count(), 3);
    }

    #[test]
    fn get_tuples_examples() {
        let rel = table3();
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        let q = Query::new(vec![0, 1, 2, 3], &rel).unwrap();
        let hit = get_tuples(&idx, &q, &[1, 1, 1, 0]);
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].id, 5);
        assert_eq!(hit[0].values, vec![1, 1, 1, 0]);
        assert!(get_tuples(&idx, &q, &[1, 1, 1, 1]).is_empty());
    }

    #[test]
    fn top_node_present_needs_one_query() {
        let rel = Relation::from_rows(&[3, 3], vec![vec![2, 2], vec![0, 1], vec![2, 2]]).unwrap();
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        let q = Query::all(&rel).unwrap();
        let r = top_down(&rel, &idx, &q, &TopDownOptions::default(), &mut NullSink).unwrap();
        assert_eq!(r.ids, vec![0, 2]);
        assert_eq!(r.metrics.lattice_nodes_queried, 1);
    }

    #[test]
    fn cap_aborts_with_partial_metrics() {
        let rel = Relation::from_rows(&[4; 6], vec![vec![0; 6]]).unwrap();
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        let q = Query::all(&rel).unwrap();
        let opts = TopDownOptions {
            cap: 50,
            record_queries: false,
        };
        match top_down(&rel, &idx, &q, &opts, &mut NullSink) {
            Err(Error::ResourceCap {
                metrics: Some(m), ..
            }) => {
                assert!(m.lattice_nodes_queried > 0)
            }
            other => panic!("expected resource cap, got {other:?}"),
        }
    }

    #[test]
    fn queried_nodes_have_only_empty_parents() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rows: Vec<Vec<u16>> = (0..60)
                .map(|_| (0..4).map(|_| rng.random_range(0..3)).collect())
                .collect();
            let rel = Relation::from_rows(&[3; 4], rows).unwrap();
            let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
            let q = Query::all(&rel).unwrap();
            let opts = TopDownOptions {
                record_queries: true,
                ..Default::default()
            };
            let (r, log) = top_down_logged(&rel, &idx, &q, &opts, &mut NullSink).unwrap();
            assert_eq!(r.ids, brute_force_skyline(&rel, &q));
            let lattice = Lattice::new(&[3; 4]).unwrap();
            let seen: HashMap<u64, bool> = log.iter().map(|e| (e.id, e.present)).collect();
            for e in &log {
                for p in lattice.parents(e.id).unwrap() {
                    assert_eq!(seen.get(&p), Some(&false), "parent {p} of {}", e.id);
                }
            }
        }
    }
}
