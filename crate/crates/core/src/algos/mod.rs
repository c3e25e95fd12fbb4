//! Subspace skyline algorithms.
//!
//! Every algorithm returns the skyline as ascending tuple ids together with
//! [`RunMetrics`], and reports each skyline member to a [`ProgressiveSink`]
//! as soon as it is known to be final.

mod baseline;
pub mod lattice;
mod st_p;
mod st_s;
mod ta_sky;
mod top_down;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::SortedIndex;
use crate::model::{ProjectedTuple, Query, Relation, Scorer, TupleId, Value};
use crate::tree::DominanceTree;

pub use baseline::baseline_project_skyline;
pub use lattice::{Lattice, LatticeNodeId};
pub use st_p::{select_pivot, st_p, st_p_tuples, StpOptions, DEFAULT_PIVOT_SEED};
pub use st_s::{list_candidate_variant, st_s, st_s_seeded, st_s_traced, StopTrace};
pub use ta_sky::{ta_sky, CandidateSelection, TaSkyOptions};
pub use top_down::{
    get_tuples, top_down, top_down_logged, TopDownOptions, TopDownQuery, DEFAULT_LATTICE_CAP,
};

/// One progressive emission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Emission {
    pub id: TupleId,
    /// Distinct tuples the run had touched when `id` was emitted.
    pub tuples_accessed: u64,
    pub elapsed_ns: u64,
}

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct RunMetrics {
    /// Tree operations (IS-DOMINATED and PRUNE calls) or, for list-backed
    /// candidate sets, pairwise tuple comparisons.
    pub dominance_tests: u64,
    /// Tree nodes entered.
    pub node_visits: u64,
    /// Selected child slots that held no subtree.
    pub empty_links: u64,
    pub sorted_accesses: u64,
    pub random_accesses: u64,
    pub tuples_accessed: u64,
    pub lattice_nodes_queried: u64,
    /// Rounds of parallel sorted access (TA-SKY only).
    pub iterations: u64,
    pub skyline_size: u64,
    pub progressive_log: Vec<Emission>,
}

impl RunMetrics {
    /// Copy with every timing field zeroed, for byte-level comparisons.
    pub fn without_timing(&self) -> RunMetrics {
        let mut m = self.clone();
        for e in &mut m.progressive_log {
            e.elapsed_ns = 0;
        }
        m
    }

    fn add_tree(&mut self, tree: &DominanceTree) {
        let v = tree.visits();
        self.node_visits += v.nodes;
        self.empty_links += v.empty_links;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkylineResult {
    /// Skyline tuple ids, ascending.
    pub ids: Vec<TupleId>,
    pub metrics: RunMetrics,
}

/// Receives skyline members as they become final.
pub trait ProgressiveSink {
    fn emit(&mut self, id: TupleId, values: &[Value], metrics: &RunMetrics);
}

impl<F: FnMut(TupleId, &[Value], &RunMetrics)> ProgressiveSink for F {
    fn emit(&mut self, id: TupleId, values: &[Value], metrics: &RunMetrics) {
        self(id, values, metrics)
    }
}

/// Discards emissions.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl ProgressiveSink for NullSink {
    fn emit(&mut self, _: TupleId, _: &[Value], _: &RunMetrics) {}
}

/// Records emitted ids in order.
#[derive(Debug, Default, Clone)]
pub struct RecordingSink {
    pub emitted: Vec<TupleId>,
}

impl ProgressiveSink for RecordingSink {
    fn emit(&mut self, id: TupleId, _: &[Value], _: &RunMetrics) {
        self.emitted.push(id);
    }
}

/// Per-run bookkeeping shared by all algorithms.
pub(crate) struct Run<'s> {
    pub metrics: RunMetrics,
    start: Instant,
    sink: &'s mut dyn ProgressiveSink,
    ids: Vec<TupleId>,
}

impl<'s> Run<'s> {
    pub fn new(sink: &'s mut dyn ProgressiveSink) -> Self {
        Self {
            metrics: RunMetrics::default(),
            start: Instant::now(),
            sink,
            ids: Vec::new(),
        }
    }

    pub fn emit(&mut self, id: TupleId, values: &[Value]) {
        self.metrics.skyline_size += 1;
        self.metrics.progressive_log.push(Emission {
            id,
            tuples_accessed: self.metrics.tuples_accessed,
            elapsed_ns: self.start.elapsed().as_nanos() as u64,
        });
        self.ids.push(id);
        self.sink.emit(id, values, &self.metrics);
    }

    pub fn finish(self) -> SkylineResult {
        let mut ids = self.ids;
        ids.sort_unstable();
        SkylineResult {
            ids,
            metrics: self.metrics,
        }
    }
}

/// Sort key for ST-S: max coordinate, coordinate sum, score (all
/// descending), then id ascending. Score keeps equal combinations adjacent.
pub(crate) fn sort_max_c(tuples: &mut [ProjectedTuple], scorer: &Scorer) {
    tuples.sort_by_cached_key(|t| {
        let max = t.values.iter().copied().max().unwrap_or(0);
        let sum: u64 = t.values.iter().map(|&v| v as u64).sum();
        (
            std::cmp::Reverse(max),
            std::cmp::Reverse(sum),
            std::cmp::Reverse(scorer.score(&t.values)),
            t.id,
        )
    });
}

/// The six skyline paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    StS,
    StP,
    TopDown,
    TaSky,
    Baseline,
    ListVariant,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::StS,
        Algorithm::StP,
        Algorithm::TopDown,
        Algorithm::TaSky,
        Algorithm::Baseline,
        Algorithm::ListVariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::StS => "st-s",
            Algorithm::StP => "st-p",
            Algorithm::TopDown => "top-down",
            Algorithm::TaSky => "ta-sky",
            Algorithm::Baseline => "baseline",
            Algorithm::ListVariant => "list",
        }
    }

    /// Whether the algorithm reads the sorted index.
    pub fn uses_index(self) -> bool {
        matches!(
            self,
            Algorithm::TopDown | Algorithm::TaSky | Algorithm::Baseline
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown algorithm {s:?} (expected st-s, st-p, top-down, ta-sky, baseline or list)"
                ))
            })
    }
}

/// Tunables for [`run`]; each algorithm reads only its own fields.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub st_p: StpOptions,
    pub top_down: TopDownOptions,
    pub ta_sky: TaSkyOptions,
}

/// Runs `algorithm`. Index-based algorithms require `index`.
pub fn run(
    algorithm: Algorithm,
    relation: &Relation,
    index: Option<&SortedIndex>,
    query: &Query,
    options: &RunOptions,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    let need_index =
        || index.ok_or_else(|| Error::invalid(format!("{algorithm} requires a sorted index")));
    match algorithm {
        Algorithm::StS => st_s(relation, query, sink),
        Algorithm::StP => st_p(relation, query, &options.st_p, sink),
        Algorithm::TopDown => top_down(relation, need_index()?, query, &options.top_down, sink),
        Algorithm::TaSky => ta_sky(relation, need_index()?, query, &options.ta_sky, sink),
        Algorithm::Baseline => baseline_project_skyline(relation, need_index()?, query, sink),
        Algorithm::ListVariant => list_candidate_variant(relation, query, sink),
    }
}

pub(crate) fn check_index(relation: &Relation, index: &SortedIndex) -> Result<()> {
    if index.tuple_count() != relation.tuple_count()
        || index.attribute_count() != relation.attribute_count()
    {
        return Err(Error::invalid(format!(
            "index covers {}x{} but the relation is {}x{}",
            index.tuple_count(),
            index.attribute_count(),
            relation.tuple_count(),
            relation.attribute_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::Relation;

    pub fn table2() -> Relation {
        Relation::from_rows(
            &[2; 4],
            vec![
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1],
                vec![0, 1, 1, 0],
                vec![1, 0, 0, 1],
                vec![1, 0, 1, 0],
            ],
        )
        .unwrap()
    }

    pub fn table3() -> Relation {
        Relation::from_rows(
            &[2; 5],
            vec![
                vec![0, 1, 0, 1, 1],
                vec![0, 0, 1, 1, 0],
                vec![0, 0, 1, 0, 1],
                vec![0, 0, 0, 1, 1],
                vec![1, 0, 1, 1, 1],
                vec![1, 1, 1, 0, 0],
            ],
        )
        .unwrap()
    }
}
