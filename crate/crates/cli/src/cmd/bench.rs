use std::time::Instant;

use anyhow::{Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use subsky::algos::{run as run_algorithm, Algorithm, NullSink, RunOptions, TopDownOptions};
use subsky::{brute_force_skyline, Query, Relation, SortedIndex, TiePolicy};

use crate::args::{Axis, BenchArgs};
use crate::common::{load_dataset, load_index, open_output, usage};
use crate::VerifyMismatch;

/// One result row. Counter columns are means over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub axis: &'static str,
    pub value: usize,
    pub algorithm: String,
    pub reps: usize,
    pub mean_ns: f64,
    pub stddev_ns: f64,
    pub dominance_tests: f64,
    pub node_visits: f64,
    pub empty_links: f64,
    pub sorted_accesses: f64,
    pub random_accesses: f64,
    pub tuples_accessed: f64,
    pub lattice_nodes_queried: f64,
    pub iterations: f64,
    pub skyline_size: f64,
    /// `true`/`false` with `--verify`, empty otherwise.
    pub verified: String,
    /// Failure message of an aborted cell.
    pub error: String,
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::M => "m",
        Axis::N => "n",
        Axis::C => "c",
    }
}

/// The relation and index a sweep value runs against.
struct Setting<'a> {
    relation: std::borrow::Cow<'a, Relation>,
    index: std::borrow::Cow<'a, SortedIndex>,
}

/// Query attributes for one repetition.
///
/// On the m axis every value takes a prefix of one seeded permutation per
/// repetition, so larger queries extend smaller ones. On the n axis the
/// query depends on the repetition only. On the c axis the attributes are
/// drawn from those of cardinality `value`.
fn pick_query(
    relation: &Relation,
    axis: Axis,
    value: usize,
    m: usize,
    rep: usize,
    seed: u64,
) -> Result<Query, String> {
    let mut key = seed ^ (rep as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let (pool, k): (Vec<usize>, usize) = match axis {
        Axis::M => ((0..relation.attribute_count()).collect(), value),
        Axis::N => ((0..relation.attribute_count()).collect(), m),
        Axis::C => {
            key ^= (value as u64).rotate_left(32);
            (
                (0..relation.attribute_count())
                    .filter(|&a| relation.domains()[a].cardinality() as usize == value)
                    .collect(),
                m,
            )
        }
    };
    if k == 0 || k > pool.len() {
        return Err(format!("need {k} attributes, {} eligible", pool.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let mut order = pool;
    order.shuffle(&mut rng);
    let mut attrs = order[..k].to_vec();
    attrs.sort_unstable();
    Query::new(attrs, relation).map_err(|e| e.to_string())
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn run_cell(
    args: &BenchArgs,
    setting: &Setting<'_>,
    value: usize,
    algo: &str,
    options: &RunOptions,
) -> BenchRow {
    let mut row = BenchRow {
        axis: axis_name(args.axis),
        value,
        algorithm: algo.to_owned(),
        reps: args.reps,
        mean_ns: 0.0,
        stddev_ns: 0.0,
        dominance_tests: 0.0,
        node_visits: 0.0,
        empty_links: 0.0,
        sorted_accesses: 0.0,
        random_accesses: 0.0,
        tuples_accessed: 0.0,
        lattice_nodes_queried: 0.0,
        iterations: 0.0,
        skyline_size: 0.0,
        verified: String::new(),
        error: String::new(),
    };
    let algorithm: Algorithm = match algo.parse() {
        Ok(a) => a,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let mut times = Vec::with_capacity(args.reps);
    let mut verified = true;
    for rep in 0..args.reps {
        let q = match pick_query(&setting.relation, args.axis, value, args.m, rep, args.seed) {
            Ok(q) => q,
            Err(e) => {
                row.error = e;
                return row;
            }
        };
        let start = Instant::now();
        let r = run_algorithm(
            algorithm,
            &setting.relation,
            Some(&setting.index),
            &q,
            options,
            &mut NullSink,
        );
        times.push(start.elapsed().as_nanos() as f64);
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                row.error = e.to_string();
                return row;
            }
        };
        let m = &r.metrics;
        row.dominance_tests += m.dominance_tests as f64;
        row.node_visits += m.node_visits as f64;
        row.empty_links += m.empty_links as f64;
        row.sorted_accesses += m.sorted_accesses as f64;
        row.random_accesses += m.random_accesses as f64;
        row.tuples_accessed += m.tuples_accessed as f64;
        row.lattice_nodes_queried += m.lattice_nodes_queried as f64;
        row.iterations += m.iterations as f64;
        row.skyline_size += m.skyline_size as f64;
        if args.verify {
            verified &= brute_force_skyline(&setting.relation, &q).len() as u64 == m.skyline_size;
        }
    }
    let reps = args.reps as f64;
    for x in [
        &mut row.dominance_tests,
        &mut row.node_visits,
        &mut row.empty_links,
        &mut row.sorted_accesses,
        &mut row.random_accesses,
        &mut row.tuples_accessed,
        &mut row.lattice_nodes_queried,
        &mut row.iterations,
        &mut row.skyline_size,
    ] {
        *x /= reps;
    }
    (row.mean_ns, row.stddev_ns) = mean_sd(&times);
    if args.verify {
        row.verified = verified.to_string();
    }
    row
}

/// Runs the sweep and returns rows ordered by axis value, then by the order
/// of `--algos`.
pub fn sweep(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    if args.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    if args.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("--values must be strictly increasing"));
    }
    let ds = load_dataset(&args.data)?;
    let rel = &ds.relation;
    let index = match &args.index {
        Some(path) => load_index(path, rel)?,
        None => SortedIndex::build(rel, TiePolicy::IdAsc),
    };
    let mut options = RunOptions::default();
    if let Some(cap) = args.cap {
        options.top_down = TopDownOptions {
            cap,
            ..TopDownOptions::default()
        };
    }
    let settings: Vec<Setting<'_>> = args
        .values
        .iter()
        .map(|&v| match args.axis {
            Axis::N if v != rel.tuple_count() => {
                if v > rel.tuple_count() {
                    return Err(usage(format!(
                        "n = {v} exceeds the dataset's {} tuples",
                        rel.tuple_count()
                    )));
                }
                let prefix = rel.prefix(v);
                let idx = SortedIndex::build(&prefix, index.tie_policy());
                Ok(Setting {
                    relation: std::borrow::Cow::Owned(prefix),
                    index: std::borrow::Cow::Owned(idx),
                })
            }
            _ => Ok(Setting {
                relation: std::borrow::Cow::Borrowed(rel),
                index: std::borrow::Cow::Borrowed(&index),
            }),
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, &str)> = (0..args.values.len())
        .flat_map(|i| args.algos.iter().map(move |a| (i, a.as_str())))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("starting worker pool")?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, algo)| run_cell(args, &settings[i], args.values[i], algo, &options))
            .collect()
    }))
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let rows = sweep(args)?;
    let mut w = csv::Writer::from_writer(open_output(&args.out)?);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    for row in &rows {
        if !row.error.is_empty() {
            log::warn!(
                "{}={} {}: {}",
                row.axis,
                row.value,
                row.algorithm,
                row.error
            );
        }
    }
    if let Some(bad) = rows.iter().find(|r| r.verified == "false") {
        return Err(VerifyMismatch(format!(
            "{} at {}={} disagrees with brute force",
            bad.algorithm, bad.axis, bad.value
        ))
        .into());
    }
    Ok(())
}
