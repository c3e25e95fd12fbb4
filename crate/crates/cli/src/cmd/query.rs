use std::fs::File;
use std::io::{self, Write};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use subsky::algos::{
    run as run_algorithm, Algorithm, CandidateSelection, RunMetrics, RunOptions, StpOptions,
    TaSkyOptions, TopDownOptions,
};
use subsky::datagen::Dataset;
use subsky::{brute_force_skyline, Query, TupleId, Value};

use crate::args::{QueryArgs, TaMode};
use crate::common::{load_dataset, load_index, resolve_query, usage};
use crate::VerifyMismatch;

/// The metrics object: fixed keys, then every run counter.
#[derive(Debug, Serialize)]
pub struct MetricsReport<'a> {
    pub algorithm: &'a str,
    pub attributes: Vec<&'a str>,
    pub tuples: usize,
    pub wall_ns: u64,
    /// Set when the run was aborted by a resource cap.
    pub partial: bool,
    #[serde(flatten)]
    pub metrics: &'a RunMetrics,
}

pub fn options(args: &QueryArgs) -> RunOptions {
    let mut opts = RunOptions::default();
    if let Some(seed) = args.seed {
        opts.st_p = StpOptions { seed };
    }
    if let Some(cap) = args.cap {
        opts.top_down = TopDownOptions {
            cap,
            ..TopDownOptions::default()
        };
    }
    if args.ta_mode == TaMode::Full {
        opts.ta_sky = TaSkyOptions {
            selection: CandidateSelection::Full,
            infer_floor: false,
        };
    }
    opts
}

fn write_row(out: &mut impl Write, label: &str, values: &[Value], extra: &[u64]) -> io::Result<()> {
    write!(out, "{label}")?;
    for v in values {
        write!(out, ",{v}")?;
    }
    for x in extra {
        write!(out, ",{x}")?;
    }
    writeln!(out)
}

fn projected(ds: &Dataset, q: &Query, id: TupleId) -> Vec<Value> {
    let row = ds.relation.row(id);
    q.attrs().iter().map(|&a| row[a]).collect()
}

fn write_metrics(dest: &str, report: &MetricsReport<'_>) -> Result<()> {
    let json = serde_json::to_string(report)?;
    if dest == "-" {
        eprintln!("{json}");
    } else {
        let mut f = File::create(dest).with_context(|| format!("creating {dest}"))?;
        writeln!(f, "{json}")?;
    }
    Ok(())
}

pub fn run(args: &QueryArgs) -> Result<()> {
    let ds = load_dataset(&args.data)?;
    let q = resolve_query(&ds.relation, &args.attrs)?;
    let names: Vec<&str> = q
        .attrs()
        .iter()
        .map(|&a| ds.relation.names()[a].as_str())
        .collect();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let start = Instant::now();

    if args.algo == "brute" {
        let ids = brute_force_skyline(&ds.relation, &q);
        let wall_ns = start.elapsed().as_nanos() as u64;
        for &id in &ids {
            write_row(
                &mut out,
                &ds.row_labels[id as usize],
                &projected(&ds, &q, id),
                &[],
            )?;
        }
        out.flush()?;
        let metrics = RunMetrics {
            tuples_accessed: ds.relation.tuple_count() as u64,
            skyline_size: ids.len() as u64,
            ..RunMetrics::default()
        };
        return write_metrics(
            &args.metrics,
            &MetricsReport {
                algorithm: "brute",
                attributes: names,
                tuples: ds.relation.tuple_count(),
                wall_ns,
                partial: false,
                metrics: &metrics,
            },
        );
    }

    let algo: Algorithm = args.algo.parse()?;
    let index = match (&args.index, algo.uses_index()) {
        (Some(path), true) => Some(load_index(path, &ds.relation)?),
        (None, true) => return Err(usage(format!("--algo {algo} requires --index"))),
        (_, false) => None,
    };
    let opts = options(args);
    let mut io_err: Option<io::Error> = None;
    let result = if args.progressive {
        let mut sink = |id: TupleId, values: &[Value], m: &RunMetrics| {
            let elapsed = m.progressive_log.last().map_or(0, |e| e.elapsed_ns);
            if io_err.is_none() {
                let extra = [m.tuples_accessed, elapsed];
                if let Err(e) = write_row(&mut out, &ds.row_labels[id as usize], values, &extra)
                    .and_then(|()| out.flush())
                {
                    io_err = Some(e);
                }
            }
        };
        run_algorithm(algo, &ds.relation, index.as_ref(), &q, &opts, &mut sink)
    } else {
        run_algorithm(
            algo,
            &ds.relation,
            index.as_ref(),
            &q,
            &opts,
            &mut subsky::algos::NullSink,
        )
    };
    let wall_ns = start.elapsed().as_nanos() as u64;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    let report = |metrics: &RunMetrics, partial: bool| -> Result<()> {
        write_metrics(
            &args.metrics,
            &MetricsReport {
                algorithm: algo.name(),
                attributes: names.clone(),
                tuples: ds.relation.tuple_count(),
                wall_ns,
                partial,
                metrics,
            },
        )
    };
    let result = match result {
        Ok(r) => r,
        Err(subsky::Error::ResourceCap { message, metrics }) => {
            if let Some(m) = &metrics {
                report(m, true)?;
            }
            return Err(subsky::Error::ResourceCap { message, metrics }.into());
        }
        Err(e) => return Err(e.into()),
    };
    if !args.progressive {
        for &id in &result.ids {
            write_row(
                &mut out,
                &ds.row_labels[id as usize],
                &projected(&ds, &q, id),
                &[],
            )?;
        }
    }
    out.flush()?;
    report(&result.metrics, false)?;
    if args.verify {
        let want = brute_force_skyline(&ds.relation, &q);
        if want != result.ids {
            return Err(VerifyMismatch(format!(
                "{algo} returned {} tuples, brute force {}",
                result.ids.len(),
                want.len()
            ))
            .into());
        }
    }
    Ok(())
}
