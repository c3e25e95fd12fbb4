//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subsky::algos::{
    run, ta_sky, top_down, Algorithm, CandidateSelection, NullSink, RecordingSink, RunOptions,
    TaSkyOptions, TopDownOptions,
};
use subsky::cost::{
    expected_discovered, expected_is_dominated_cost, expected_prune_cost,
    expected_ta_sky_sorted_accesses, expected_top_down_cost, simulate_discovered, simulate_ta_sky,
    simulate_top_down, simulate_tree_costs, IidModel, ProbeAverage, TreeOp,
};
use subsky::datagen::{generate_zipf, read_csv, write_csv, ZipfSpec};
use subsky::{
    brute_force_skyline, DominanceTree, Query, Relation, Scorer, SortedIndex, TiePolicy, Value,
};
use subsky_cli::args::{Axis, BenchArgs};
use subsky_cli::cmd::bench::sweep;

/// Result of one criterion. `fingerprint` holds every non-timing output so
/// repeated runs can be compared byte for byte.
struct Outcome {
    pass: bool,
    detail: String,
    fingerprint: String,
}

fn check(ok: bool, failures: &mut Vec<String>, what: impl Into<String>) {
    if !ok {
        failures.push(what.into());
    }
}

fn outcome(failures: Vec<String>, summary: String, fingerprint: String) -> Outcome {
    let pass = failures.is_empty();
    let detail = if pass {
        summary
    } else {
        format!("{summary}; failed: {}", failures.join("; "))
    };
    Outcome {
        pass,
        detail,
        fingerprint,
    }
}

fn five_tuples() -> Vec<Vec<Value>> {
    vec![
        vec![1, 1, 0, 0],
        vec![0, 0, 1, 1],
        vec![0, 1, 1, 0],
        vec![1, 0, 0, 1],
        vec![1, 0, 1, 0],
    ]
}

fn six_tuples() -> Relation {
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

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn golden_examples() -> Outcome {
    let mut fail = Vec::new();
    let mut fp = String::new();

    let scorer = Scorer::new(&[2; 4]).unwrap();
    let scores: Vec<u128> = five_tuples().iter().map(|t| scorer.score(t)).collect();
    check(
        scores == [12, 3, 6, 9, 10],
        &mut fail,
        format!("scores {scores:?}"),
    );
    writeln!(fp, "scores {scores:?}").unwrap();

    let build = || {
        let mut tree = DominanceTree::new(&[2; 4]).unwrap();
        for (i, t) in five_tuples().iter().enumerate() {
            tree.insert(i as u32 + 1, t);
        }
        tree
    };
    let mut tree = build();
    let mut removed = tree.prune_dominated_ids(&[1, 0, 1, 1]);
    removed.sort_unstable();
    check(
        removed == [2, 4, 5],
        &mut fail,
        format!("prune removed {removed:?}"),
    );
    writeln!(fp, "pruned {removed:?}").unwrap();
    let dominated = build().is_dominated(&[0, 0, 1, 0]);
    check(dominated, &mut fail, "probe <0,0,1,0> not dominated");
    writeln!(fp, "probe {dominated}").unwrap();

    let rel = six_tuples();
    let q = Query::new(vec![0, 1, 2, 3], &rel).unwrap();
    let want = vec![0u32, 4, 5];
    check(
        brute_force_skyline(&rel, &q) == want,
        &mut fail,
        "brute force on the six-tuple fixture",
    );
    for tie in [TiePolicy::IdAsc, TiePolicy::RestSumDesc] {
        let idx = SortedIndex::build(&rel, tie);
        for algo in Algorithm::ALL {
            let r = run(
                algo,
                &rel,
                Some(&idx),
                &q,
                &RunOptions::default(),
                &mut NullSink,
            )
            .unwrap();
            check(
                r.ids == want,
                &mut fail,
                format!("{algo} ({tie}) gave {:?}", r.ids),
            );
            writeln!(fp, "{algo} {tie} {:?}", r.metrics.without_timing()).unwrap();
        }
    }

    let full = TaSkyOptions {
        selection: CandidateSelection::Full,
        infer_floor: false,
    };
    let by_id = ta_sky(
        &rel,
        &SortedIndex::build(&rel, TiePolicy::IdAsc),
        &q,
        &full,
        &mut NullSink,
    )
    .unwrap();
    let by_rest = ta_sky(
        &rel,
        &SortedIndex::build(&rel, TiePolicy::RestSumDesc),
        &q,
        &full,
        &mut NullSink,
    )
    .unwrap();
    let (it1, ra1, ra2) = (
        by_id.metrics.iterations,
        by_id.metrics.random_accesses,
        by_rest.metrics.random_accesses,
    );
    check(
        it1 == 3 && ra1 == 12,
        &mut fail,
        format!("id-order ties: {it1} rounds, {ra1} random accesses"),
    );
    check(
        ra2 == 4,
        &mut fail,
        format!("rest-sum ties: {ra2} random accesses"),
    );
    check(
        by_id.ids == want && by_rest.ids == want,
        &mut fail,
        "ta-sky skyline under both tie orders",
    );
    writeln!(
        fp,
        "id-order {it1} {ra1} rest-sum {} {ra2}",
        by_rest.metrics.iterations
    )
    .unwrap();

    let td = top_down(
        &rel,
        &SortedIndex::build(&rel, TiePolicy::IdAsc),
        &q,
        &TopDownOptions::default(),
        &mut NullSink,
    )
    .unwrap();
    let nodes = td.metrics.lattice_nodes_queried;
    check(
        nodes == 6,
        &mut fail,
        format!("top-down queried {nodes} nodes"),
    );
    writeln!(fp, "top-down {nodes}").unwrap();

    let hosts = read_csv(&data_dir().join("hosts.csv")).unwrap();
    let hq = Query::all(&hosts.relation).unwrap();
    let names: Vec<String> = brute_force_skyline(&hosts.relation, &hq)
        .iter()
        .map(|&i| hosts.row_labels[i as usize].clone())
        .collect();
    check(
        names == ["Host 1", "Host 2"],
        &mut fail,
        format!("hosts skyline {names:?}"),
    );
    writeln!(fp, "hosts {names:?}").unwrap();

    let summary = format!(
        "scores {scores:?}, pruned {removed:?}, id-order ties {it1} rounds/{ra1} RA, rest-sum ties {ra2} RA, top-down {nodes} nodes, hosts {names:?}"
    );
    outcome(fail, summary, fp)
}

/// The seeded instances shared by the oracle and progressiveness checks.
fn random_instances() -> Vec<(Relation, Query, SortedIndex)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    (0..500)
        .map(|k| {
            let n = rng.random_range(1..=200);
            let m_q = rng.random_range(1..=8);
            let m = m_q + rng.random_range(0..=2);
            let cards: Vec<u16> = (0..m).map(|_| rng.random_range(2..=6)).collect();
            let rel = if k % 2 == 0 {
                let spec = ZipfSpec::with_auto_z(n, &cards, rng.random());
                generate_zipf(&spec).unwrap()
            } else {
                let rows = (0..n)
                    .map(|_| cards.iter().map(|&c| rng.random_range(0..c)).collect())
                    .collect();
                Relation::from_rows(&cards, rows).unwrap()
            };
            let mut attrs: Vec<usize> = (0..m).collect();
            attrs.shuffle(&mut rng);
            attrs.truncate(m_q);
            let q = Query::new(attrs, &rel).unwrap();
            let tie = match k % 3 {
                0 => TiePolicy::IdAsc,
                1 => TiePolicy::RestSumDesc,
                _ => TiePolicy::Random(rng.random()),
            };
            let idx = SortedIndex::build(&rel, tie);
            (rel, q, idx)
        })
        .collect()
}

fn oracle_equivalence(instances: &[(Relation, Query, SortedIndex)]) -> Outcome {
    let mut fail = Vec::new();
    let mut fp = String::new();
    let mut mismatches = 0;
    for (k, (rel, q, idx)) in instances.iter().enumerate() {
        let want = brute_force_skyline(rel, q);
        for algo in Algorithm::ALL {
            let r = run(
                algo,
                rel,
                Some(idx),
                q,
                &RunOptions::default(),
                &mut NullSink,
            )
            .unwrap();
            if r.ids != want {
                mismatches += 1;
                if fail.len() < 5 {
                    fail.push(format!("instance {k}: {algo}"));
                }
            }
            writeln!(
                fp,
                "{k} {algo} {:?} {:?}",
                r.ids,
                r.metrics.without_timing()
            )
            .unwrap();
        }
    }
    let summary = format!(
        "{} instances x {} algorithms, {mismatches} mismatches",
        instances.len(),
        Algorithm::ALL.len()
    );
    outcome(fail, summary, fp)
}

fn progressiveness(instances: &[(Relation, Query, SortedIndex)]) -> Outcome {
    let mut fail = Vec::new();
    let mut fp = String::new();
    let mut emissions = 0;
    for (k, (rel, q, idx)) in instances.iter().enumerate() {
        let want = brute_force_skyline(rel, q);
        let mut sink = RecordingSink::default();
        let r = ta_sky(rel, idx, q, &TaSkyOptions::default(), &mut sink).unwrap();
        emissions += sink.emitted.len();
        let mut sorted = sink.emitted.clone();
        sorted.sort_unstable();
        let unique = sorted.windows(2).all(|w| w[0] != w[1]);
        let members = sink.emitted.iter().all(|id| want.binary_search(id).is_ok());
        let kept = sink
            .emitted
            .iter()
            .all(|id| r.ids.binary_search(id).is_ok());
        if !(unique && members && kept && sorted == want) && fail.len() < 5 {
            fail.push(format!("instance {k}"));
        }
        writeln!(fp, "{k} {:?}", sink.emitted).unwrap();
    }
    let summary = format!(
        "{emissions} emissions over {} instances, all final",
        instances.len()
    );
    outcome(fail, summary, fp)
}

fn within(analytical: f64, simulated: f64, tol: f64) -> (bool, f64) {
    let rel = (analytical - simulated).abs() / simulated;
    (rel <= tol, rel)
}

fn cost_calibration() -> Outcome {
    let mut fail = Vec::new();
    let mut fp = String::new();
    let mut parts = Vec::new();

    let mut worst = [0.0f64; 2];
    for p in [0.3, 0.5, 0.7] {
        let model = IidModel::uniform(20, p, 0).unwrap();
        for s in [16usize, 64, 256] {
            let seed = (p * 1000.0) as u64 * 1000 + s as u64;
            let avg = ProbeAverage::Sampled { probes: 2000, seed };
            let rows = [
                (
                    "is-dominated",
                    expected_is_dominated_cost(&model, s, avg).unwrap(),
                    simulate_tree_costs(&model, s, TreeOp::IsDominated, false, 10_000, seed)
                        .unwrap(),
                ),
                (
                    "prune",
                    expected_prune_cost(&model, s).unwrap(),
                    simulate_tree_costs(&model, s, TreeOp::Prune, false, 10_000, seed + 1).unwrap(),
                ),
            ];
            for (slot, (name, a, e)) in rows.iter().enumerate() {
                let (ok, rel) = within(*a, e.mean, 0.10);
                worst[slot] = worst[slot].max(rel);
                check(
                    ok,
                    &mut fail,
                    format!("{name} p={p} s={s}: {a:.2} vs {:.2}", e.mean),
                );
                writeln!(fp, "{name} {p} {s} {a:?} {e:?}").unwrap();
            }
        }
    }
    parts.push(format!(
        "is-dominated worst {:.1}%, prune worst {:.1}% (band 10%)",
        100.0 * worst[0],
        100.0 * worst[1]
    ));

    let model = IidModel::uniform(4, 0.5, 50).unwrap();
    let mut worst = 0.0f64;
    for i in [5usize, 15, 30] {
        let a = expected_discovered(&model, i).unwrap();
        let e = simulate_discovered(&model, i, 20_000, 77 + i as u64).unwrap();
        let (ok, rel) = within(a, e.mean, 0.05);
        worst = worst.max(rel);
        check(
            ok,
            &mut fail,
            format!("discovered i={i}: {a:.3} vs {:.3}", e.mean),
        );
        writeln!(fp, "discovered {i} {a:?} {e:?}").unwrap();
    }
    parts.push(format!("discovery worst {:.1}% (band 5%)", 100.0 * worst));

    let model = IidModel::uniform(3, 0.5, 60).unwrap();
    let a = expected_ta_sky_sorted_accesses(&model).unwrap();
    let e = simulate_ta_sky(&model, 5000, 91).unwrap();
    let (ok, _) = within(a, e.mean, 0.15);
    check(
        ok,
        &mut fail,
        format!(
            "ta-sky sorted accesses {a:.2} vs simulated {:.2} ± {:.2}",
            e.mean, e.stderr
        ),
    );
    writeln!(fp, "ta-sky {a:?} {e:?}").unwrap();
    parts.push(format!(
        "ta-sky {a:.1} vs {:.1} ({:+.0}%, band 15%)",
        e.mean,
        100.0 * (a / e.mean - 1.0)
    ));

    let mut worst = 0.0f64;
    for m in 1..=4 {
        let model = IidModel::uniform(m, 0.5, 1000).unwrap();
        let a = expected_top_down_cost(&model, 1.0).unwrap();
        let e = simulate_top_down(&model, 1.0, 500, 300 + m as u64).unwrap();
        let (ok, rel) = within(a, e.mean, 0.20);
        worst = worst.max(rel);
        check(
            ok,
            &mut fail,
            format!("top-down m={m}: {a:.3} vs {:.3}", e.mean),
        );
        writeln!(fp, "top-down {m} {a:?} {e:?}").unwrap();
    }
    parts.push(format!("top-down worst {:.1}% (band 20%)", 100.0 * worst));

    outcome(fail, parts.join(", "), fp)
}

fn tree_vs_list() -> Outcome {
    let mut fail = Vec::new();
    let (m, s) = (20usize, 256usize);
    let model = IidModel::uniform(m, 0.5, 0).unwrap();
    let list = (s * m) as f64 / 2.0;
    let mut fp = String::new();
    let mut summary = Vec::new();
    for bounds in [true, false] {
        let e = simulate_tree_costs(&model, s, TreeOp::IsDominated, bounds, 1000, 4242).unwrap();
        let gap = (list - e.mean) / e.stderr;
        check(
            gap > 3.0,
            &mut fail,
            format!("bounds={bounds}: gap {gap:.1} SE"),
        );
        writeln!(fp, "{bounds} {e:?}").unwrap();
        summary.push(format!(
            "tree (bounds {}) {:.1} ± {:.2} vs list {list}, gap {gap:.0} SE",
            if bounds { "on" } else { "off" },
            e.mean,
            e.stderr
        ));
    }
    outcome(fail, summary.join("; "), fp)
}

fn early_stop() -> Outcome {
    let mut fail = Vec::new();
    let mut fp = String::new();
    let n = 100_000;
    let cards: Vec<u16> = [2, 4, 6].iter().copied().cycle().take(12).collect();
    let rel = generate_zipf(&ZipfSpec::with_auto_z(n, &cards, 606)).unwrap();
    let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
    let q = Query::new((0..6).collect(), &rel).unwrap();
    let r = ta_sky(&rel, &idx, &q, &TaSkyOptions::default(), &mut NullSink).unwrap();
    let (iters, accessed) = (r.metrics.iterations, r.metrics.tuples_accessed);
    check((iters as usize) < n, &mut fail, format!("{iters} rounds"));
    check(
        (accessed as usize) < n,
        &mut fail,
        format!("{accessed} tuples accessed"),
    );
    check(
        r.ids == brute_force_skyline(&rel, &q),
        &mut fail,
        "skyline differs from brute force",
    );
    writeln!(fp, "{:?}", r.metrics.without_timing()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("zipf.csv");
    write_csv(&rel, &data).unwrap();
    let args = BenchArgs {
        data,
        index: None,
        axis: Axis::M,
        values: vec![4, 6, 8, 10],
        algos: vec!["ta-sky".into()],
        reps: 5,
        m: 6,
        seed: 606,
        out: "-".into(),
        jobs: 0,
        verify: false,
        cap: None,
    };
    let rows = sweep(&args).unwrap();
    let accessed_by_m: Vec<f64> = rows.iter().map(|r| r.tuples_accessed).collect();
    check(
        rows.iter().all(|r| r.error.is_empty()),
        &mut fail,
        "bench rows with errors",
    );
    check(
        accessed_by_m.windows(2).all(|w| w[0] <= w[1]),
        &mut fail,
        format!("tuples_accessed by m' {accessed_by_m:?}"),
    );
    let mut csv = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        let mut row = row.clone();
        row.mean_ns = 0.0;
        row.stddev_ns = 0.0;
        csv.serialize(row).unwrap();
    }
    fp.push_str(&String::from_utf8(csv.into_inner().unwrap()).unwrap());
    let summary = format!(
        "n={n}: {iters} rounds, {accessed} tuples accessed ({:.1}%); mean tuples_accessed for m' 4,6,8,10 = {accessed_by_m:?}",
        100.0 * accessed as f64 / n as f64
    );
    outcome(fail, summary, fp)
}

fn run_all() -> Vec<(&'static str, Outcome, f64)> {
    let timed = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        (name, o, start.elapsed().as_secs_f64())
    };
    let instances = random_instances();
    vec![
        timed("golden running examples", &golden_examples),
        timed("oracle equivalence", &|| oracle_equivalence(&instances)),
        timed("progressiveness", &|| progressiveness(&instances)),
        timed("cost-model calibration", &cost_calibration),
        timed("tree vs list", &tree_vs_list),
        timed("early stop", &early_stop),
    ]
}

fn main() {
    let first = run_all();
    let mut all_pass = true;
    for (k, (name, o, secs)) in first.iter().enumerate() {
        all_pass &= o.pass;
        println!(
            "criterion {} [{name}]: {} ({secs:.1}s) {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let start = Instant::now();
    let second = run_all();
    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .enumerate()
        .filter(|(_, (a, b))| a.1.fingerprint != b.1.fingerprint)
        .map(|(k, _)| (k + 1).to_string())
        .collect();
    let deterministic = differing.is_empty();
    all_pass &= deterministic;
    println!(
        "criterion 7 [determinism]: {} ({:.1}s) {}",
        if deterministic { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        if deterministic {
            "criteria 1-6 repeated with identical non-timing outputs".to_owned()
        } else {
            format!("outputs differ for criteria {}", differing.join(", "))
        }
    );
    if !all_pass {
        std::process::exit(1);
    }
}
