use anyhow::Result;
use serde::Serialize;
use subsky::cost::{
    expected_discovered, expected_is_dominated_cost, expected_prune_cost,
    expected_ta_sky_sorted_accesses, expected_top_down_cost, simulate_discovered,
    simulate_list_is_dominated, simulate_ta_sky, simulate_top_down, simulate_tree_costs, Estimate,
    IidModel, ProbeAverage, TreeOp,
};

use crate::args::{CostArgs, Formula};
use crate::common::{open_output, parse_range, usage};

/// Sampled probes when the probe space is too large to enumerate.
const DEFAULT_PROBES: usize = 1000;

/// One table row. `p` is a single value for uniform models and a
/// `;`-separated list otherwise. `x` is the swept variable: `s` for the tree and list
/// formulas, the round `i` for discovery, `n` for TA-SKY and `m` for
/// TOP-DOWN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub formula: &'static str,
    pub m: usize,
    pub p: String,
    pub n: usize,
    pub x: usize,
    pub analytical: f64,
    pub simulated: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: usize,
}

fn formula_name(f: Formula) -> &'static str {
    match f {
        Formula::IsDominated => "is-dominated",
        Formula::Prune => "prune",
        Formula::ListIsDominated => "list-is-dominated",
        Formula::ListPrune => "list-prune",
        Formula::Discovered => "discovered",
        Formula::TaSky => "ta-sky",
        Formula::TopDown => "top-down",
    }
}

fn model(args: &CostArgs, m: usize, n: usize) -> Result<IidModel> {
    let p = match args.p.as_slice() {
        [one] => vec![*one; m],
        many if many.len() >= m => many[..m].to_vec(),
        many => {
            return Err(usage(format!(
                "{} probabilities for {m} attributes",
                many.len()
            )))
        }
    };
    Ok(IidModel::new(p, n)?)
}

pub fn table(args: &CostArgs) -> Result<Vec<CostRow>> {
    let xs = parse_range(&args.range)?;
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let (m, n) = match args.formula {
            Formula::TaSky => (args.m, x),
            Formula::TopDown => (x, args.n),
            _ => (args.m, args.n),
        };
        let model = model(args, m, n)?;
        let seed = args.seed.wrapping_add(x as u64);
        let trials = args.trials;
        let sim = |f: &dyn Fn() -> subsky::Result<Estimate>| -> Result<Option<Estimate>> {
            Ok(if trials == 0 { None } else { Some(f()?) })
        };
        let (analytical, est) = match args.formula {
            Formula::IsDominated => {
                let avg = match args.probes {
                    0 if m <= 16 => ProbeAverage::Exact,
                    0 => ProbeAverage::Sampled {
                        probes: DEFAULT_PROBES,
                        seed,
                    },
                    probes => ProbeAverage::Sampled { probes, seed },
                };
                (
                    expected_is_dominated_cost(&model, x, avg)?,
                    sim(&|| {
                        simulate_tree_costs(&model, x, TreeOp::IsDominated, false, trials, seed)
                    })?,
                )
            }
            Formula::Prune => (
                expected_prune_cost(&model, x)?,
                sim(&|| simulate_tree_costs(&model, x, TreeOp::Prune, false, trials, seed))?,
            ),
            Formula::ListIsDominated => (
                (x * m) as f64 / 2.0,
                sim(&|| simulate_list_is_dominated(&model, x, trials, seed))?,
            ),
            Formula::ListPrune => ((x * m) as f64, None),
            Formula::Discovered => (
                expected_discovered(&model, x)?,
                sim(&|| simulate_discovered(&model, x, trials, seed))?,
            ),
            Formula::TaSky => (
                expected_ta_sky_sorted_accesses(&model)?,
                sim(&|| simulate_ta_sky(&model, trials, seed))?,
            ),
            Formula::TopDown => (
                expected_top_down_cost(&model, args.k)?,
                sim(&|| simulate_top_down(&model, args.k, trials, seed))?,
            ),
        };
        rows.push(CostRow {
            formula: formula_name(args.formula),
            m,
            p: if model.is_uniform() {
                model.p()[0].to_string()
            } else {
                model
                    .p()
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(";")
            },
            n,
            x,
            analytical,
            simulated: est.map(|e| e.mean),
            stderr: est.map(|e| e.stderr),
            trials: est.map_or(0, |e| e.trials),
        });
    }
    Ok(rows)
}

pub fn run(args: &CostArgs) -> Result<()> {
    let rows = table(args)?;
    let mut w = csv::Writer::from_writer(open_output(&args.out)?);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
