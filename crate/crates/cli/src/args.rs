use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "subsky",
    version,
    about = "Subspace skyline queries over categorical data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Zipfian dataset as CSV plus metadata sidecar.
    Gen(GenArgs),
    /// Build the sorted-list index of a dataset.
    Index(IndexArgs),
    /// Run one skyline query.
    Query(QueryArgs),
    /// Sweep one experiment axis over several algorithms.
    Bench(BenchArgs),
    /// Tabulate analytical cost models against simulation.
    Cost(CostArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of tuples.
    #[arg(long)]
    pub n: usize,
    /// Comma-separated attributes: `c` (auto exponent), `c:z`, `Kxc` or
    /// `KxA-B` (K attributes, cardinality drawn from A..=B).
    #[arg(long)]
    pub attrs: String,
    #[arg(long, env = "SUBSKY_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; the sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Tie order: id-asc, rest-sum-desc or random:SEED.
    #[arg(long, default_value = "id-asc")]
    pub tie: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaMode {
    Threshold,
    Full,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Index file, required by top-down, ta-sky and baseline.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// st-s, st-p, top-down, ta-sky, baseline, list or brute.
    #[arg(long)]
    pub algo: String,
    /// Query attributes by header name, or by 0-based position. Defaults to
    /// every attribute.
    #[arg(long, value_delimiter = ',')]
    pub attrs: Vec<String>,
    /// Print each skyline tuple as soon as it is final, with the tuples
    /// accessed and nanoseconds elapsed at that point.
    #[arg(long)]
    pub progressive: bool,
    /// Metrics JSON destination; `-` for stderr.
    #[arg(long, default_value = "-")]
    pub metrics: String,
    /// Check the result against the brute-force skyline.
    #[arg(long)]
    pub verify: bool,
    /// Lattice id budget for top-down.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Candidate completion rule for ta-sky.
    #[arg(long, value_enum, default_value_t = TaMode::Threshold)]
    pub ta_mode: TaMode,
    /// Pivot sampling seed for st-p.
    #[arg(long, env = "SUBSKY_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// Query size.
    M,
    /// Relation size, as prefixes of the dataset.
    N,
    /// Cardinality of the queried attributes.
    C,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Index file; built in memory with id-asc ties when absent.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Strictly increasing axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ta-sky,st-s")]
    pub algos: Vec<String>,
    #[arg(long, default_value_t = 25)]
    pub reps: usize,
    /// Query size on the n and c axes.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, env = "SUBSKY_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Cross-check each skyline size against the brute-force oracle.
    #[arg(long)]
    pub verify: bool,
    /// Lattice id budget for top-down.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    /// IS-DOMINATED on the dominance tree.
    IsDominated,
    /// PRUNE-DOMINATED-TUPLES on the dominance tree.
    Prune,
    /// Dominance check against a flat list.
    ListIsDominated,
    /// Pruning a flat list.
    ListPrune,
    /// Tuples discovered by TA-SKY after `i` rounds; the range sweeps `i`.
    Discovered,
    /// TA-SKY sorted accesses.
    TaSky,
    /// TOP-DOWN cost; the range sweeps the query size.
    TopDown,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long, value_enum)]
    pub formula: Formula,
    /// Query size.
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    /// Probability of a 1: one value for all attributes or one per attribute.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub p: Vec<f64>,
    /// Relation size.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Swept values: `a..b` doubles from a to b, `a..b:step` is linear, or a
    /// comma list.
    #[arg(long = "s-range", alias = "range", default_value = "16..1024")]
    pub range: String,
    /// Monte-Carlo trials per row; 0 skips simulation.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Probes averaged by the IS-DOMINATED evaluator. 0 enumerates every
    /// probe when m is at most 16 and samples 1000 otherwise.
    #[arg(long, default_value_t = 0)]
    pub probes: usize,
    /// Cost of one lattice lookup for top-down.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, env = "SUBSKY_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
}
