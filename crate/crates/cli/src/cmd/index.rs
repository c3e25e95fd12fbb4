use std::time::Instant;

use anyhow::{Context, Result};
use subsky::{SortedIndex, TiePolicy};

use crate::args::IndexArgs;
use crate::common::load_dataset;

pub fn run(args: &IndexArgs) -> Result<()> {
    let tie: TiePolicy = args.tie.parse()?;
    let ds = load_dataset(&args.data)?;
    let start = Instant::now();
    let idx = SortedIndex::build(&ds.relation, tie);
    let build_ns = start.elapsed().as_nanos();
    idx.save(&args.out)
        .with_context(|| format!("writing index {}", args.out.display()))?;
    eprintln!(
        "indexed {} tuples x {} attributes ({tie}) in {build_ns} ns",
        idx.tuple_count(),
        idx.attribute_count()
    );
    Ok(())
}
