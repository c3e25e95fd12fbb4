use std::time::Instant;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subsky::datagen::{generate_zipf, write_csv, ZipfAttr, ZipfSpec};

use crate::args::GenArgs;
use crate::common::usage;

/// Separates the cardinality stream from the row stream of the same seed.
const CARDINALITY_STREAM: u64 = 0xca4d_0001;

/// Expands an attribute list into Zipf attributes. Attributes without an
/// explicit exponent get `1 + (i + 1) / m` by overall position `i`.
pub fn parse_attr_spec(spec: &str, seed: u64) -> Result<Vec<ZipfAttr>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ CARDINALITY_STREAM);
    let mut parsed: Vec<(u16, Option<f64>)> = Vec::new();
    let bad = |tok: &str| usage(format!("bad attribute spec {tok:?}"));
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (body, z) = match tok.split_once(':') {
            Some((b, z)) => (b, Some(z.parse::<f64>().map_err(|_| bad(tok))?)),
            None => (tok, None),
        };
        let (count, card) = match body.split_once('x') {
            Some((k, c)) => (k.parse::<usize>().map_err(|_| bad(tok))?, c),
            None => (1, body),
        };
        match card.split_once('-') {
            Some((lo, hi)) => {
                let lo: u16 = lo.parse().map_err(|_| bad(tok))?;
                let hi: u16 = hi.parse().map_err(|_| bad(tok))?;
                if lo > hi {
                    return Err(bad(tok));
                }
                for _ in 0..count {
                    parsed.push((rng.random_range(lo..=hi), z));
                }
            }
            None => {
                let c: u16 = card.parse().map_err(|_| bad(tok))?;
                parsed.extend(std::iter::repeat_n((c, z), count));
            }
        }
    }
    if parsed.is_empty() {
        return Err(usage("no attributes given"));
    }
    let m = parsed.len() as f64;
    Ok(parsed
        .into_iter()
        .enumerate()
        .map(|(i, (cardinality, z))| ZipfAttr {
            cardinality,
            z: z.unwrap_or(1.0 + (i + 1) as f64 / m),
        })
        .collect())
}

pub fn run(args: &GenArgs) -> Result<()> {
    let spec = ZipfSpec {
        n: args.n,
        attrs: parse_attr_spec(&args.attrs, args.seed)?,
        seed: args.seed,
    };
    let start = Instant::now();
    let rel = generate_zipf(&spec)?;
    write_csv(&rel, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "generated {} tuples x {} attributes in {} ms",
        rel.tuple_count(),
        rel.attribute_count(),
        start.elapsed().as_millis()
    );
    Ok(())
}
