use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use subsky::datagen::{read_csv, Dataset};
use subsky::{Query, Relation, SortedIndex};

use crate::UsageError;

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_csv(path).with_context(|| format!("reading dataset {}", path.display()))
}

pub fn load_index(path: &Path, relation: &Relation) -> Result<SortedIndex> {
    let idx =
        SortedIndex::load(path).with_context(|| format!("reading index {}", path.display()))?;
    idx.check_matches(relation)
        .with_context(|| format!("index {} does not match the dataset", path.display()))?;
    Ok(idx)
}

/// Resolves attribute tokens by header name, falling back to a 0-based
/// position. No tokens means every attribute.
pub fn resolve_query(relation: &Relation, tokens: &[String]) -> Result<Query> {
    if tokens.is_empty() {
        return Ok(Query::all(relation)?);
    }
    let mut attrs = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let tok = tok.trim();
        let attr = relation
            .attribute_index(tok)
            .or_else(|| {
                tok.parse::<usize>()
                    .ok()
                    .filter(|&i| i < relation.attribute_count())
            })
            .ok_or_else(|| usage(format!("unknown attribute {tok:?}")))?;
        attrs.push(attr);
    }
    Ok(Query::new(attrs, relation)?)
}

/// `-` is standard output; anything else is a file created afresh.
pub fn open_output(dest: &str) -> Result<Box<dyn Write>> {
    if dest == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(dest).with_context(|| format!("creating {dest}"))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

/// Parses `a..b` (doubling), `a..b:step` (linear) or a comma list.
pub fn parse_range(spec: &str) -> Result<Vec<usize>> {
    let bad = || usage(format!("bad range {spec:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, Some(num(step)?)),
            None => (num(rest)?, None),
        };
        let lo = num(lo)?;
        if lo > hi {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut x = lo;
        match step {
            Some(0) => return Err(bad()),
            Some(step) => {
                while x <= hi {
                    out.push(x);
                    x += step;
                }
            }
            None => {
                if lo == 0 {
                    out.push(0);
                    x = 1;
                }
                while x <= hi {
                    out.push(x);
                    x *= 2;
                }
            }
        }
        Ok(out)
    } else {
        spec.split(',').map(num).collect()
    }
}
