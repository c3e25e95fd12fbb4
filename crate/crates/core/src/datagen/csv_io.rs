//! CSV relations with an optional `<base>.meta.json` sidecar describing how
//! each column maps onto a categorical domain.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use super::discretize::{discretize, Direction};
use crate::error::{Error, Result};
use crate::model::{AttributeDomain, Relation, Value};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    /// `T/F`, `true/false`, `yes/no` or `1/0`; true is better.
    Bool,
    /// Labels ranked by `labels`, least preferred first.
    Cat,
    /// Numbers, either scaled to integers or bucketed.
    #[default]
    Num,
}

/// How one CSV column becomes an attribute.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    #[serde(default)]
    pub kind: ColumnKind,
    #[serde(default)]
    pub direction: Direction,
    /// Label order for `cat`, least preferred first. Without it the
    /// distinct labels are ranked lexicographically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Domain size for `num`; defaults to the largest value plus one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<u16>,
    /// Multiplier applied to `num` values before rounding to an integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Equi-width bucket count for `num`; overrides `scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buckets: Option<u16>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvMeta {
    /// Header of the tuple-label column, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
    #[serde(default)]
    pub columns: Vec<ColumnMeta>,
}

/// A relation with the external label of each tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub relation: Relation,
    /// The id column's value per tuple, or the tuple index when absent.
    pub row_labels: Vec<String>,
}

/// `data.csv` maps to `data.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Reads a CSV file and its sidecar when one exists next to it.
pub fn read_csv(path: &Path) -> Result<Dataset> {
    let meta_file = meta_path(path);
    let meta = if meta_file.exists() {
        serde_json::from_slice(&fs::read(&meta_file)?)?
    } else {
        CsvMeta::default()
    };
    read_csv_with_meta(fs::File::open(path)?, &meta)
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line as usize,
        message: message.into(),
    }
}

/// Parses CSV text with an explicit schema. Columns absent from `meta` are
/// integer `num` columns.
pub fn read_csv_with_meta(input: impl Read, meta: &CsvMeta) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_error(1, "missing header row"));
    }
    let id_col = match &meta.id_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| parse_error(1, format!("id column {name:?} not in header")))?,
        ),
        None => {
            let first = header[0].to_ascii_lowercase();
            (first == "id" || first == "tupleid").then_some(0)
        }
    };
    let attr_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != id_col).collect();
    if attr_cols.is_empty() {
        return Err(parse_error(1, "no attribute columns"));
    }
    let mut seen = BTreeSet::new();
    for &c in &attr_cols {
        if !seen.insert(header[c].as_str()) {
            return Err(parse_error(1, format!("duplicate column {:?}", header[c])));
        }
    }
    let by_name: HashMap<&str, &ColumnMeta> =
        meta.columns.iter().map(|c| (c.name.as_str(), c)).collect();
    if let Some(extra) = meta
        .columns
        .iter()
        .find(|c| !seen.contains(c.name.as_str()))
    {
        return Err(parse_error(
            1,
            format!("metadata names unknown column {:?}", extra.name),
        ));
    }

    let mut lines = Vec::new();
    let mut labels = Vec::new();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); attr_cols.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != header.len() {
            return Err(parse_error(
                line,
                format!("{} fields, header has {}", record.len(), header.len()),
            ));
        }
        labels.push(match id_col {
            Some(c) => record[c].to_owned(),
            None => labels.len().to_string(),
        });
        for (slot, &c) in cells.iter_mut().zip(&attr_cols) {
            slot.push(record[c].to_owned());
        }
        lines.push(line);
    }

    let mut names = Vec::with_capacity(attr_cols.len());
    let mut domains = Vec::with_capacity(attr_cols.len());
    let mut columns = Vec::with_capacity(attr_cols.len());
    for (&c, raw) in attr_cols.iter().zip(&cells) {
        let name = &header[c];
        let fallback = ColumnMeta {
            name: name.clone(),
            ..ColumnMeta::default()
        };
        let col_meta = by_name.get(name.as_str()).copied().unwrap_or(&fallback);
        let (card, values) = convert_column(col_meta, raw, &lines)?;
        names.push(name.clone());
        domains.push(AttributeDomain::new(card)?);
        columns.push(values);
    }
    let rows = (0..labels.len())
        .map(|r| columns.iter().map(|col| col[r]).collect())
        .collect();
    Ok(Dataset {
        relation: Relation::new(names, domains, rows)?,
        row_labels: labels,
    })
}

fn orient(v: Value, card: u16, direction: Direction) -> Value {
    match direction {
        Direction::LargerBetter => v,
        Direction::SmallerBetter => card - 1 - v,
    }
}

fn convert_column(meta: &ColumnMeta, raw: &[String], lines: &[u64]) -> Result<(u16, Vec<Value>)> {
    let name = &meta.name;
    match meta.kind {
        ColumnKind::Bool => {
            let mut out = Vec::with_capacity(raw.len());
            for (cell, &line) in raw.iter().zip(lines) {
                let v = match cell.to_ascii_lowercase().as_str() {
                    "t" | "true" | "yes" | "y" | "1" => 1,
                    "f" | "false" | "no" | "n" | "0" => 0,
                    _ => {
                        return Err(parse_error(
                            line,
                            format!("{name}: {cell:?} is not a boolean"),
                        ))
                    }
                };
                out.push(orient(v, 2, meta.direction));
            }
            Ok((2, out))
        }
        ColumnKind::Cat => {
            let order: Vec<String> = match &meta.labels {
                Some(l) => l.clone(),
                None => {
                    log::warn!("{name}: no label order declared, ranking labels lexicographically");
                    raw.iter()
                        .cloned()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect()
                }
            };
            let card = u16::try_from(order.len().max(2))
                .map_err(|_| Error::invalid(format!("{name}: too many labels")))?;
            let rank: HashMap<&str, Value> = order
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i as Value))
                .collect();
            let mut out = Vec::with_capacity(raw.len());
            for (cell, &line) in raw.iter().zip(lines) {
                let v = *rank
                    .get(cell.as_str())
                    .ok_or_else(|| parse_error(line, format!("{name}: unknown label {cell:?}")))?;
                out.push(orient(v, card, meta.direction));
            }
            Ok((card, out))
        }
        ColumnKind::Num => {
            let mut nums = Vec::with_capacity(raw.len());
            for (cell, &line) in raw.iter().zip(lines) {
                let x: f64 = cell
                    .parse()
                    .map_err(|_| parse_error(line, format!("{name}: {cell:?} is not a number")))?;
                if !x.is_finite() {
                    return Err(parse_error(line, format!("{name}: {cell:?} is not finite")));
                }
                nums.push(x);
            }
            if let Some(b) = meta.buckets {
                return Ok((b, discretize(&nums, b, meta.direction)?));
            }
            let scale = meta.scale.unwrap_or(1.0);
            let mut ints = Vec::with_capacity(nums.len());
            for (&x, &line) in nums.iter().zip(lines) {
                let y = (x * scale).round();
                if !(0.0..=u16::MAX as f64).contains(&y) || (x * scale - y).abs() > 1e-6 {
                    return Err(parse_error(
                        line,
                        format!("{name}: {x} does not scale to a non-negative integer"),
                    ));
                }
                ints.push(y as Value);
            }
            let needed = ints.iter().max().map_or(2, |&m| (m as u32 + 1).max(2));
            let card = match meta.cardinality {
                Some(c) if (c as u32) < needed => {
                    return Err(Error::invalid(format!(
                        "{name}: value {} outside declared cardinality {c}",
                        needed - 1
                    )))
                }
                Some(c) => c,
                None => u16::try_from(needed)
                    .map_err(|_| Error::invalid(format!("{name}: values exceed the domain")))?,
            };
            Ok((
                card,
                ints.into_iter()
                    .map(|v| orient(v, card, meta.direction))
                    .collect(),
            ))
        }
    }
}

/// Writes integer values under an `id` column plus a sidecar that pins each
/// attribute's cardinality, so reading the pair back yields the same
/// relation. Both files are replaced atomically.
pub fn write_csv(relation: &Relation, path: &Path) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(tmp.as_file_mut()));
        let mut header = vec!["id".to_owned()];
        header.extend(relation.names().iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        let mut rec = Vec::with_capacity(header.len());
        for (id, row) in relation.rows().take(relation.tuple_count()).enumerate() {
            rec.clear();
            rec.push(id.to_string());
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
    }
    let meta = CsvMeta {
        id_column: Some("id".to_owned()),
        columns: relation
            .names()
            .iter()
            .zip(relation.domains())
            .map(|(name, d)| ColumnMeta {
                name: name.clone(),
                cardinality: Some(d.cardinality()),
                ..ColumnMeta::default()
            })
            .collect(),
    };
    let mut meta_tmp = NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut meta_tmp, &meta)?;
    meta_tmp.write_all(b"\n")?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    meta_tmp
        .persist(meta_path(path))
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("{other:?}")),
    }
}
