//! Synthetic Zipfian relations, numeric discretization and CSV ingestion.

mod csv_io;
mod discretize;
mod zipf;

pub use csv_io::{
    meta_path, read_csv, read_csv_with_meta, write_csv, ColumnKind, ColumnMeta, CsvMeta, Dataset,
};
pub use discretize::{discretize, Direction};
pub use zipf::{generate_zipf, zipf_pmf, ZipfAttr, ZipfSpec};
