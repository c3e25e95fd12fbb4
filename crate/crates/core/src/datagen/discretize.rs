//! Equi-width bucketing of numeric columns into categorical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Value;

/// Which end of a numeric column is preferred.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    LargerBetter,
    SmallerBetter,
}

/// Maps each value to one of `buckets` equal-width bins over `[min, max]`.
///
/// A value on a boundary goes to the lower bin. The result is oriented so
/// that a larger bucket is always better. A constant column maps every value
/// to the best bucket.
pub fn discretize(column: &[f64], buckets: u16, direction: Direction) -> Result<Vec<Value>> {
    if buckets < 2 {
        return Err(Error::invalid(format!(
            "{buckets} buckets; at least 2 required"
        )));
    }
    if let Some(bad) = column.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite value {bad} in numeric column"
        )));
    }
    if column.is_empty() {
        return Ok(Vec::new());
    }
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = buckets - 1;
    if max == min {
        log::warn!("constant numeric column mapped to bucket {top}");
        return Ok(vec![top; column.len()]);
    }
    let width = (max - min) / buckets as f64;
    Ok(column
        .iter()
        .map(|&x| {
            let raw = ((x - min) / width).ceil() - 1.0;
            let b = raw.clamp(0.0, top as f64) as Value;
            match direction {
                Direction::LargerBetter => b,
                Direction::SmallerBetter => top - b,
            }
        })
        .collect())
}
