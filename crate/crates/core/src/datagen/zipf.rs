//! Zipfian categorical columns sampled by inverse CDF.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Relation, Value};

/// One attribute: `cardinality` values, rank `r` drawn with weight `1 / r^z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfAttr {
    pub cardinality: u16,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfSpec {
    pub n: usize,
    pub attrs: Vec<ZipfAttr>,
    pub seed: u64,
}

impl ZipfSpec {
    /// Spreads the exponents evenly over `(1, 2]`: attribute `i` of `k`
    /// gets `z = 1 + (i + 1) / k`.
    pub fn with_auto_z(n: usize, cardinalities: &[u16], seed: u64) -> Self {
        let k = cardinalities.len() as f64;
        let attrs = cardinalities
            .iter()
            .enumerate()
            .map(|(i, &cardinality)| ZipfAttr {
                cardinality,
                z: 1.0 + (i + 1) as f64 / k,
            })
            .collect();
        Self { n, attrs, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.attrs.is_empty() {
            return Err(Error::invalid("a Zipf spec needs at least one attribute"));
        }
        for (i, a) in self.attrs.iter().enumerate() {
            if a.cardinality < 2 {
                return Err(Error::invalid(format!(
                    "attribute {i}: cardinality {} below 2",
                    a.cardinality
                )));
            }
            if !(a.z > 0.0 && a.z.is_finite()) {
                return Err(Error::invalid(format!(
                    "attribute {i}: exponent {} not positive",
                    a.z
                )));
            }
        }
        Ok(())
    }
}

/// Probability of each value. Value `v` has rank `v + 1`, so value 0 is the
/// most frequent and the least preferred.
pub fn zipf_pmf(cardinality: u16, z: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=cardinality).map(|r| (r as f64).powf(-z)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn cdf(cardinality: u16, z: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut c: Vec<f64> = zipf_pmf(cardinality, z)
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    // Guards the top bucket against rounding below 1.
    *c.last_mut().expect("cardinality >= 2") = f64::INFINITY;
    c
}

/// `n` rows, each attribute drawn independently. Rows are filled in order
/// from one seeded stream, so a seed fixes the whole relation.
pub fn generate_zipf(spec: &ZipfSpec) -> Result<Relation> {
    spec.validate()?;
    let cdfs: Vec<Vec<f64>> = spec.attrs.iter().map(|a| cdf(a.cardinality, a.z)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows = (0..spec.n)
        .map(|_| {
            cdfs.iter()
                .map(|c| {
                    let u: f64 = rng.random();
                    c.partition_point(|&x| x <= u) as Value
                })
                .collect()
        })
        .collect();
    let cards: Vec<u16> = spec.attrs.iter().map(|a| a.cardinality).collect();
    Relation::from_rows(&cards, rows)
}
