//! Mixed-radix ids for attribute-value combinations of a query space.
//!
//! The first query attribute is the most significant digit. A parent of a
//! combination has exactly one coordinate one higher; a child has exactly
//! one coordinate one lower.

use crate::error::{Error, Result};
use crate::model::Value;

pub type LatticeNodeId = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    cardinalities: Vec<u16>,
    /// Place value of each digit.
    radix: Vec<u64>,
    size: u64,
}

impl Lattice {
    pub fn new(cardinalities: &[u16]) -> Result<Self> {
        let mut radix = vec![0u64; cardinalities.len()];
        let mut place: u64 = 1;
        for (i, &c) in cardinalities.iter().enumerate().rev() {
            if c == 0 {
                return Err(Error::invalid("cardinality must be at least 1"));
            }
            radix[i] = place;
            place = place.checked_mul(c as u64).ok_or_else(|| {
                Error::invalid(format!(
                    "lattice over cardinalities {cardinalities:?} exceeds 2^64 nodes"
                ))
            })?;
        }
        Ok(Self {
            cardinalities: cardinalities.to_vec(),
            radix,
            size: place,
        })
    }

    pub fn cardinalities(&self) -> &[u16] {
        &self.cardinalities
    }

    /// Number of combinations.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn top(&self) -> Vec<Value> {
        self.cardinalities.iter().map(|&c| c - 1).collect()
    }

    pub fn id(&self, values: &[Value]) -> Result<LatticeNodeId> {
        if values.len() != self.cardinalities.len() {
            return Err(Error::invalid(format!(
                "combination of length {} in a lattice of {} attributes",
                values.len(),
                self.cardinalities.len()
            )));
        }
        let mut id = 0;
        for ((&v, &c), &r) in values.iter().zip(&self.cardinalities).zip(&self.radix) {
            if v >= c {
                return Err(Error::invalid(format!(
                    "value {v} outside domain of size {c}"
                )));
            }
            id += v as u64 * r;
        }
        Ok(id)
    }

    pub fn invid(&self, id: LatticeNodeId) -> Result<Vec<Value>> {
        if id >= self.size {
            return Err(Error::invalid(format!(
                "lattice id {id} out of range (size {})",
                self.size
            )));
        }
        Ok(self
            .radix
            .iter()
            .zip(&self.cardinalities)
            .map(|(&r, &c)| ((id / r) % c as u64) as Value)
            .collect())
    }

    /// Ids of combinations with one coordinate incremented.
    pub fn parents(&self, id: LatticeNodeId) -> Result<Vec<LatticeNodeId>> {
        let values = self.invid(id)?;
        Ok(values
            .iter()
            .zip(&self.cardinalities)
            .zip(&self.radix)
            .filter(|((&v, &c), _)| v + 1 < c)
            .map(|(_, &r)| id + r)
            .collect())
    }

    /// Ids of combinations with one coordinate decremented.
    pub fn children(&self, id: LatticeNodeId) -> Result<Vec<LatticeNodeId>> {
        let values = self.invid(id)?;
        Ok(values
            .iter()
            .zip(&self.radix)
            .filter(|(&v, _)| v > 0)
            .map(|(_, &r)| id - r)
            .collect())
    }
}
