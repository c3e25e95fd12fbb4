//! Relations, subspace queries, dominance and scoring.
//!
//! Attribute values are dense integers `0..cardinality` where a larger value
//! is always preferred. Category labels are mapped to these ranks on
//! ingestion (see [`crate::datagen`]).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute value rank; larger is better.
pub type Value = u16;

/// Dense 0-based tuple identifier.
pub type TupleId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDomain {
    cardinality: u16,
}

impl AttributeDomain {
    pub fn new(cardinality: u16) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::invalid("attribute cardinality must be at least 1"));
        }
        Ok(Self { cardinality })
    }

    pub fn cardinality(&self) -> u16 {
        self.cardinality
    }

    pub fn max_value(&self) -> Value {
        self.cardinality - 1
    }

    pub fn contains(&self, v: Value) -> bool {
        v < self.cardinality
    }
}

/// An immutable table of categorical tuples.
///
/// Rows are stored row-major; the tuple id of a row is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    names: Vec<String>,
    domains: Vec<AttributeDomain>,
    values: Vec<Value>,
}

impl Relation {
    pub fn new(
        names: Vec<String>,
        domains: Vec<AttributeDomain>,
        rows: Vec<Vec<Value>>,
    ) -> Result<Self> {
        if names.len() != domains.len() {
            return Err(Error::invalid(format!(
                "{} attribute names for {} domains",
                names.len(),
                domains.len()
            )));
        }
        let m = domains.len();
        if rows.len() > TupleId::MAX as usize {
            return Err(Error::invalid("too many tuples for 32-bit tuple ids"));
        }
        let mut values = Vec::with_capacity(rows.len() * m);
        for (id, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!(
                    "tuple {id} has {} values, expected {m}",
                    row.len()
                )));
            }
            for (attr, (&v, dom)) in row.iter().zip(&domains).enumerate() {
                if !dom.contains(v) {
                    return Err(Error::invalid(format!(
                        "tuple {id} attribute {attr}: value {v} outside domain of cardinality {}",
                        dom.cardinality
                    )));
                }
            }
            values.extend_from_slice(&row);
        }
        Ok(Self {
            names,
            domains,
            values,
        })
    }

    /// Builds a relation with attributes named `A1..Am`.
    pub fn from_rows(cardinalities: &[u16], rows: Vec<Vec<Value>>) -> Result<Self> {
        let names = (1..=cardinalities.len()).map(|i| format!("A{i}")).collect();
        let domains = cardinalities
            .iter()
            .map(|&c| AttributeDomain::new(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, domains, rows)
    }

    pub fn tuple_count(&self) -> usize {
        if self.domains.is_empty() {
            0
        } else {
            self.values.len() / self.domains.len()
        }
    }

    pub fn attribute_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[AttributeDomain] {
        &self.domains
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, id: TupleId) -> &[Value] {
        let m = self.domains.len();
        let start = id as usize * m;
        &self.values[start..start + m]
    }

    pub fn value(&self, id: TupleId, attr: usize) -> Value {
        self.values[id as usize * self.domains.len() + attr]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Value]> {
        self.values.chunks_exact(self.domains.len().max(1))
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The first `n` tuples as a new relation with the same schema.
    pub fn prefix(&self, n: usize) -> Relation {
        let n = n.min(self.tuple_count());
        Relation {
            names: self.names.clone(),
            domains: self.domains.clone(),
            values: self.values[..n * self.domains.len()].to_vec(),
        }
    }
}

/// An ordered subset of attributes defining a subspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    attrs: Vec<usize>,
}

impl Query {
    pub fn new(attrs: Vec<usize>, relation: &Relation) -> Result<Self> {
        Self::for_attribute_count(attrs, relation.attribute_count())
    }

    pub fn for_attribute_count(attrs: Vec<usize>, m: usize) -> Result<Self> {
        if attrs.is_empty() {
            return Err(Error::invalid("query must name at least one attribute"));
        }
        let mut seen = BTreeSet::new();
        for &a in &attrs {
            if a >= m {
                return Err(Error::invalid(format!(
                    "attribute index {a} out of range for {m} attributes"
                )));
            }
            if !seen.insert(a) {
                return Err(Error::invalid(format!("attribute index {a} repeated")));
            }
        }
        Ok(Self { attrs })
    }

    /// Every attribute of the relation, in schema order.
    pub fn all(relation: &Relation) -> Result<Self> {
        Self::new((0..relation.attribute_count()).collect(), relation)
    }

    pub fn attrs(&self) -> &[usize] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn cardinalities(&self, relation: &Relation) -> Vec<u16> {
        self.attrs
            .iter()
            .map(|&a| relation.domains()[a].cardinality())
            .collect()
    }

    /// Checked dominance between two projected value vectors.
    pub fn dominates(&self, a: &[Value], b: &[Value]) -> Result<bool> {
        if a.len() != self.len() || b.len() != self.len() {
            return Err(Error::invalid(format!(
                "projected tuples of length {} and {} for a query of length {}",
                a.len(),
                b.len(),
                self.len()
            )));
        }
        Ok(dominates(a, b))
    }
}

/// `a` dominates `b`: at least as good everywhere and strictly better somewhere.
///
/// Both slices must have the same length.
#[inline]
pub fn dominates(a: &[Value], b: &[Value]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

/// Mixed-radix monotone score over a query's attributes.
///
/// The weight of query attribute `i` is the product of the cardinalities of
/// the attributes after it, so the first attribute is the most significant
/// digit. Distinct value vectors get distinct scores and a dominating vector
/// always scores strictly higher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scorer {
    weights: Vec<u128>,
    cardinalities: Vec<u16>,
}

impl Scorer {
    pub fn new(cardinalities: &[u16]) -> Result<Self> {
        let mut weights = vec![0u128; cardinalities.len()];
        let mut w: u128 = 1;
        for (i, &c) in cardinalities.iter().enumerate().rev() {
            if c == 0 {
                return Err(Error::invalid("attribute cardinality must be at least 1"));
            }
            weights[i] = w;
            w = w
                .checked_mul(c as u128)
                .ok_or_else(|| Error::invalid("query value space too large for a 128-bit score"))?;
        }
        Ok(Self {
            weights,
            cardinalities: cardinalities.to_vec(),
        })
    }

    pub fn for_query(relation: &Relation, query: &Query) -> Result<Self> {
        Self::new(&query.cardinalities(relation))
    }

    pub fn weights(&self) -> &[u128] {
        &self.weights
    }

    pub fn weight(&self, level: usize) -> u128 {
        self.weights[level]
    }

    pub fn cardinalities(&self) -> &[u16] {
        &self.cardinalities
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn score(&self, values: &[Value]) -> u128 {
        debug_assert_eq!(values.len(), self.weights.len());
        values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| v as u128 * w)
            .sum()
    }

    pub fn try_score(&self, values: &[Value]) -> Result<u128> {
        if values.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "tuple of length {} for a scorer of length {}",
                values.len(),
                self.weights.len()
            )));
        }
        Ok(self.score(values))
    }
}

/// A tuple restricted to a query's attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjectedTuple {
    pub id: TupleId,
    pub values: Vec<Value>,
}

/// Projects every tuple of `relation` onto `query`, in tuple id order.
pub fn project(relation: &Relation, query: &Query) -> Vec<ProjectedTuple> {
    (0..relation.tuple_count() as TupleId)
        .map(|id| {
            let row = relation.row(id);
            ProjectedTuple {
                id,
                values: query.attrs().iter().map(|&a| row[a]).collect(),
            }
        })
        .collect()
}

/// Pairwise O(n²·m′) skyline, used as the reference answer.
///
/// Returns tuple ids in ascending order.
pub fn brute_force_skyline(relation: &Relation, query: &Query) -> Vec<TupleId> {
    let projected = project(relation, query);
    projected
        .iter()
        .filter(|t| !projected.iter().any(|o| dominates(&o.values, &t.values)))
        .map(|t| t.id)
        .collect()
}
