//! Per-attribute descending sorted lists.
//!
//! A [`SortedIndex`] is immutable after construction and can be shared by
//! concurrent queries. Sequential position and access counters live in an
//! [`IndexCursor`], one per query run.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Relation, TupleId, Value};

const MAGIC: &[u8; 7] = b"SKYIDX1";

/// Order of entries that share a value within one list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Ascending tuple id.
    #[default]
    IdAsc,
    /// Descending sum of the tuple's values over all attributes, then
    /// ascending id. Tuples that are better elsewhere surface first.
    RestSumDesc,
    /// Independent seeded shuffle of each list's ties.
    Random(u64),
}

impl TiePolicy {
    fn tag(self) -> u8 {
        match self {
            TiePolicy::IdAsc => 0,
            TiePolicy::RestSumDesc => 1,
            TiePolicy::Random(_) => 2,
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TiePolicy::IdAsc => f.write_str("id-asc"),
            TiePolicy::RestSumDesc => f.write_str("rest-sum-desc"),
            TiePolicy::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id-asc" => Ok(TiePolicy::IdAsc),
            "rest-sum-desc" => Ok(TiePolicy::RestSumDesc),
            other => other
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(TiePolicy::Random)
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "unknown tie policy {other:?} (expected id-asc, rest-sum-desc or random:SEED)"
                    ))
                }),
        }
    }
}

/// One attribute's entries in non-increasing value order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedList {
    attribute: usize,
    entries: Vec<(TupleId, Value)>,
    /// `value_of[id]` is the stored value of tuple `id`.
    value_of: Vec<Value>,
    /// `ranges[v]` is the half-open entry range holding value `v`.
    ranges: Vec<(u32, u32)>,
    /// Entry ids re-sorted ascending inside each value range.
    ids_sorted: Vec<TupleId>,
}

impl SortedList {
    fn from_entries(attribute: usize, entries: Vec<(TupleId, Value)>) -> Self {
        let n = entries.len();
        let mut value_of = vec![0; n];
        let top = entries.first().map_or(0, |e| e.1 as usize + 1);
        let mut ranges = vec![(0u32, 0u32); top];
        let mut pos = 0;
        while pos < n {
            let v = entries[pos].1;
            let start = pos;
            while pos < n && entries[pos].1 == v {
                value_of[entries[pos].0 as usize] = v;
                pos += 1;
            }
            ranges[v as usize] = (start as u32, pos as u32);
        }
        let mut ids_sorted: Vec<TupleId> = entries.iter().map(|e| e.0).collect();
        for &(a, b) in &ranges {
            ids_sorted[a as usize..b as usize].sort_unstable();
        }
        Self {
            attribute,
            entries,
            value_of,
            ranges,
            ids_sorted,
        }
    }

    pub fn attribute(&self) -> usize {
        self.attribute
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(TupleId, Value)] {
        &self.entries
    }

    /// Uncounted value lookup.
    pub fn value(&self, id: TupleId) -> Option<Value> {
        self.value_of.get(id as usize).copied()
    }

    /// Entries holding exactly `v`, in tie order. Never moves a cursor.
    pub fn entries_with_value(&self, v: Value) -> &[(TupleId, Value)] {
        match self.ranges.get(v as usize) {
            Some(&(a, b)) => &self.entries[a as usize..b as usize],
            None => &[],
        }
    }

    /// Ids whose value is exactly `v`, ascending.
    pub fn ids_with_value_sorted(&self, v: Value) -> &[TupleId] {
        match self.ranges.get(v as usize) {
            Some(&(a, b)) => &self.ids_sorted[a as usize..b as usize],
            None => &[],
        }
    }

    /// Ids whose value is exactly `v`, in tie order.
    pub fn lookup_by_value(&self, v: Value) -> Vec<TupleId> {
        self.entries_with_value(v).iter().map(|e| e.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedIndex {
    tuple_count: usize,
    tie: TiePolicy,
    lists: Vec<SortedList>,
}

impl SortedIndex {
    pub fn build(relation: &Relation, tie: TiePolicy) -> Self {
        let n = relation.tuple_count();
        let m = relation.attribute_count();
        let sums: Vec<u64> = match tie {
            TiePolicy::RestSumDesc => relation
                .rows()
                .map(|r| r.iter().map(|&v| v as u64).sum())
                .collect(),
            _ => Vec::new(),
        };
        let lists = (0..m)
            .map(|a| {
                let mut entries: Vec<(TupleId, Value)> = (0..n)
                    .map(|id| (id as TupleId, relation.value(id as TupleId, a)))
                    .collect();
                match tie {
                    TiePolicy::IdAsc => entries.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0))),
                    TiePolicy::RestSumDesc => entries.sort_by(|x, y| {
                        y.1.cmp(&x.1)
                            .then(sums[y.0 as usize].cmp(&sums[x.0 as usize]))
                            .then(x.0.cmp(&y.0))
                    }),
                    TiePolicy::Random(seed) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            seed ^ (a as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                        );
                        let keys: Vec<u64> = (0..n).map(|_| rng.random()).collect();
                        entries.sort_by(|x, y| {
                            y.1.cmp(&x.1)
                                .then(keys[x.0 as usize].cmp(&keys[y.0 as usize]))
                                .then(x.0.cmp(&y.0))
                        });
                    }
                }
                SortedList::from_entries(a, entries)
            })
            .collect();
        Self {
            tuple_count: n,
            tie,
            lists,
        }
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie
    }

    pub fn tuple_count(&self) -> usize {
        self.tuple_count
    }

    pub fn attribute_count(&self) -> usize {
        self.lists.len()
    }

    pub fn list(&self, attribute: usize) -> &SortedList {
        &self.lists[attribute]
    }

    pub fn lists(&self) -> &[SortedList] {
        &self.lists
    }

    pub fn cursor(&self) -> IndexCursor<'_> {
        IndexCursor {
            index: self,
            positions: vec![0; self.lists.len()],
            counters: AccessCounters::default(),
        }
    }

    /// Checks that the index describes exactly `relation`.
    pub fn check_matches(&self, relation: &Relation) -> Result<()> {
        if self.lists.len() != relation.attribute_count()
            || self.tuple_count != relation.tuple_count()
        {
            return Err(Error::IndexFormat(format!(
                "index is {}x{} but relation is {}x{}",
                self.tuple_count,
                self.lists.len(),
                relation.tuple_count(),
                relation.attribute_count()
            )));
        }
        for list in &self.lists {
            for &(id, v) in &list.entries {
                if relation.value(id, list.attribute) != v {
                    return Err(Error::IndexFormat(format!(
                        "attribute {} of tuple {id} is {} in the relation but {v} in the index",
                        list.attribute,
                        relation.value(id, list.attribute)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.lists.len() as u32).to_le_bytes())?;
        w.write_all(&(self.tuple_count as u32).to_le_bytes())?;
        w.write_all(&[self.tie.tag()])?;
        if let TiePolicy::Random(seed) = self.tie {
            w.write_all(&seed.to_le_bytes())?;
        }
        for list in &self.lists {
            for &(id, v) in &list.entries {
                w.write_all(&id.to_le_bytes())?;
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 7];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(Error::IndexFormat("bad magic".into()));
        }
        let m = read_u32(&mut r, "attribute count")? as usize;
        let n = read_u32(&mut r, "tuple count")? as usize;
        let mut tag = [0u8; 1];
        read_exact(&mut r, &mut tag, "tie policy")?;
        let tie = match tag[0] {
            0 => TiePolicy::IdAsc,
            1 => TiePolicy::RestSumDesc,
            2 => {
                let mut seed = [0u8; 8];
                read_exact(&mut r, &mut seed, "tie seed")?;
                TiePolicy::Random(u64::from_le_bytes(seed))
            }
            t => return Err(Error::IndexFormat(format!("unknown tie policy tag {t}"))),
        };
        let mut lists = Vec::with_capacity(m);
        let mut record = [0u8; 6];
        for a in 0..m {
            let mut entries = Vec::with_capacity(n);
            let mut seen = vec![false; n];
            for pos in 0..n {
                read_exact(&mut r, &mut record, "entry")?;
                let id = u32::from_le_bytes(record[..4].try_into().unwrap());
                let v = u16::from_le_bytes(record[4..].try_into().unwrap());
                if id as usize >= n || std::mem::replace(&mut seen[id as usize], true) {
                    return Err(Error::IndexFormat(format!(
                        "list {a} entry {pos}: tuple id {id} is out of range or repeated"
                    )));
                }
                if let Some(&(_, prev)) = entries.last() {
                    if v > prev {
                        return Err(Error::IndexFormat(format!(
                            "list {a} entry {pos}: value {v} follows smaller value {prev}"
                        )));
                    }
                }
                entries.push((id, v));
            }
            lists.push(SortedList::from_entries(a, entries));
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::IndexFormat("trailing bytes after last list".into()));
        }
        Ok(Self {
            tuple_count: n,
            tie,
            lists,
        })
    }

    /// Writes the index atomically: a temporary file in the target directory
    /// is renamed over `path` once fully written.
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = tempfile::NamedTempFile::new_in(dir)?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            self.write_to(&mut w)?;
            w.flush()?;
        }
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::IndexFormat(format!("truncated at {what}")),
        _ => Error::Io(e),
    })
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AccessCounters {
    pub sorted_accesses: u64,
    pub random_accesses: u64,
}

/// Per-run sequential positions and access counters over a shared index.
#[derive(Debug, Clone)]
pub struct IndexCursor<'a> {
    index: &'a SortedIndex,
    positions: Vec<usize>,
    counters: AccessCounters,
}

impl<'a> IndexCursor<'a> {
    pub fn index(&self) -> &'a SortedIndex {
        self.index
    }

    /// Next entry of `attribute`'s list, or `None` once the list is exhausted.
    /// Only successful reads are counted.
    pub fn sorted_access(&mut self, attribute: usize) -> Option<(TupleId, Value)> {
        let list = &self.index.lists[attribute];
        let pos = &mut self.positions[attribute];
        let entry = list.entries.get(*pos).copied()?;
        *pos += 1;
        self.counters.sorted_accesses += 1;
        Some(entry)
    }

    pub fn random_access(&mut self, attribute: usize, id: TupleId) -> Result<Value> {
        let v = self.index.lists[attribute]
            .value(id)
            .ok_or_else(|| Error::invalid(format!("tuple id {id} out of range")))?;
        self.counters.random_accesses += 1;
        Ok(v)
    }

    pub fn position(&self, attribute: usize) -> usize {
        self.positions[attribute]
    }

    pub fn is_exhausted(&self, attribute: usize) -> bool {
        self.positions[attribute] >= self.index.lists[attribute].len()
    }

    pub fn counters(&self) -> AccessCounters {
        self.counters
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table3() -> Relation {
        Relation::from_rows(
            &[2; 5],
            vec![
                vec![0, 1, 0, 1, 1],
                vec![0, 0, 1, 1, 0],
                vec![0, 0, 1, 0, 1],
                vec![0, 0, 0, 1, 1],
                vec![1, 0, 1, 1, 1],
                vec![1, 1, 1, 0, 0],
            ],
        )
        .unwrap()
    }

    fn order(idx: &SortedIndex, a: usize) -> Vec<TupleId> {
        idx.list(a).entries().iter().map(|e| e.0 + 1).collect()
    }

    #[test]
    fn id_order_tie_lists() {
        let idx = SortedIndex::build(&table3(), TiePolicy::IdAsc);
        assert_eq!(order(&idx, 0), vec![5, 6, 1, 2, 3, 4]);
        assert_eq!(order(&idx, 1), vec![1, 6, 2, 3, 4, 5]);
        assert_eq!(order(&idx, 2), vec![2, 3, 5, 6, 1, 4]);
        assert_eq!(order(&idx, 3), vec![1, 2, 4, 5, 3, 6]);
    }

    #[test]
    fn rest_sum_tie_lists() {
        let idx = SortedIndex::build(&table3(), TiePolicy::RestSumDesc);
        assert_eq!(order(&idx, 0), vec![5, 6, 1, 2, 3, 4]);
        assert_eq!(order(&idx, 1), vec![1, 6, 5, 2, 3, 4]);
        assert_eq!(order(&idx, 2), vec![5, 6, 2, 3, 1, 4]);
        assert_eq!(order(&idx, 3), vec![5, 1, 2, 4, 6, 3]);
    }

    #[test]
    fn empty_relation_gives_empty_lists() {
        let rel = Relation::from_rows(&[3, 3], vec![]).unwrap();
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        assert_eq!(idx.attribute_count(), 2);
        assert!(idx.lists().iter().all(SortedList::is_empty));
        assert_eq!(idx.cursor().sorted_access(0), None);
    }

    #[test]
    fn sorted_access_sequence() {
        let idx = SortedIndex::build(&table3(), TiePolicy::IdAsc);
        let mut cur = idx.cursor();
        assert_eq!(cur.sorted_access(0), Some((4, 1)));
        for _ in 0..5 {
            assert!(cur.sorted_access(0).is_some());
        }
        assert_eq!(cur.sorted_access(0), None);
        assert_eq!(cur.counters().sorted_accesses, 6);
    }

    #[test]
    fn random_access_counts_and_keeps_cursor() {
        let idx = SortedIndex::build(&table3(), TiePolicy::IdAsc);
        let mut cur = idx.cursor();
        cur.sorted_access(2);
        assert_eq!(cur.random_access(2, 1).unwrap(), 1);
        assert_eq!(cur.position(2), 1);
        assert_eq!(cur.counters().random_accesses, 1);
        assert!(cur.random_access(2, 6).is_err());
        assert_eq!(cur.counters().random_accesses, 1);
    }

    #[test]
    fn lookup_by_value_ranges() {
        let idx = SortedIndex::build(&table3(), TiePolicy::IdAsc);
        assert_eq!(idx.list(0).lookup_by_value(1), vec![4, 5]);
        assert_eq!(idx.list(0).lookup_by_value(0), vec![0, 1, 2, 3]);
        assert!(idx.list(0).lookup_by_value(7).is_empty());
    }

    #[test]
    fn constant_column() {
        let rel = Relation::from_rows(&[4], vec![vec![2], vec![2], vec![2]]).unwrap();
        let idx = SortedIndex::build(&rel, TiePolicy::IdAsc);
        let mut cur = idx.cursor();
        for k in 0..3 {
            assert_eq!(cur.sorted_access(0), Some((k, 2)));
            assert_eq!(cur.random_access(0, k).unwrap(), 2);
        }
        assert!(idx.list(0).lookup_by_value(3).is_empty());
    }

    #[test]
    fn binary_round_trip() {
        for tie in [TiePolicy::IdAsc, TiePolicy::RestSumDesc] {
            let idx = SortedIndex::build(&table3(), tie);
            let mut buf = Vec::new();
            idx.write_to(&mut buf).unwrap();
            assert_eq!(buf.len(), 7 + 4 + 4 + 1 + 5 * 6 * 6);
            let back = SortedIndex::read_from(&buf[..]).unwrap();
            assert_eq!(back, idx);
            back.check_matches(&table3()).unwrap();
        }
    }

    #[test]
    fn loader_rejects_corruption() {
        let idx = SortedIndex::build(&table3(), TiePolicy::IdAsc);
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            SortedIndex::read_from(&bad[..]),
            Err(Error::IndexFormat(_))
        ));

        let mut bad = buf.clone();
        bad[15] = 9;
        assert!(matches!(
            SortedIndex::read_from(&bad[..]),
            Err(Error::IndexFormat(_))
        ));

        // Swap the first two records of list 0: values 1,1 stay sorted but
        // swapping records 2 and 3 (values 1 then 0) breaks monotonicity.
        let mut bad = buf.clone();
        let rec = |i: usize| 16 + 6 * i..16 + 6 * (i + 1);
        let r1: Vec<u8> = bad[rec(1)].to_vec();
        let r2: Vec<u8> = bad[rec(2)].to_vec();
        bad[rec(1)].copy_from_slice(&r2);
        bad[rec(2)].copy_from_slice(&r1);
        assert!(matches!(
            SortedIndex::read_from(&bad[..]),
            Err(Error::IndexFormat(_))
        ));

        let mut bad = buf.clone();
        bad[rec(0)][..4].copy_from_slice(&5u32.to_le_bytes());
        assert!(matches!(
            SortedIndex::read_from(&bad[..]),
            Err(Error::IndexFormat(_))
        ));

        assert!(matches!(
            SortedIndex::read_from(&buf[..buf.len() - 1]),
            Err(Error::IndexFormat(_))
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            SortedIndex::read_from(&long[..]),
            Err(Error::IndexFormat(_))
        ));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t3.idx");
        let idx = SortedIndex::build(&table3(), TiePolicy::RestSumDesc);
        idx.save(&path).unwrap();
        assert_eq!(SortedIndex::load(&path).unwrap(), idx);
    }

    #[test]
    fn check_matches_detects_mismatch() {
        let idx = SortedIndex::build(&table3(), TiePolicy::IdAsc);
        let other = Relation::from_rows(&[2; 5], vec![vec![0; 5]; 6]).unwrap();
        assert!(idx.check_matches(&other).is_err());
    }

    #[test]
    fn random_ties_round_trip_and_differ_per_list() {
        let rel = Relation::from_rows(&[2; 3], vec![vec![1, 1, 1]; 40]).unwrap();
        let idx = SortedIndex::build(&rel, TiePolicy::Random(3));
        assert_eq!(idx, SortedIndex::build(&rel, TiePolicy::Random(3)));
        assert_ne!(order(&idx, 0), order(&idx, 1));
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        assert_eq!(SortedIndex::read_from(&buf[..]).unwrap(), idx);
    }

    #[test]
    fn tie_policy_parse() {
        assert_eq!(
            "random:7".parse::<TiePolicy>().unwrap(),
            TiePolicy::Random(7)
        );
        assert_eq!("id-asc".parse::<TiePolicy>().unwrap(), TiePolicy::IdAsc);
        assert_eq!(TiePolicy::RestSumDesc.to_string(), "rest-sum-desc");
        assert!("x".parse::<TiePolicy>().is_err());
    }
}
