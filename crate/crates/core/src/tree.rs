//! The dominance tree: a k-ary trie over query-attribute values.
//!
//! Level `l` of the tree branches on the `l`-th query attribute, with one
//! child slot per domain value. A root-to-leaf path spells out a value
//! combination; the leaf keeps the combination's score and the ids of every
//! stored tuple carrying it. Internal nodes keep the minimum and maximum
//! score found beneath them so that searches can skip subtrees that cannot
//! contain a dominator (or a dominated tuple).
//!
//! Nodes live in an arena and are addressed by `u32` handles; freed nodes are
//! recycled.

use serde::Serialize;

use crate::error::Result;
use crate::model::{ProjectedTuple, Query, Relation, Scorer, TupleId, Value};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    /// Child handles indexed by attribute value; empty for leaves.
    children: Box<[u32]>,
    live_children: u16,
    min_score: u128,
    max_score: u128,
    /// Tuple ids mapped to this leaf; always empty on internal nodes.
    ids: Vec<TupleId>,
}

impl Node {
    fn new(fanout: usize) -> Self {
        Self {
            children: vec![NIL; fanout].into_boxed_slice(),
            live_children: 0,
            min_score: u128::MAX,
            max_score: 0,
            ids: Vec::new(),
        }
    }
}

/// Traversal counters for [`DominanceTree::is_dominated`] and
/// [`DominanceTree::prune_dominated`].
///
/// `nodes` counts nodes entered (including ones rejected by a score bound);
/// `empty_links` counts child slots that were selected by the traversal but
/// hold no subtree. Their sum is the number of recursive calls a
/// pointer-chasing implementation would make.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VisitStats {
    pub nodes: u64,
    pub empty_links: u64,
}

impl VisitStats {
    pub fn calls(&self) -> u64 {
        self.nodes + self.empty_links
    }
}

/// One stored leaf, reconstructed from its root path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub values: Vec<Value>,
    pub score: u128,
    pub ids: Vec<TupleId>,
}

#[derive(Debug, Clone)]
pub struct DominanceTree {
    scorer: Scorer,
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    size: usize,
    bounds: bool,
    visits: VisitStats,
}

impl DominanceTree {
    /// An empty tree over attributes with the given cardinalities, in level order.
    pub fn new(cardinalities: &[u16]) -> Result<Self> {
        Ok(Self::with_scorer(Scorer::new(cardinalities)?))
    }

    pub fn for_query(relation: &Relation, query: &Query) -> Result<Self> {
        Self::new(&query.cardinalities(relation))
    }

    pub fn with_scorer(scorer: Scorer) -> Self {
        let root = Node::new(scorer.cardinalities().first().copied().unwrap_or(0) as usize);
        Self {
            scorer,
            nodes: vec![root],
            free: Vec::new(),
            root: 0,
            size: 0,
            bounds: true,
            visits: VisitStats::default(),
        }
    }

    /// Enables or disables min/max score early termination.
    pub fn with_bounds(mut self, enabled: bool) -> Self {
        self.bounds = enabled;
        self
    }

    pub fn bounds_enabled(&self) -> bool {
        self.bounds
    }

    pub fn scorer(&self) -> &Scorer {
        &self.scorer
    }

    pub fn levels(&self) -> usize {
        self.scorer.len()
    }

    /// Number of stored tuples (not distinct combinations).
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn visits(&self) -> VisitStats {
        self.visits
    }

    pub fn reset_visits(&mut self) {
        self.visits = VisitStats::default();
    }

    /// Live nodes including the root.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    fn alloc(&mut self, level: usize) -> u32 {
        let fanout = if level < self.levels() {
            self.scorer.cardinalities()[level] as usize
        } else {
            0
        };
        match self.free.pop() {
            Some(h) => {
                self.nodes[h as usize] = Node::new(fanout);
                h
            }
            None => {
                self.nodes.push(Node::new(fanout));
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn release(&mut self, handle: u32) {
        let node = &mut self.nodes[handle as usize];
        node.children = Box::new([]);
        node.ids = Vec::new();
        self.free.push(handle);
    }

    pub fn insert(&mut self, id: TupleId, values: &[Value]) {
        let score = self.scorer.score(values);
        let mut cur = self.root;
        for (level, &v) in values.iter().enumerate() {
            let node = &mut self.nodes[cur as usize];
            node.min_score = node.min_score.min(score);
            node.max_score = node.max_score.max(score);
            let slot = node.children[v as usize];
            cur = if slot == NIL {
                let child = self.alloc(level + 1);
                let node = &mut self.nodes[cur as usize];
                node.children[v as usize] = child;
                node.live_children += 1;
                child
            } else {
                slot
            };
        }
        let leaf = &mut self.nodes[cur as usize];
        leaf.min_score = score;
        leaf.max_score = score;
        leaf.ids.push(id);
        self.size += 1;
    }

    pub fn insert_tuple(&mut self, t: &ProjectedTuple) {
        self.insert(t.id, &t.values);
    }

    /// True iff some stored tuple dominates `values`.
    ///
    /// At every level the search follows the child edges with value at least
    /// `values[l]`, largest first. Reaching a leaf along such a path means the
    /// leaf is at least as good everywhere, so it dominates unless it is the
    /// very same combination.
    pub fn is_dominated(&mut self, values: &[Value]) -> bool {
        if self.size == 0 {
            self.visits.nodes += 1;
            return false;
        }
        let score = self.scorer.score(values);
        self.dominated_rec(self.root, 0, score, values, score)
    }

    fn dominated_rec(
        &mut self,
        node: u32,
        level: usize,
        bound: u128,
        t: &[Value],
        t_score: u128,
    ) -> bool {
        self.visits.nodes += 1;
        let n = &self.nodes[node as usize];
        if self.bounds && bound > n.max_score {
            return false;
        }
        if level == t.len() {
            return n.max_score != t_score;
        }
        let want = t[level] as usize;
        let weight = self.scorer.weight(level);
        for v in (want..n.children.len()).rev() {
            let child = self.nodes[node as usize].children[v];
            if child == NIL {
                self.visits.empty_links += 1;
                continue;
            }
            let child_bound = bound + (v - want) as u128 * weight;
            if self.dominated_rec(child, level + 1, child_bound, t, t_score) {
                return true;
            }
        }
        false
    }

    /// Removes every stored tuple dominated by `values`; returns how many
    /// tuples were removed.
    pub fn prune_dominated(&mut self, values: &[Value]) -> usize {
        self.prune_dominated_ids(values).len()
    }

    /// As [`prune_dominated`](Self::prune_dominated), returning the removed ids.
    pub fn prune_dominated_ids(&mut self, values: &[Value]) -> Vec<TupleId> {
        let mut removed = Vec::new();
        if self.size == 0 {
            self.visits.nodes += 1;
            return removed;
        }
        let score = self.scorer.score(values);
        self.prune_rec(self.root, 0, score, values, score, &mut removed);
        self.size -= removed.len();
        removed
    }

    /// Returns true when `node` became empty and must be unlinked by the caller.
    fn prune_rec(
        &mut self,
        node: u32,
        level: usize,
        bound: u128,
        t: &[Value],
        t_score: u128,
        removed: &mut Vec<TupleId>,
    ) -> bool {
        self.visits.nodes += 1;
        let n = &mut self.nodes[node as usize];
        if self.bounds && n.min_score > bound {
            return false;
        }
        if level == t.len() {
            if n.max_score != t_score {
                removed.append(&mut n.ids);
                return true;
            }
            return false;
        }
        let want = t[level] as usize;
        let weight = self.scorer.weight(level);
        let before = removed.len();
        for v in (0..=want.min(n.children.len() - 1)).rev() {
            let child = self.nodes[node as usize].children[v];
            if child == NIL {
                self.visits.empty_links += 1;
                continue;
            }
            let child_bound = bound - (want - v) as u128 * weight;
            if self.prune_rec(child, level + 1, child_bound, t, t_score, removed) {
                self.release(child);
                let n = &mut self.nodes[node as usize];
                n.children[v] = NIL;
                n.live_children -= 1;
            }
        }
        if removed.len() > before {
            self.refresh_bounds(node);
        }
        node != self.root && self.nodes[node as usize].live_children == 0
    }

    fn refresh_bounds(&mut self, node: u32) {
        let (mut lo, mut hi) = (u128::MAX, 0u128);
        for &c in self.nodes[node as usize].children.iter() {
            if c != NIL {
                let child = &self.nodes[c as usize];
                lo = lo.min(child.min_score);
                hi = hi.max(child.max_score);
            }
        }
        let n = &mut self.nodes[node as usize];
        n.min_score = lo;
        n.max_score = hi;
    }

    /// Every stored leaf in ascending value order.
    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(self.levels());
        self.collect(self.root, &mut path, &mut out);
        out
    }

    fn collect(&self, node: u32, path: &mut Vec<Value>, out: &mut Vec<Leaf>) {
        let n = &self.nodes[node as usize];
        if path.len() == self.levels() {
            if !n.ids.is_empty() {
                out.push(Leaf {
                    values: path.clone(),
                    score: n.max_score,
                    ids: n.ids.clone(),
                });
            }
            return;
        }
        for (v, &c) in n.children.iter().enumerate() {
            if c != NIL {
                path.push(v as Value);
                self.collect(c, path, out);
                path.pop();
            }
        }
    }

    /// Stored tuple ids in ascending order.
    pub fn tuple_ids(&self) -> Vec<TupleId> {
        let mut ids: Vec<TupleId> = self.leaves().into_iter().flat_map(|l| l.ids).collect();
        ids.sort_unstable();
        ids
    }

    /// Stored tuples with their values, in ascending id order.
    pub fn tuples(&self) -> Vec<ProjectedTuple> {
        let mut out: Vec<ProjectedTuple> = self
            .leaves()
            .into_iter()
            .flat_map(|leaf| {
                let values = leaf.values;
                leaf.ids.into_iter().map(move |id| ProjectedTuple {
                    id,
                    values: values.clone(),
                })
            })
            .collect();
        out.sort_unstable_by_key(|t| t.id);
        out
    }

    /// Full structural audit. Checks score bounds, leaf depth, leaf scores,
    /// node liveness and the stored-tuple count.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let mut path = Vec::new();
        let (count, _) = self.audit_rec(self.root, &mut path)?;
        if count != self.size {
            return Err(format!("size {} but {} ids stored", self.size, count));
        }
        let root = &self.nodes[self.root as usize];
        if self.size == 0 && root.live_children != 0 {
            return Err("empty tree with live root children".into());
        }
        Ok(())
    }

    fn audit_rec(
        &self,
        node: u32,
        path: &mut Vec<Value>,
    ) -> std::result::Result<(usize, Option<(u128, u128)>), String> {
        let n = &self.nodes[node as usize];
        if path.len() == self.levels() {
            if n.ids.is_empty() {
                return Err(format!("empty leaf at {path:?}"));
            }
            let score = self.scorer.score(path);
            if n.min_score != score || n.max_score != score {
                return Err(format!(
                    "leaf {path:?} has bounds {}..{} but score {score}",
                    n.min_score, n.max_score
                ));
            }
            return Ok((n.ids.len(), Some((score, score))));
        }
        if !n.ids.is_empty() {
            return Err(format!("internal node at {path:?} holds ids"));
        }
        let mut count = 0;
        let mut live = 0;
        let mut bounds: Option<(u128, u128)> = None;
        for (v, &c) in n.children.iter().enumerate() {
            if c == NIL {
                continue;
            }
            live += 1;
            path.push(v as Value);
            let (k, b) = self.audit_rec(c, path)?;
            path.pop();
            count += k;
            if let Some((lo, hi)) = b {
                bounds = Some(match bounds {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
        }
        if live != n.live_children as usize {
            return Err(format!(
                "node at {path:?} records {} live children, found {live}",
                n.live_children
            ));
        }
        match bounds {
            None if node != self.root => Err(format!("empty internal node at {path:?}")),
            None => Ok((0, None)),
            Some((lo, hi)) => {
                if (n.min_score, n.max_score) != (lo, hi) {
                    Err(format!(
                        "node at {path:?} has bounds {}..{}, subtree spans {lo}..{hi}",
                        n.min_score, n.max_score
                    ))
                } else {
                    Ok((count, Some((lo, hi))))
                }
            }
        }
    }
}
