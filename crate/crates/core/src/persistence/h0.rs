use super::{DistanceMatrix, PersistencePair};
use crate::{Error, Result};

/// Union-find over `0..n` with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets holding `a` and `b`; false if they were already one set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// A 1-simplex `{lo, hi}` (lo < hi) with its filtration value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Edge {
    pub lo: usize,
    pub hi: usize,
    pub value: f64,
}

/// Edges with value <= `threshold` in filtration order.
pub(super) fn sorted_edges(d: &DistanceMatrix, threshold: f64) -> Vec<Edge> {
    let n = d.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for lo in 0..n {
        for hi in (lo + 1)..n {
            let value = d.get(lo, hi);
            if value <= threshold {
                edges.push(Edge { lo, hi, value });
            }
        }
    }
    // Enumeration is already lexicographic, so a stable sort on value gives
    // (value, lo, hi) order.
    edges.sort_by(|a, b| a.value.total_cmp(&b.value));
    edges
}

/// Kruskal pass over `edges`; returns the edges that merged two components.
pub(super) fn killing_edges(n: usize, edges: &[Edge]) -> Vec<Edge> {
    let mut sets = DisjointSets::new(n);
    let mut killers = Vec::with_capacity(n.saturating_sub(1));
    for e in edges {
        if sets.union(e.lo, e.hi) {
            killers.push(*e);
            if killers.len() + 1 == n {
                break;
            }
        }
    }
    killers
}

/// Finite zero-dimensional pairs, sorted by death.
///
/// Every point is born at radius 0; each merge of two components at edge
/// length `w` records a death at `w`. The `r - 1` deaths are the edge weights
/// of a minimum spanning tree. The class that survives forever is not part of
/// the returned list.
pub fn persistence_h0(d: &DistanceMatrix) -> Result<Vec<PersistencePair>> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "zero-dimensional persistence needs at least 2 points, got {n}"
        )));
    }
    let edges = sorted_edges(d, f64::INFINITY);
    Ok(killing_edges(n, &edges)
        .into_iter()
        .map(|e| PersistencePair::new(0, 0.0, e.value))
        .collect())
}
