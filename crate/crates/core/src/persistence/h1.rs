use std::collections::HashMap;

use super::h0::{killing_edges, sorted_edges, Edge};
use super::{DistanceMatrix, PersistencePair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct H1Options {
    /// Keep pairs with birth == death.
    pub keep_zero_persistence: bool,
}

/// Filtration index of every triangle with diameter <= threshold, keyed by
/// its sorted vertex triple.
struct Triangles {
    values: Vec<f64>,
    index: HashMap<(u32, u32, u32), usize>,
}

impl Triangles {
    fn build(d: &DistanceMatrix, threshold: f64) -> Self {
        let n = d.len();
        let mut tris = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let ab = d.get(a, b);
                if ab > threshold {
                    continue;
                }
                for c in (b + 1)..n {
                    let diam = ab.max(d.get(a, c)).max(d.get(b, c));
                    if diam <= threshold {
                        tris.push((diam, a as u32, b as u32, c as u32));
                    }
                }
            }
        }
        // Lexicographic enumeration + stable sort = (diameter, a, b, c) order.
        tris.sort_by(|x, y| x.0.total_cmp(&y.0));
        let values = tris.iter().map(|t| t.0).collect();
        let index = tris
            .iter()
            .enumerate()
            .map(|(k, &(_, a, b, c))| ((a, b, c), k))
            .collect();
        Self { values, index }
    }

    /// Sorted filtration indices of the triangles containing edge `e`.
    fn coboundary(&self, e: &Edge, n: usize) -> Vec<usize> {
        let mut col: Vec<usize> = (0..n)
            .filter(|&k| k != e.lo && k != e.hi)
            .filter_map(|k| {
                let mut v = [e.lo as u32, e.hi as u32, k as u32];
                v.sort_unstable();
                self.index.get(&(v[0], v[1], v[2])).copied()
            })
            .collect();
        col.sort_unstable();
        col
    }
}

/// Z/2 sum of two sorted index columns.
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// One-dimensional pairs of the Rips filtration truncated at `threshold`,
/// sorted by (birth, death). Loops still alive at the threshold get an
/// infinite death.
///
/// Edge coboundaries are reduced in reverse filtration order; the pivot of a
/// column is its earliest triangle. Edges that merged two components in the
/// zero-dimensional pass are cleared up front since they cannot create a
/// loop.
pub fn persistence_h1(
    d: &DistanceMatrix,
    threshold: f64,
    opts: H1Options,
) -> Result<Vec<PersistencePair>> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidInput(format!("threshold must be >= 0, got {threshold}")));
    }
    let n = d.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let edges = sorted_edges(d, threshold);
    let cleared: Vec<bool> = {
        let mut flags = vec![false; n * n];
        for e in killing_edges(n, &edges) {
            flags[e.lo * n + e.hi] = true;
        }
        flags
    };
    let triangles = Triangles::build(d, threshold);

    // pivot triangle -> reduced column owning it
    let mut owner: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut pairs = Vec::new();
    for e in edges.iter().rev() {
        if cleared[e.lo * n + e.hi] {
            continue;
        }
        let mut col = triangles.coboundary(e, n);
        loop {
            let Some(&pivot) = col.first() else {
                pairs.push(PersistencePair::new(1, e.value, f64::INFINITY));
                break;
            };
            match owner.get(&pivot) {
                Some(other) => col = add_columns(&col, other),
                None => {
                    let death = triangles.values[pivot];
                    if death > e.value || opts.keep_zero_persistence {
                        pairs.push(PersistencePair::new(1, e.value, death));
                    }
                    owner.insert(pivot, col);
                    break;
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.cmp_canonical(b));
    Ok(pairs)
}
