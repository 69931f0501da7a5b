//! Reference implementations that the test suites check the library against.
//!
//! Nothing here shares code with `topotext`: distances are recomputed with a
//! naive double loop, minimum spanning trees come from Prim's algorithm,
//! one-dimensional persistence comes from the textbook reduction of the full
//! boundary matrix, and classification metrics are recomputed from the
//! confusion-matrix definitions.

#![allow(clippy::needless_range_loop, clippy::while_let_loop)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};

pub fn naive_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..points[i].len() {
                let diff = points[i][k] - points[j][k];
                acc += diff * diff;
            }
            d[i][j] = acc.sqrt();
        }
    }
    d
}

/// Edge weights of a minimum spanning tree (Prim, dense O(n^2)), ascending.
pub fn prim_mst_weights(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    if n == 0 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut weights = Vec::with_capacity(n - 1);
    for step in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if step > 0 {
            weights.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] && d[u][v] < best[v] {
                best[v] = d[u][v];
            }
        }
    }
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    weights
}

#[derive(Clone)]
struct Simplex {
    value: f64,
    vertices: Vec<usize>,
}

/// One-dimensional (birth, death) pairs from the standard left-to-right
/// reduction of the full boundary matrix (vertices, edges and triangles with
/// diameter <= threshold), without clearing or any other shortcut. Sorted by
/// (birth, death); essential loops have death = inf.
pub fn naive_h1(d: &[Vec<f64>], threshold: f64, keep_zero: bool) -> Vec<(f64, f64)> {
    let n = d.len();
    let mut simplices = Vec::new();
    for i in 0..n {
        simplices.push(Simplex { value: 0.0, vertices: vec![i] });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if d[i][j] <= threshold {
                simplices.push(Simplex { value: d[i][j], vertices: vec![i, j] });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let v = d[i][j].max(d[i][k]).max(d[j][k]);
                if v <= threshold {
                    simplices.push(Simplex { value: v, vertices: vec![i, j, k] });
                }
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap()
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then(a.vertices.cmp(&b.vertices))
    });
    let position = |verts: &[usize]| -> usize {
        simplices.iter().position(|s| s.vertices == verts).expect("face present")
    };
    let mut columns: Vec<BTreeSet<usize>> = simplices
        .iter()
        .map(|s| {
            if s.vertices.len() == 1 {
                return BTreeSet::new();
            }
            (0..s.vertices.len())
                .map(|skip| {
                    let face: Vec<usize> = s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    position(&face)
                })
                .collect()
        })
        .collect();

    let m = simplices.len();
    let mut low_of: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        loop {
            let Some(&low) = columns[j].iter().next_back() else { break };
            let Some(k) = (0..j).find(|&k| columns[k].iter().next_back() == Some(&low)) else {
                break;
            };
            let other = columns[k].clone();
            let merged: BTreeSet<usize> =
                columns[j].symmetric_difference(&other).copied().collect();
            columns[j] = merged;
        }
        low_of[j] = columns[j].iter().next_back().copied();
    }

    let mut killed = vec![false; m];
    let mut pairs = Vec::new();
    for j in 0..m {
        if let Some(low) = low_of[j] {
            killed[low] = true;
            if simplices[j].vertices.len() == 3 {
                let (b, dth) = (simplices[low].value, simplices[j].value);
                if dth > b || keep_zero {
                    pairs.push((b, dth));
                }
            }
        }
    }
    for j in 0..m {
        if simplices[j].vertices.len() == 2 && low_of[j].is_none() && !killed[j] {
            pairs.push((simplices[j].value, f64::INFINITY));
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pairs
}

/// Metrics recomputed from confusion-matrix definitions (rows = truth,
/// columns = prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct HandMetrics {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

pub fn hand_metrics(cm: &[Vec<u64>]) -> HandMetrics {
    let l = cm.len();
    let total: u64 = cm.iter().flatten().sum();
    let mut precision = vec![0.0; l];
    let mut recall = vec![0.0; l];
    let mut f1 = vec![0.0; l];
    let mut macro_sum = 0.0;
    let mut macro_count = 0;
    let mut weighted = 0.0;
    for c in 0..l {
        let tp = cm[c][c] as f64;
        let support: u64 = cm[c].iter().sum();
        let predicted: u64 = (0..l).map(|r| cm[r][c]).sum();
        precision[c] = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        recall[c] = if support == 0 { 0.0 } else { tp / support as f64 };
        // F1 = 2TP / (2TP + FP + FN)
        let denom = 2.0 * tp + (predicted as f64 - tp) + (support as f64 - tp);
        f1[c] = if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
        if support > 0 || predicted > 0 {
            macro_sum += f1[c];
            macro_count += 1;
        }
        weighted += f1[c] * support as f64;
    }
    let trace: u64 = (0..l).map(|c| cm[c][c]).sum();
    HandMetrics {
        precision,
        recall,
        f1,
        accuracy: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
        macro_f1: if macro_count == 0 { 0.0 } else { macro_sum / macro_count as f64 },
        weighted_f1: if total == 0 { 0.0 } else { weighted / total as f64 },
    }
}

/// Central difference of `f` along coordinate `i`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Eigenvalues (descending) and matching unit eigenvectors of a dense
/// symmetric matrix.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = matrix.len();
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut out: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    out
}

/// Orthonormal `n x n` matrix (rows) from the QR factorisation of `gaussian`,
/// a row-major `n x n` matrix of standard normal draws.
pub fn orthonormal_from(gaussian: &[f64], n: usize) -> Vec<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, gaussian);
    let q = m.qr().q();
    (0..n).map(|i| q.row(i).iter().copied().collect()).collect()
}
