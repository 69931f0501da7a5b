use super::PointCloud;
use crate::{Error, Result};

/// Dense symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a row-major `n x n` matrix after checking symmetry, a zero
    /// diagonal and finite non-negative entries.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::shape(format!("{} entries", n * n), data.len()));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("non-zero diagonal at {i}")));
            }
            for j in 0..i {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!("invalid distance {v} at ({i}, {j})")));
                }
                if v != data[j * n + i] {
                    return Err(Error::InvalidInput(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Euclidean distances between the rows of `cloud`.
pub fn pairwise_distances(cloud: &PointCloud) -> Result<DistanceMatrix> {
    let n = cloud.n_points();
    if cloud.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let p = cloud.point(i);
        for j in (i + 1)..n {
            let q = cloud.point(j);
            let sq: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            let d = sq.sqrt();
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// Smallest radius at which some point is within reach of every other point.
/// Past this radius the Rips complex is a cone and carries no finite features.
pub fn enclosing_radius(d: &DistanceMatrix) -> f64 {
    (0..d.len())
        .map(|i| d.row(i).iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}
