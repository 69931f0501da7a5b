//! Persistent homology of finite point clouds under the Vietoris–Rips
//! filtration, in homology dimensions 0 and 1.
//!
//! Dimension 0 is computed with Kruskal's algorithm over the sorted edge list.
//! Dimension 1 is computed by Z/2 column reduction of the coboundary matrix
//! (the anti-transpose of the boundary matrix) with clearing: edges that
//! already killed a connected component are never reduced.
//!
//! Simplices are totally ordered by (filtration value, dimension,
//! lexicographic vertex tuple), so diagrams are deterministic even when
//! distances tie.

mod diagram;
mod distance;
mod h0;
mod h1;

pub use diagram::{DiagramOptions, PersistenceDiagram};
pub use distance::{enclosing_radius, pairwise_distances, DistanceMatrix};
pub use h0::{persistence_h0, DisjointSets};
pub use h1::{persistence_h1, H1Options};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `r` points in `c`-dimensional Euclidean space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::InvalidInput(format!(
                "a point cloud needs at least 2 points, got {rows}"
            )));
        }
        if cols < 1 {
            return Err(Error::InvalidInput("points need at least one coordinate".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(
                format!("{} values ({rows}x{cols})", rows * cols),
                format!("{} values", data.len()),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate at point {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let cols = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().find(|p| p.len() != cols) {
            return Err(Error::shape(format!("{cols} coordinates"), format!("{}", bad.len())));
        }
        Self::new(points.len(), cols, points.concat())
    }

    pub fn n_points(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// One (dimension, birth, death) record. `death` is `+inf` for classes that
/// never die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        Self { dim, birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Total order by (dim, birth, death).
    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
    }
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    dim: usize,
    birth: f64,
    death: Option<f64>,
}

impl Serialize for PersistencePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairRepr {
            dim: self.dim,
            birth: self.birth,
            death: self.death.is_finite().then_some(self.death),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PersistencePair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PairRepr::deserialize(d)?;
        Ok(Self::new(r.dim, r.birth, r.death.unwrap_or(f64::INFINITY)))
    }
}
