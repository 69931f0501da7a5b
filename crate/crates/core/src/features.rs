//! Fixed-length topological features from embedding vectors.
//!
//! A width-`D` embedding is reshaped row-major into an `r x c` point cloud,
//! its zero-dimensional persistence pairs are computed, and the `r - 1`
//! finite pairs are flattened into `(birth, death, persistence)` triples in
//! order of increasing death. The surviving component is left out since it
//! has no finite death.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::persistence::{pairwise_distances, persistence_h0, PersistencePair, PointCloud};
use crate::{Error, Result};

/// Row/column split of an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReshapeSpec {
    pub rows: usize,
    pub cols: usize,
    /// Accept `rows > cols`.
    #[serde(default)]
    pub allow_unstable: bool,
}

impl ReshapeSpec {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            allow_unstable: false,
        }
    }

    pub fn allowing_unstable(mut self, allow: bool) -> Self {
        self.allow_unstable = allow;
        self
    }

    pub fn width(&self) -> usize {
        self.rows * self.cols
    }

    /// Length of the feature vector this reshape produces.
    pub fn feature_len(&self) -> usize {
        3 * self.rows.saturating_sub(1)
    }

    /// Checks this reshape against an embedding of width `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.rows < 2 {
            return Err(Error::InvalidInput(format!(
                "reshape needs at least 2 rows, got {}",
                self.rows
            )));
        }
        if self.rows * self.cols != d {
            return Err(Error::shape(
                format!("width {} ({}x{})", self.width(), self.rows, self.cols),
                format!("width {d}"),
            ));
        }
        if self.rows > self.cols && !self.allow_unstable {
            return Err(Error::UnstableShape {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

/// Closest-to-square factorisation `rows x cols` of `d` with `rows <= cols`.
pub fn default_reshape(d: usize) -> Result<ReshapeSpec> {
    (2..)
        .take_while(|r| r * r <= d)
        .filter(|r| d.is_multiple_of(*r))
        .last()
        .map(|r| ReshapeSpec::new(r, d / r))
        .ok_or(Error::NoValidShape(d))
}

/// Point `i` of the result is `embedding[i*c .. (i+1)*c]`.
pub fn reshape_embedding(embedding: &[f64], spec: &ReshapeSpec) -> Result<PointCloud> {
    spec.validate(embedding.len())?;
    PointCloud::new(spec.rows, spec.cols, embedding.to_vec())
}

/// Flattened `(birth, death, persistence)` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct TdaFeatureVector(Vec<f64>);

impl TdaFeatureVector {
    pub fn from_pairs(pairs: &[PersistencePair]) -> Self {
        let mut sorted: Vec<&PersistencePair> = pairs.iter().filter(|p| !p.is_essential()).collect();
        sorted.sort_by(|a, b| a.death.total_cmp(&b.death));
        Self(
            sorted
                .into_iter()
                .flat_map(|p| [p.birth, p.death, p.death - p.birth])
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn triples(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.0.chunks_exact(3).map(|t| [t[0], t[1], t[2]])
    }

    pub fn deaths(&self) -> impl Iterator<Item = f64> + '_ {
        self.triples().map(|t| t[1])
    }
}

fn h0_features(cloud: &PointCloud) -> Result<TdaFeatureVector> {
    let d = pairwise_distances(cloud)?;
    Ok(TdaFeatureVector::from_pairs(&persistence_h0(&d)?))
}

/// reshape → distances → H0 pairs → flatten. Always `3 * (rows - 1)` long.
pub fn extract_tda_features(embedding: &[f64], spec: &ReshapeSpec) -> Result<TdaFeatureVector> {
    h0_features(&reshape_embedding(embedding, spec)?)
}

/// [`extract_tda_features`] over many embeddings, in parallel, output in input order.
pub fn extract_batch(embeddings: &[Vec<f64>], spec: &ReshapeSpec) -> Result<Vec<TdaFeatureVector>> {
    embeddings
        .par_iter()
        .map(|e| extract_tda_features(e, spec))
        .collect()
}

/// Shape of an attention matrix used directly as a point cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionSpec {
    pub rows: usize,
    pub cols: usize,
    /// Number of triples after length normalisation.
    pub expected_pairs: usize,
}

impl AttentionSpec {
    /// `expected_pairs = rows - 1`, the natural pair count.
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            expected_pairs: rows.saturating_sub(1),
        }
    }

    pub fn width(&self) -> usize {
        self.rows * self.cols
    }

    pub fn feature_len(&self) -> usize {
        3 * self.expected_pairs
    }
}

/// H0 triples of a row-major `rows x cols` attention matrix, normalised to
/// `3 * expected_pairs` entries: zero-padded when short, and truncated by
/// dropping the largest-death triples when long.
pub fn extract_tda_features_attn(attn: &[f64], spec: &AttentionSpec) -> Result<TdaFeatureVector> {
    if spec.rows < 2 {
        return Err(Error::InvalidInput(format!(
            "attention matrix needs at least 2 rows, got {}",
            spec.rows
        )));
    }
    if spec.expected_pairs == 0 {
        return Err(Error::InvalidInput("expected_pairs must be at least 1".into()));
    }
    if attn.len() != spec.width() {
        return Err(Error::shape(
            format!("{} values ({}x{})", spec.width(), spec.rows, spec.cols),
            format!("{} values", attn.len()),
        ));
    }
    let cloud = PointCloud::new(spec.rows, spec.cols, attn.to_vec())?;
    let mut values = h0_features(&cloud)?.into_vec();
    values.resize(spec.feature_len(), 0.0);
    Ok(TdaFeatureVector(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_reshape_picks_closest_square() {
        assert_eq!(default_reshape(768).unwrap(), ReshapeSpec::new(24, 32));
        assert_eq!(default_reshape(64).unwrap(), ReshapeSpec::new(8, 8));
        assert_eq!(default_reshape(6).unwrap(), ReshapeSpec::new(2, 3));
        assert!(matches!(default_reshape(13), Err(Error::NoValidShape(13))));
        assert!(matches!(default_reshape(3), Err(Error::NoValidShape(3))));
    }

    #[test]
    fn reshape_is_row_major() {
        let cloud = reshape_embedding(&[1.0, 2.0, 3.0, 4.0], &ReshapeSpec::new(2, 2)).unwrap();
        assert_eq!(cloud.point(0), &[1.0, 2.0]);
        assert_eq!(cloud.point(1), &[3.0, 4.0]);
    }

    #[test]
    fn reshape_errors() {
        let v = vec![0.5; 768];
        let cloud = reshape_embedding(&v, &ReshapeSpec::new(24, 32)).unwrap();
        assert_eq!((cloud.n_points(), cloud.dim()), (24, 32));
        assert!(matches!(
            reshape_embedding(&v, &ReshapeSpec::new(32, 24)),
            Err(Error::UnstableShape { rows: 32, cols: 24 })
        ));
        assert!(reshape_embedding(&v, &ReshapeSpec::new(32, 24).allowing_unstable(true)).is_ok());
        assert!(matches!(
            reshape_embedding(&v, &ReshapeSpec::new(20, 32)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn two_points_at_distance_five() {
        let f = extract_tda_features(&[0.0, 0.0, 3.0, 4.0], &ReshapeSpec::new(2, 2)).unwrap();
        assert_eq!(f.as_slice(), &[0.0, 5.0, 5.0]);
    }

    #[test]
    fn width_768_gives_69_features() {
        let v: Vec<f64> = (0..768).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let f = extract_tda_features(&v, &ReshapeSpec::new(24, 32)).unwrap();
        assert_eq!(f.len(), 69);
        assert!(f.deaths().collect::<Vec<_>>().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn attention_padding_and_truncation() {
        let attn = [0.0, 0.0, 1.0, 0.0, 3.0, 0.0];
        let spec = AttentionSpec {
            rows: 3,
            cols: 2,
            expected_pairs: 5,
        };
        let f = extract_tda_features_attn(&attn, &spec).unwrap();
        assert_eq!(f.len(), 15);
        assert_eq!(&f.as_slice()[..6], &[0.0, 1.0, 1.0, 0.0, 2.0, 2.0]);
        assert!(f.as_slice()[6..].iter().all(|&v| v == 0.0));

        let short = AttentionSpec { expected_pairs: 1, ..spec };
        assert_eq!(extract_tda_features_attn(&attn, &short).unwrap().as_slice(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn attention_errors() {
        let one_row = AttentionSpec::new(1, 3);
        assert!(matches!(
            extract_tda_features_attn(&[0.0; 3], &one_row),
            Err(Error::InvalidInput(_))
        ));
        assert!(extract_tda_features_attn(&[0.0; 5], &AttentionSpec::new(3, 2)).is_err());
    }
}
