//! Seeded synthetic multi-author corpora.
//!
//! Both generators are pure functions of their parameters, the seed and the
//! split tag. Label 0 is always named `human`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, EmbeddingRecord, GeneratorInfo, Split};
use crate::{rng, Error, Result};

/// Gaussian classes around mutually orthogonal means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanShiftParams {
    pub classes: usize,
    /// Samples per class; a single entry applies to every class.
    pub per_class: Vec<usize>,
    pub dim: usize,
    /// Norm of every class mean.
    pub shift_norm: f64,
    /// Per-coordinate standard deviation around the class mean.
    pub noise_std: f64,
    pub seed: u64,
}

impl MeanShiftParams {
    pub fn new(classes: usize, per_class: Vec<usize>, dim: usize, seed: u64) -> Self {
        Self {
            classes,
            per_class,
            dim,
            shift_norm: 1.0,
            noise_std: 0.25,
            seed,
        }
    }
}

/// Zero-mean classes that differ only in how many clusters their reshaped
/// rows form: class `k` places its rows in `k + 1` Gaussian clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureShiftParams {
    pub classes: usize,
    pub per_class: Vec<usize>,
    pub dim: usize,
    /// Rows of the reshape; each row is a point in `dim / rows` dimensions.
    pub rows: usize,
    /// Standard deviation of points around their cluster centre.
    pub cluster_spread: f64,
    /// Standard deviation of cluster centres.
    pub center_spread: f64,
    pub seed: u64,
}

impl StructureShiftParams {
    pub fn new(classes: usize, per_class: Vec<usize>, dim: usize, rows: usize, seed: u64) -> Self {
        Self {
            classes,
            per_class,
            dim,
            rows,
            cluster_spread: 0.05,
            center_spread: 1.0,
            seed,
        }
    }
}

pub(crate) fn class_names(classes: usize) -> Vec<String> {
    (0..classes)
        .map(|k| if k == 0 { "human".to_string() } else { format!("machine-{k}") })
        .collect()
}

fn expand_counts(classes: usize, per_class: &[usize]) -> Result<Vec<usize>> {
    if classes < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 classes, got {classes}")));
    }
    match per_class.len() {
        1 => Ok(vec![per_class[0]; classes]),
        n if n == classes => Ok(per_class.to_vec()),
        n => Err(Error::InvalidParams(format!("{n} per-class counts for {classes} classes"))),
    }
}

fn imbalance_ratio(counts: &[usize]) -> f64 {
    let max = counts.iter().copied().max().unwrap_or(0) as f64;
    let min = counts.iter().copied().min().unwrap_or(0) as f64;
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn finish(
    kind: &str,
    seed: u64,
    counts: Vec<usize>,
    params: serde_json::Value,
    dim: usize,
    split: Split,
    vectors: Vec<(usize, Vec<f64>)>,
) -> Result<Dataset> {
    let names = class_names(counts.len());
    let records = vectors
        .into_iter()
        .map(|(label, vector)| EmbeddingRecord {
            label,
            label_name: names[label].clone(),
            vector,
        })
        .collect();
    let mut ds = Dataset::new(names, dim, Some(split), records)?;
    ds.manifest.generator = Some(GeneratorInfo {
        kind: kind.to_string(),
        seed,
        imbalance_ratio: imbalance_ratio(&counts),
        per_class: counts,
        params,
    });
    Ok(ds)
}

fn normal_vec<R: Rng>(rng: &mut R, n: usize, std: f64) -> Vec<f64> {
    (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Class `k` is `N(mu_k, noise_std^2 I)`; the `mu_k` are orthogonal with norm
/// `shift_norm` and shared by every split of the same seed.
pub fn generate_mean_shift(params: &MeanShiftParams, split: Split) -> Result<Dataset> {
    let counts = expand_counts(params.classes, &params.per_class)?;
    if params.dim < params.classes {
        return Err(Error::InvalidParams(format!(
            "{} orthogonal means do not fit in {} dimensions",
            params.classes, params.dim
        )));
    }
    if !(params.noise_std >= 0.0 && params.shift_norm >= 0.0) {
        return Err(Error::InvalidParams("noise_std and shift_norm must be >= 0".into()));
    }
    let mut mean_rng = rng::stream(params.seed, "mean-shift/means");
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(params.classes);
    while means.len() < params.classes {
        let mut v = normal_vec(&mut mean_rng, params.dim, 1.0);
        for m in &means {
            let dot: f64 = v.iter().zip(m).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(m).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            means.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    let mut vectors = Vec::with_capacity(counts.iter().sum());
    for (label, (&n, mean)) in counts.iter().zip(&means).enumerate() {
        let mut rng = rng::indexed_stream(params.seed, &format!("mean-shift/{split}"), label as u64);
        for _ in 0..n {
            let noise = normal_vec(&mut rng, params.dim, params.noise_std);
            let v = mean.iter().zip(noise).map(|(m, e)| params.shift_norm * m + e).collect();
            vectors.push((label, v));
        }
    }
    finish(
        "mean-shift",
        params.seed,
        counts,
        serde_json::to_value(params)?,
        params.dim,
        split,
        vectors,
    )
}

/// One structure-shift sample: `rows` points in `cols` dimensions drawn around
/// `clusters` random centres, recentred on their centroid, row-major.
fn structured_sample<R: Rng>(rng: &mut R, p: &StructureShiftParams, clusters: usize) -> Vec<f64> {
    let cols = p.dim / p.rows;
    let centers: Vec<Vec<f64>> = (0..clusters).map(|_| normal_vec(rng, cols, p.center_spread)).collect();
    let mut slots: Vec<usize> = (0..p.rows).collect();
    slots.shuffle(rng);
    let mut v = Vec::with_capacity(p.dim);
    for &slot in &slots {
        let center = &centers[slot % clusters];
        v.extend(center.iter().map(|c| c + p.cluster_spread * rng.sample::<f64, _>(StandardNormal)));
    }
    let mut centroid = vec![0.0; cols];
    for row in v.chunks_exact(cols) {
        centroid.iter_mut().zip(row).for_each(|(c, x)| *c += x / p.rows as f64);
    }
    for row in v.chunks_exact_mut(cols) {
        row.iter_mut().zip(&centroid).for_each(|(x, c)| *x -= c);
    }
    v
}

/// Class `k` reshapes into `k + 1` clusters of rows. Samples are emitted in
/// mirrored pairs `(x, -x)`, which share their geometry, and every class is
/// then recentred on its empirical mean, so all class means are zero and a
/// linear model on raw coordinates has nothing to separate.
pub fn generate_structure_shift(params: &StructureShiftParams, split: Split) -> Result<Dataset> {
    let counts = expand_counts(params.classes, &params.per_class)?;
    if params.rows < 2 || !params.dim.is_multiple_of(params.rows) {
        return Err(Error::InvalidParams(format!(
            "{} rows do not divide width {}",
            params.rows, params.dim
        )));
    }
    if params.classes > params.rows {
        return Err(Error::InvalidParams(format!(
            "{} classes need at least as many rows, got {}",
            params.classes, params.rows
        )));
    }
    let mut vectors = Vec::with_capacity(counts.iter().sum());
    for (label, &n) in counts.iter().enumerate() {
        let mut rng = rng::indexed_stream(params.seed, &format!("structure-shift/{split}"), label as u64);
        let mut class: Vec<Vec<f64>> = Vec::with_capacity(n);
        while class.len() < n {
            let v = structured_sample(&mut rng, params, label + 1);
            let mirrored = v.iter().map(|x| -x).collect();
            class.push(v);
            if class.len() < n {
                class.push(mirrored);
            }
        }
        if n > 0 {
            let mut mean = vec![0.0; params.dim];
            for v in &class {
                mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
            }
            mean.iter_mut().for_each(|m| *m /= n as f64);
            for v in &mut class {
                v.iter_mut().zip(&mean).for_each(|(x, m)| *x -= m);
            }
        }
        vectors.extend(class.into_iter().map(|v| (label, v)));
    }
    finish(
        "structure-shift",
        params.seed,
        counts,
        serde_json::to_value(params)?,
        params.dim,
        split,
        vectors,
    )
}
