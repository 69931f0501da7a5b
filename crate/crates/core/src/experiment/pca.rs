use std::io::Write;

use rand::Rng;

use crate::corpus::Dataset;
use crate::head::{HeadConfig, HeadModel, Mode};
use crate::rng;
use crate::{Error, Result};

const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub mean: Vec<f64>,
    /// Unit principal directions, largest variance first.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalue of each component.
    pub variances: Vec<f64>,
    /// `(label, coordinates)` per record, in dataset order.
    pub points: Vec<(usize, Vec<f64>)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let p = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
    }
}

fn fix_sign(v: &mut [f64]) {
    let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Top-`k` principal components of the centred feature rows by power
/// iteration with deflation. Features are the raw embeddings, or the head's
/// eval-mode input vectors (embedding plus TDA block) when a model is given.
/// Components have their largest-magnitude entry positive.
pub fn pca_project(dataset: &Dataset, model: Option<(&HeadModel, &HeadConfig)>, k: usize) -> Result<PcaProjection> {
    if dataset.is_empty() {
        return Err(Error::InvalidInput("PCA of an empty dataset".into()));
    }
    let rows: Vec<Vec<f64>> = match model {
        None => dataset.records.iter().map(|r| r.vector.clone()).collect(),
        Some((m, cfg)) => dataset
            .records
            .iter()
            .map(|r| m.features(cfg, &r.vector, Mode::Eval, &mut rand::rngs::mock::StepRng::new(0, 0)))
            .collect::<Result<_>>()?,
    };
    let d = rows[0].len();
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("cannot take {k} components of width {d}")));
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in &rows {
        mean.iter_mut().zip(r).for_each(|(m, x)| *m += x / n);
    }
    let centred: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in &centred {
        for i in 0..d {
            if r[i] == 0.0 {
                continue;
            }
            let ri = r[i] / n;
            cov[i].iter_mut().zip(r).for_each(|(c, x)| *c += ri * x);
        }
    }
    let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::DegenerateData("features have zero variance".into()));
    }

    let mut init = rng::stream(rng::DEFAULT_SEED, "pca/init");
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v: Vec<f64> = (0..d).map(|_| init.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, &components);
        normalize(&mut v);
        let mut lambda = 0.0;
        for _ in 0..MAX_ITERATIONS {
            let mut w: Vec<f64> = cov.iter().map(|row| dot(row, &v)).collect();
            orthogonalize(&mut w, &components);
            lambda = normalize(&mut w);
            if lambda <= trace * 1e-15 {
                // Remaining variance is nil: any orthogonal direction will do.
                lambda = 0.0;
                break;
            }
            let delta = w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            v = w;
            if delta < TOLERANCE {
                break;
            }
        }
        orthogonalize(&mut v, &components);
        normalize(&mut v);
        fix_sign(&mut v);
        for (i, row) in cov.iter_mut().enumerate() {
            row.iter_mut().zip(&v).for_each(|(c, vj)| *c -= lambda * v[i] * vj);
        }
        components.push(v);
        variances.push(lambda);
    }
    let points = dataset
        .records
        .iter()
        .zip(&centred)
        .map(|(rec, x)| (rec.label, components.iter().map(|c| dot(c, x)).collect()))
        .collect();
    Ok(PcaProjection {
        mean,
        components,
        variances,
        points,
    })
}

/// Writes `label,pc1,pc2,...` with label names from the dataset.
pub fn write_pca_csv<W: Write>(mut w: W, projection: &PcaProjection, label_names: &[String]) -> Result<()> {
    let k = projection.components.len();
    let header: Vec<String> = (1..=k).map(|i| format!("pc{i}")).collect();
    writeln!(w, "label,{}", header.join(","))?;
    for (label, coords) in &projection.points {
        let name = label_names.get(*label).cloned().unwrap_or_else(|| label.to_string());
        let coords: Vec<String> = coords.iter().map(|c| format!("{c}")).collect();
        writeln!(w, "{name},{}", coords.join(","))?;
    }
    Ok(())
}
