use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{perturb, softmax, tda_block, HeadConfig, HeadModel, Mode, Prediction};
use crate::corpus::{Dataset, EmbeddingRecord};
use crate::metrics::MetricsReport;
use crate::{rng, Error, Result};

/// `-ln probs[label]`.
pub fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    -probs[label].ln()
}

/// Gradient of the mean batch loss; same layout as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Mean cross-entropy over `(features, label)` pairs and its gradient with
/// respect to the weights and bias: `dL/dz = softmax(z) - onehot(label)`.
pub fn loss_and_gradient(model: &HeadModel, features: &[Vec<f64>], labels: &[usize]) -> Result<(f64, Gradient)> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let f = model.feature_width;
    let mut grad = Gradient {
        weights: vec![0.0; model.weights.len()],
        bias: vec![0.0; model.num_labels],
    };
    let scale = 1.0 / features.len() as f64;
    let mut loss = 0.0;
    for (x, &label) in features.iter().zip(labels) {
        if label >= model.num_labels {
            return Err(Error::InvalidLabel {
                label,
                num_labels: model.num_labels,
            });
        }
        let probs = softmax(&model.logits(x)?);
        loss += cross_entropy(&probs, label) * scale;
        for (k, p) in probs.iter().enumerate() {
            let dz = (p - if k == label { 1.0 } else { 0.0 }) * scale;
            grad.bias[k] += dz;
            grad.weights[k * f..(k + 1) * f]
                .iter_mut()
                .zip(x)
                .for_each(|(g, xi)| *g += dz * xi);
        }
    }
    Ok((loss, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

struct Adam {
    params: AdamParams,
    lr: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(lr: f64, n: usize) -> Self {
        Self {
            params: AdamParams::default(),
            lr,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    /// `params` holds weights then bias, matching `grads`.
    fn update<'a>(&mut self, params: impl Iterator<Item = &'a mut f64>, grads: impl Iterator<Item = f64>) {
        self.step += 1;
        let AdamParams { beta1, beta2, eps } = self.params;
        let c1 = 1.0 - beta1.powi(self.step);
        let c2 = 1.0 - beta2.powi(self.step);
        for (((p, g), m), v) in params.zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
}

fn check_records(records: &[EmbeddingRecord], cfg: &HeadConfig) -> Result<()> {
    for (i, r) in records.iter().enumerate() {
        if r.vector.len() != cfg.record_width() {
            return Err(Error::shape(
                format!("record width {}", cfg.record_width()),
                format!("{} at record {i}", r.vector.len()),
            ));
        }
        if r.label >= cfg.num_labels {
            return Err(Error::InvalidLabel {
                label: r.label,
                num_labels: cfg.num_labels,
            });
        }
    }
    Ok(())
}

/// Mini-batch Adam on mean cross-entropy for `cfg.epochs` epochs; returns the
/// final-epoch model.
///
/// Each epoch shuffles the records and draws one dropout mask per record, so
/// `tda` features come from that epoch's dropped-out copy. Features that do
/// not depend on the mask (`tda_from_raw`, `tda_attn`) are computed once.
/// The result is a pure function of the records and the config.
pub fn train(records: &[EmbeddingRecord], cfg: &HeadConfig) -> Result<HeadModel> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty dataset".into()));
    }
    check_records(records, cfg)?;
    let static_tda = cfg.tda_from_raw || cfg.variant == super::Variant::TdaAttn;
    let cached: Vec<Option<Vec<f64>>> = if static_tda {
        records
            .par_iter()
            .map(|r| tda_block(cfg, &r.vector, &r.vector[..cfg.input_dim]))
            .collect::<Result<_>>()?
    } else {
        vec![None; records.len()]
    };

    let mut model = HeadModel::init(cfg);
    let mut adam = Adam::new(cfg.learning_rate, model.weights.len() + model.bias.len());
    let mut order: Vec<usize> = (0..records.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::indexed_stream(cfg.seed, "head/shuffle", epoch as u64));
        let mut noise = rng::indexed_stream(cfg.seed, "head/dropout", epoch as u64);
        let mut epoch_features = Vec::with_capacity(records.len());
        for &i in &order {
            let record = &records[i].vector;
            let mut x = perturb(cfg, &record[..cfg.input_dim], Mode::Train, &mut noise);
            let tda = match &cached[i] {
                Some(t) => Some(t.clone()),
                None if static_tda => None,
                None => tda_block(cfg, record, &x)?,
            };
            if let Some(t) = tda {
                x.extend(t);
            }
            epoch_features.push(x);
        }
        for (batch_x, batch_idx) in epoch_features
            .chunks(cfg.batch_size)
            .zip(order.chunks(cfg.batch_size))
        {
            let labels: Vec<usize> = batch_idx.iter().map(|&i| records[i].label).collect();
            let (_, grad) = loss_and_gradient(&model, batch_x, &labels)?;
            let HeadModel { weights, bias, .. } = &mut model;
            adam.update(
                weights.iter_mut().chain(bias.iter_mut()),
                grad.weights.into_iter().chain(grad.bias),
            );
        }
    }
    Ok(model)
}

/// Eval-mode predictions for every record, in input order.
pub fn predict_batch(model: &HeadModel, cfg: &HeadConfig, records: &[EmbeddingRecord]) -> Result<Vec<Prediction>> {
    model.check_config(cfg)?;
    records.par_iter().map(|r| model.predict(cfg, &r.vector)).collect()
}

/// Eval-mode metrics of `model` on `dataset`.
pub fn evaluate(model: &HeadModel, cfg: &HeadConfig, dataset: &Dataset) -> Result<MetricsReport> {
    if dataset.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on an empty dataset".into()));
    }
    check_records(&dataset.records, cfg)?;
    let predicted: Vec<usize> = predict_batch(model, cfg, &dataset.records)?
        .into_iter()
        .map(|p| p.label)
        .collect();
    let mut names = dataset.manifest.label_names.clone();
    names.truncate(cfg.num_labels);
    names.extend((names.len()..cfg.num_labels).map(|k| format!("label-{k}")));
    MetricsReport::from_predictions(&dataset.labels(), &predicted, names)
}
