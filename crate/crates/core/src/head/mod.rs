//! Linear-softmax attribution head.
//!
//! ```text
//! embedding ─ dropout ─ [gaussian noise] ─┬──────────────────────────┐
//!                                          └─ reshape ─ H0 ─ flatten ─ concat ─ linear ─ softmax
//! ```
//!
//! Dropout and noise are active only in training mode. The `tda` variant takes
//! its topological features from the dropped-out embedding (or from the raw
//! embedding with `tda_from_raw`); `tda_attn` takes them from an attention
//! matrix appended to the embedding in the input record.

mod io;
mod train;

pub use io::{config_path, decode_model, encode_model, load_model, save_model, THD1_MAGIC, THD1_VERSION};
pub use train::{cross_entropy, evaluate, loss_and_gradient, predict_batch, train, AdamParams, Gradient};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::features::{
    default_reshape, extract_tda_features, extract_tda_features_attn, AttentionSpec, ReshapeSpec,
};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Tda,
    Gaussian,
    TdaAttn,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Plain, Variant::Tda, Variant::Gaussian, Variant::TdaAttn];

    pub fn tag(self) -> u8 {
        match self {
            Variant::Plain => 0,
            Variant::Tda => 1,
            Variant::Gaussian => 2,
            Variant::TdaAttn => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.tag() == tag)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Tda => "tda",
            Variant::Gaussian => "gaussian",
            Variant::TdaAttn => "tda_attn",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s || (s == "tda-attn" && *v == Variant::TdaAttn))
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub variant: Variant,
    /// Width of the pooled embedding.
    pub input_dim: usize,
    pub num_labels: usize,
    pub dropout_p: f64,
    pub gaussian_sigma: f64,
    pub reshape: ReshapeSpec,
    /// Attention-matrix shape for `tda_attn`.
    pub attention: Option<AttentionSpec>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Compute `tda` features once from the raw embedding instead of from
    /// every dropped-out copy.
    #[serde(default)]
    pub tda_from_raw: bool,
}

impl HeadConfig {
    /// Defaults: dropout 0.3, learning rate 2e-5, batch 16, 5 epochs, noise
    /// sigma 0.1, closest-to-square reshape, seed 42.
    pub fn new(variant: Variant, input_dim: usize, num_labels: usize) -> Self {
        Self {
            variant,
            input_dim,
            num_labels,
            dropout_p: 0.3,
            gaussian_sigma: 0.1,
            reshape: default_reshape(input_dim).unwrap_or(ReshapeSpec::new(1, input_dim)),
            attention: None,
            learning_rate: 2e-5,
            batch_size: 16,
            epochs: 5,
            seed: rng::DEFAULT_SEED,
            tda_from_raw: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::InvalidParams(format!("dropout_p {} not in [0, 1)", self.dropout_p)));
        }
        if self.num_labels < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 labels, got {}", self.num_labels)));
        }
        if self.input_dim == 0 {
            return Err(Error::InvalidParams("input_dim must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParams("batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParams(format!("learning rate {}", self.learning_rate)));
        }
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("gaussian_sigma {}", self.gaussian_sigma)));
        }
        match self.variant {
            Variant::Tda => self.reshape.validate(self.input_dim)?,
            Variant::TdaAttn => {
                let a = self.attention.ok_or_else(|| {
                    Error::InvalidParams("tda_attn needs an attention shape".into())
                })?;
                if a.rows < 2 || a.cols == 0 || a.expected_pairs == 0 {
                    return Err(Error::InvalidParams(format!("bad attention shape {a:?}")));
                }
            }
            Variant::Plain | Variant::Gaussian => {}
        }
        Ok(())
    }

    /// Width of the vector entering the linear layer.
    pub fn feature_width(&self) -> usize {
        match self.variant {
            Variant::Plain | Variant::Gaussian => self.input_dim,
            Variant::Tda => self.input_dim + self.reshape.feature_len(),
            Variant::TdaAttn => self.input_dim + self.attention.map_or(0, |a| a.feature_len()),
        }
    }

    /// Width of an input record: the embedding, followed for `tda_attn` by the
    /// row-major attention matrix.
    pub fn record_width(&self) -> usize {
        match self.variant {
            Variant::TdaAttn => self.input_dim + self.attention.map_or(0, |a| a.width()),
            _ => self.input_dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probs: Vec<f64>,
    pub label: usize,
}

/// Numerically stable softmax (the maximum logit is subtracted first).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Inverted dropout followed, for the gaussian variant, by additive noise.
/// Identity in eval mode.
pub fn perturb<R: Rng + ?Sized>(cfg: &HeadConfig, embedding: &[f64], mode: Mode, rng: &mut R) -> Vec<f64> {
    if mode == Mode::Eval {
        return embedding.to_vec();
    }
    let keep_scale = 1.0 / (1.0 - cfg.dropout_p);
    let mut x: Vec<f64> = embedding
        .iter()
        .map(|&v| if rng.gen::<f64>() < cfg.dropout_p { 0.0 } else { v * keep_scale })
        .collect();
    if cfg.variant == Variant::Gaussian && cfg.gaussian_sigma > 0.0 {
        for v in &mut x {
            let e: f64 = StandardNormal.sample(rng);
            *v += cfg.gaussian_sigma * e;
        }
    }
    x
}

/// Topological block appended after the embedding: from `perturbed` (or the
/// raw embedding) for `tda`, from the attention matrix for `tda_attn`.
pub(crate) fn tda_block(cfg: &HeadConfig, record: &[f64], perturbed: &[f64]) -> Result<Option<Vec<f64>>> {
    match cfg.variant {
        Variant::Plain | Variant::Gaussian => Ok(None),
        Variant::Tda => {
            let source = if cfg.tda_from_raw { &record[..cfg.input_dim] } else { perturbed };
            Ok(Some(extract_tda_features(source, &cfg.reshape)?.into_vec()))
        }
        Variant::TdaAttn => {
            let spec = cfg
                .attention
                .ok_or_else(|| Error::InvalidParams("tda_attn needs an attention shape".into()))?;
            Ok(Some(extract_tda_features_attn(&record[cfg.input_dim..], &spec)?.into_vec()))
        }
    }
}

/// Weights of the linear layer; `weights` is `num_labels x feature_width`
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadModel {
    pub variant: Variant,
    pub input_dim: usize,
    pub num_labels: usize,
    pub feature_width: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl HeadModel {
    pub fn zeros(cfg: &HeadConfig) -> Self {
        let f = cfg.feature_width();
        Self {
            variant: cfg.variant,
            input_dim: cfg.input_dim,
            num_labels: cfg.num_labels,
            feature_width: f,
            weights: vec![0.0; cfg.num_labels * f],
            bias: vec![0.0; cfg.num_labels],
        }
    }

    /// Weights uniform in `±1/sqrt(F)` from the config seed, zero bias.
    pub fn init(cfg: &HeadConfig) -> Self {
        let mut model = Self::zeros(cfg);
        let bound = 1.0 / (model.feature_width as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let mut r = rng::stream(cfg.seed, "head/init");
        model.weights.iter_mut().for_each(|w| *w = dist.sample(&mut r));
        model
    }

    pub fn check_config(&self, cfg: &HeadConfig) -> Result<()> {
        let want = (cfg.variant, cfg.input_dim, cfg.num_labels, cfg.feature_width());
        let have = (self.variant, self.input_dim, self.num_labels, self.feature_width);
        if want != have {
            return Err(Error::shape(
                format!("model {:?}/D={}/L={}/F={}", want.0, want.1, want.2, want.3),
                format!("{:?}/D={}/L={}/F={}", have.0, have.1, have.2, have.3),
            ));
        }
        if self.weights.len() != self.num_labels * self.feature_width || self.bias.len() != self.num_labels {
            return Err(Error::shape("consistent weight buffers", "mismatched lengths"));
        }
        Ok(())
    }

    pub fn row(&self, label: usize) -> &[f64] {
        &self.weights[label * self.feature_width..(label + 1) * self.feature_width]
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.feature_width {
            return Err(Error::shape(format!("{} features", self.feature_width), features.len()));
        }
        Ok((0..self.num_labels)
            .map(|k| {
                self.row(k)
                    .iter()
                    .zip(features)
                    .fold(self.bias[k], |acc, (w, x)| acc + w * x)
            })
            .collect())
    }

    /// The vector entering the linear layer for one input record.
    pub fn features<R: Rng + ?Sized>(
        &self,
        cfg: &HeadConfig,
        record: &[f64],
        mode: Mode,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        self.check_config(cfg)?;
        if record.len() != cfg.record_width() {
            return Err(Error::shape(format!("record width {}", cfg.record_width()), record.len()));
        }
        let mut x = perturb(cfg, &record[..cfg.input_dim], mode, rng);
        if let Some(tda) = tda_block(cfg, record, &x)? {
            x.extend(tda);
        }
        debug_assert_eq!(x.len(), cfg.feature_width());
        Ok(x)
    }

    pub fn forward<R: Rng + ?Sized>(
        &self,
        cfg: &HeadConfig,
        record: &[f64],
        mode: Mode,
        rng: &mut R,
    ) -> Result<Prediction> {
        let x = self.features(cfg, record, mode, rng)?;
        let probs = softmax(&self.logits(&x)?);
        Ok(Prediction {
            label: argmax(&probs),
            probs,
        })
    }

    /// Eval-mode forward pass.
    pub fn predict(&self, cfg: &HeadConfig, record: &[f64]) -> Result<Prediction> {
        self.forward(cfg, record, Mode::Eval, &mut rand::rngs::mock::StepRng::new(0, 0))
    }
}
