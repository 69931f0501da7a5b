//! THD1 model files (little-endian):
//!
//! ```text
//! "THD1" | u32 version=1 | u8 variant tag | u32 D | u32 L | u32 F
//! L*F f64 weights (row-major) | L f64 bias
//! ```
//!
//! The full [`HeadConfig`] lives in a JSON sidecar next to the model file.

use std::path::{Path, PathBuf};

use super::{HeadConfig, HeadModel, Variant};
use crate::{Error, Result};

pub const THD1_MAGIC: &[u8; 4] = b"THD1";
pub const THD1_VERSION: u32 = 1;

pub fn encode_model(model: &HeadModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + 8 * (model.weights.len() + model.bias.len()));
    out.extend_from_slice(THD1_MAGIC);
    out.extend_from_slice(&THD1_VERSION.to_le_bytes());
    out.push(model.variant.tag());
    for n in [model.input_dim, model.num_labels, model.feature_width] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in model.weights.iter().chain(&model.bias) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<HeadModel> {
    if bytes.len() < 4 || &bytes[..4] != THD1_MAGIC {
        return Err(Error::Format("not a THD1 model file".into()));
    }
    if bytes.len() < 21 {
        return Err(Error::CorruptFile("truncated THD1 header".into()));
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let version = u32_at(4) as u32;
    if version != THD1_VERSION {
        return Err(Error::Format(format!("unsupported THD1 version {version}")));
    }
    let variant = Variant::from_tag(bytes[8])
        .ok_or_else(|| Error::CorruptFile(format!("unknown variant tag {}", bytes[8])))?;
    let (input_dim, num_labels, feature_width) = (u32_at(9), u32_at(13), u32_at(17));
    let n_values = num_labels
        .checked_mul(feature_width)
        .and_then(|w| w.checked_add(num_labels))
        .ok_or_else(|| Error::CorruptFile("THD1 dimensions overflow".into()))?;
    let payload = &bytes[21..];
    if payload.len() != 8 * n_values {
        return Err(Error::CorruptFile(format!(
            "expected {} payload bytes, found {}",
            8 * n_values,
            payload.len()
        )));
    }
    let mut values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let weights = values.by_ref().take(num_labels * feature_width).collect();
    let bias = values.collect();
    Ok(HeadModel {
        variant,
        input_dim,
        num_labels,
        feature_width,
        weights,
        bias,
    })
}

/// `model.thd1` → `model.config.json`.
pub fn config_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("config.json")
}

pub fn save_model(path: &Path, model: &HeadModel, cfg: &HeadConfig) -> Result<()> {
    model.check_config(cfg)?;
    std::fs::write(path, encode_model(model))?;
    let mut json = serde_json::to_string_pretty(cfg)?;
    json.push('\n');
    std::fs::write(config_path(path), json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(HeadModel, HeadConfig)> {
    let model = decode_model(&std::fs::read(path)?)?;
    let cfg: HeadConfig = serde_json::from_str(&std::fs::read_to_string(config_path(path))?)?;
    model
        .check_config(&cfg)
        .map_err(|e| Error::CorruptFile(format!("model and config disagree: {e}")))?;
    Ok((model, cfg))
}
