use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Dataset, EmbeddingRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelTarget {
    Coarse(String),
    Drop,
}

/// Fine label name → coarse label name (or removal). Coarse indices follow
/// the order of `coarse_names`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelMapping {
    pub coarse_names: Vec<String>,
    pub targets: BTreeMap<String, LabelTarget>,
}

impl LabelMapping {
    pub fn new<S: Into<String>>(coarse_names: impl IntoIterator<Item = S>) -> Self {
        Self {
            coarse_names: coarse_names.into_iter().map(Into::into).collect(),
            targets: BTreeMap::new(),
        }
    }

    pub fn map(mut self, fine: impl Into<String>, coarse: impl Into<String>) -> Self {
        self.targets.insert(fine.into(), LabelTarget::Coarse(coarse.into()));
        self
    }

    pub fn drop_label(mut self, fine: impl Into<String>) -> Self {
        self.targets.insert(fine.into(), LabelTarget::Drop);
        self
    }

    pub fn identity(names: &[String]) -> Self {
        names
            .iter()
            .fold(Self::new(names.iter().cloned()), |m, n| m.map(n.clone(), n.clone()))
    }

    /// Keeps the listed labels unchanged and drops every other label of `all`.
    pub fn keep_only(all: &[String], keep: &[&str]) -> Self {
        let kept: Vec<String> = all.iter().filter(|n| keep.contains(&n.as_str())).cloned().collect();
        all.iter().fold(Self::new(kept), |m, n| {
            if keep.contains(&n.as_str()) {
                m.map(n.clone(), n.clone())
            } else {
                m.drop_label(n.clone())
            }
        })
    }
}

/// Relabels every record through `mapping`, dropping records whose label maps
/// to [`LabelTarget::Drop`]. Vectors are moved over untouched.
pub fn regroup_labels(dataset: &Dataset, mapping: &LabelMapping) -> Result<Dataset> {
    let mut seen = HashSet::new();
    if let Some(dup) = mapping.coarse_names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(Error::Mapping(format!("duplicate coarse label {dup:?}")));
    }
    let mut resolved: Vec<Option<usize>> = Vec::with_capacity(dataset.num_labels());
    for fine in &dataset.manifest.label_names {
        let target = match mapping.targets.get(fine) {
            Some(LabelTarget::Drop) => None,
            Some(LabelTarget::Coarse(c)) => Some(
                mapping
                    .coarse_names
                    .iter()
                    .position(|n| n == c)
                    .ok_or_else(|| Error::Mapping(format!("{fine:?} maps to undeclared label {c:?}")))?,
            ),
            None if dataset.records.iter().any(|r| &r.label_name == fine) => {
                return Err(Error::Mapping(format!("label {fine:?} is not mapped")));
            }
            None => None,
        };
        resolved.push(target);
    }
    let records = dataset
        .records
        .iter()
        .filter_map(|r| {
            resolved[r.label].map(|label| EmbeddingRecord {
                label,
                label_name: mapping.coarse_names[label].clone(),
                vector: r.vector.clone(),
            })
        })
        .collect();
    let mut out = Dataset::new(
        mapping.coarse_names.clone(),
        dataset.dim(),
        dataset.manifest.split,
        records,
    )?;
    out.manifest.generator = dataset.manifest.generator.clone();
    Ok(out)
}
