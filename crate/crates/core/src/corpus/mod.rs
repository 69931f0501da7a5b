//! Labelled embedding datasets: interchange formats, synthetic generators and
//! label regrouping.

mod csv;
mod emb1;
mod regroup;
mod synth;

pub use self::csv::{read_csv, read_csv_from, write_csv, write_csv_to};
pub use emb1::{decode_emb1, encode_emb1, read_emb1, write_emb1, EMB1_MAGIC, EMB1_VERSION};
pub use regroup::{regroup_labels, LabelMapping, LabelTarget};
pub use synth::{generate_mean_shift, generate_structure_shift, MeanShiftParams, StructureShiftParams};

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidInput(format!("unknown split {s:?}"))),
        }
    }
}

/// One labelled embedding row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub label: usize,
    pub label_name: String,
    pub vector: Vec<f64>,
}

/// Parameters of the generator that produced a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub kind: String,
    pub seed: u64,
    pub per_class: Vec<usize>,
    /// Largest class count over smallest.
    pub imbalance_ratio: f64,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub n_samples: usize,
    pub dim: usize,
    pub label_names: Vec<String>,
    pub split: Option<Split>,
    pub generator: Option<GeneratorInfo>,
}

/// Records plus their manifest. Every record has width `manifest.dim` and a
/// label below `manifest.label_names.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub records: Vec<EmbeddingRecord>,
}

impl Dataset {
    /// Builds a dataset, checking widths, labels and the label-name list.
    /// `dim` is only consulted when `records` is empty.
    pub fn new(
        label_names: Vec<String>,
        dim: usize,
        split: Option<Split>,
        records: Vec<EmbeddingRecord>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = label_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidInput(format!("duplicate label name {dup:?}")));
        }
        let dim = records.first().map_or(dim, |r| r.vector.len());
        for (i, r) in records.iter().enumerate() {
            if r.vector.len() != dim {
                return Err(Error::shape(
                    format!("width {dim}"),
                    format!("width {} at record {i}", r.vector.len()),
                ));
            }
            if r.label >= label_names.len() {
                return Err(Error::InvalidLabel {
                    label: r.label,
                    num_labels: label_names.len(),
                });
            }
        }
        Ok(Self {
            manifest: DatasetManifest {
                n_samples: records.len(),
                dim,
                label_names,
                split,
                generator: None,
            },
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.manifest.dim
    }

    pub fn num_labels(&self) -> usize {
        self.manifest.label_names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_labels()];
        for r in &self.records {
            counts[r.label] += 1;
        }
        counts
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.manifest.split = Some(split);
        self
    }

    /// Keeps a uniformly random `fractions[k]` share (rounded) of class `k`,
    /// preserving record order.
    pub fn subsample_classes(&self, fractions: &[f64], seed: u64) -> Result<Self> {
        if fractions.len() != self.num_labels() {
            return Err(Error::InvalidParams(format!(
                "{} fractions for {} labels",
                fractions.len(),
                self.num_labels()
            )));
        }
        if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::InvalidParams(format!("fraction {f} outside [0, 1]")));
        }
        let mut keep = vec![false; self.len()];
        for (label, &fraction) in fractions.iter().enumerate() {
            let members: Vec<usize> = (0..self.len()).filter(|&i| self.records[i].label == label).collect();
            let take = (members.len() as f64 * fraction).round() as usize;
            let mut rng = rng::indexed_stream(seed, "subsample", label as u64);
            for k in index::sample(&mut rng, members.len(), take) {
                keep[members[k]] = true;
            }
        }
        let records = self
            .records
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(r, _)| r.clone())
            .collect();
        let mut out = Self::new(self.manifest.label_names.clone(), self.dim(), self.manifest.split, records)?;
        out.manifest.generator = self.manifest.generator.clone();
        Ok(out)
    }
}

/// `<dir>/<stem>.manifest.json` for the data file `<dir>/<stem>.<ext>`.
pub fn manifest_path(data_path: &Path) -> PathBuf {
    let stem = data_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    data_path.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_manifest(data_path: &Path, manifest: &DatasetManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(manifest_path(data_path), text)?;
    Ok(())
}

pub fn read_manifest(data_path: &Path) -> Result<Option<DatasetManifest>> {
    let path = manifest_path(data_path);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&std::fs::read_to_string(path)?)?))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads an EMB1 or CSV (by extension) file, picking up split and generator
/// details from a sidecar manifest when one exists.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let mut ds = if is_csv(path) { read_csv(path)? } else { read_emb1(path)? };
    if let Some(m) = read_manifest(path)? {
        if m.n_samples != ds.len() || m.dim != ds.dim() || m.label_names != ds.manifest.label_names {
            return Err(Error::CorruptFile(format!(
                "manifest {} disagrees with its data file",
                manifest_path(path).display()
            )));
        }
        ds.manifest.split = m.split;
        ds.manifest.generator = m.generator;
    }
    Ok(ds)
}

/// Writes EMB1 (or CSV, by extension) plus the sidecar manifest.
pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    if is_csv(path) {
        write_csv(path, ds)?;
    } else {
        write_emb1(path, ds)?;
    }
    write_manifest(path, &ds.manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(label: usize, name: &str, v: &[f64]) -> EmbeddingRecord {
        EmbeddingRecord {
            label,
            label_name: name.into(),
            vector: v.to_vec(),
        }
    }

    #[test]
    fn dataset_validation() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(Dataset::new(names.clone(), 2, None, vec![rec(0, "a", &[1.0, 2.0])]).is_ok());
        assert!(matches!(
            Dataset::new(names.clone(), 2, None, vec![rec(2, "c", &[1.0, 2.0])]),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(Dataset::new(
            names.clone(),
            2,
            None,
            vec![rec(0, "a", &[1.0, 2.0]), rec(1, "b", &[1.0])]
        )
        .is_err());
        assert!(Dataset::new(vec!["a".into(), "a".into()], 1, None, vec![]).is_err());
    }

    #[test]
    fn subsample_keeps_requested_share() {
        let names = vec!["human".to_string(), "machine".to_string()];
        let records = (0..200).map(|i| rec(i % 2, &names[i % 2], &[i as f64])).collect();
        let ds = Dataset::new(names, 1, None, records).unwrap();
        let sub = ds.subsample_classes(&[1.0, 0.1], 3).unwrap();
        assert_eq!(sub.class_counts(), vec![100, 10]);
        assert_eq!(sub, ds.subsample_classes(&[1.0, 0.1], 3).unwrap());
    }

    #[test]
    fn manifest_sidecar_name() {
        assert_eq!(
            manifest_path(Path::new("/tmp/x/train.emb1")),
            PathBuf::from("/tmp/x/train.manifest.json")
        );
    }
}
