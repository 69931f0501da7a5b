//! Variant sweeps over seeded datasets, result tables and PCA export.

mod pca;
mod tables;

pub use pca::{pca_project, write_pca_csv, PcaProjection};
pub use tables::{results_csv, results_markdown, summarize, VariantSummary};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    generate_mean_shift, generate_structure_shift, load_dataset, regroup_labels, Dataset, LabelMapping,
    MeanShiftParams, Split, StructureShiftParams,
};
use crate::features::default_reshape;
use crate::head::{evaluate, train, HeadConfig, Variant};
use crate::metrics::{compare_gain, Gain, MetricsReport};
use crate::persistence::{DiagramOptions, PersistenceDiagram};
use crate::{features, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    MeanShift(MeanShiftParams),
    StructureShift(StructureShiftParams),
}

impl GeneratorSpec {
    /// Generates `split` with `per_class` overriding the generator's counts.
    pub fn generate(&self, split: Split, per_class: &[usize]) -> Result<Dataset> {
        match self {
            GeneratorSpec::MeanShift(p) => generate_mean_shift(
                &MeanShiftParams {
                    per_class: per_class.to_vec(),
                    ..p.clone()
                },
                split,
            ),
            GeneratorSpec::StructureShift(p) => generate_structure_shift(
                &StructureShiftParams {
                    per_class: per_class.to_vec(),
                    ..p.clone()
                },
                split,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// A directory holding `train.emb1`, `validation.emb1` and `test.emb1`.
    Directory(PathBuf),
    Generated { generator: GeneratorSpec, sizes: SplitSizes },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanVariant {
    pub name: String,
    /// Template; `input_dim`, `num_labels` and `seed` are filled in per run,
    /// and the reshape falls back to the closest-to-square one if it does not
    /// fit the data.
    pub config: HeadConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub data: DataSource,
    pub variants: Vec<PlanVariant>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub regroup: Option<LabelMapping>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Test-split indices whose persistence diagrams are written out.
    #[serde(default)]
    pub diagram_samples: Vec<usize>,
}

/// Learning rate used by the built-in benchmark plans. The heads are trained
/// from scratch on frozen embeddings, which needs a far larger step than
/// fine-tuning a transformer end to end.
pub const BENCHMARK_LEARNING_RATE: f64 = 1e-3;

fn template(name: &str, variant: Variant, dim: usize, labels: usize) -> PlanVariant {
    let mut config = HeadConfig::new(variant, dim, labels);
    config.learning_rate = BENCHMARK_LEARNING_RATE;
    PlanVariant {
        name: name.to_string(),
        config,
    }
}

impl ExperimentPlan {
    /// Six classes built from 1..=6 row clusters: 200/50/50 per class,
    /// width 768 reshaped 24x32; plain, tda and gaussian heads.
    pub fn structure_shift_benchmark(seeds: Vec<u64>) -> Self {
        let (classes, dim, rows) = (6, 768, 24);
        Self {
            name: "structure-shift".into(),
            data: DataSource::Generated {
                generator: GeneratorSpec::StructureShift(StructureShiftParams::new(
                    classes,
                    vec![200],
                    dim,
                    rows,
                    2024,
                )),
                sizes: SplitSizes {
                    train: vec![200],
                    validation: vec![50],
                    test: vec![50],
                },
            },
            variants: vec![
                template("plain", Variant::Plain, dim, classes),
                template("tda", Variant::Tda, dim, classes),
                template("gaussian", Variant::Gaussian, dim, classes),
            ],
            seeds,
            regroup: None,
            output_dir: None,
            diagram_samples: Vec::new(),
        }
    }

    /// Twenty Gaussian classes around orthogonal unit means: 200/50/50 per
    /// class, width 768; plain and tda heads.
    pub fn mean_shift_benchmark(seeds: Vec<u64>) -> Self {
        let (classes, dim) = (20, 768);
        Self {
            name: "mean-shift".into(),
            data: DataSource::Generated {
                generator: GeneratorSpec::MeanShift(MeanShiftParams::new(classes, vec![200], dim, 2024)),
                sizes: SplitSizes {
                    train: vec![200],
                    validation: vec![50],
                    test: vec![50],
                },
            },
            variants: vec![
                template("plain", Variant::Plain, dim, classes),
                template("tda", Variant::Tda, dim, classes),
            ],
            seeds,
            regroup: None,
            output_dir: None,
            diagram_samples: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidPlan("plan has no variants".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidPlan("plan has no seeds".into()));
        }
        Ok(())
    }
}

/// Train, validation and test data of one plan.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Option<Dataset>,
    pub test: Dataset,
}

pub fn load_splits(source: &DataSource) -> Result<Splits> {
    match source {
        DataSource::Directory(dir) => {
            let load = |split: Split| -> Result<Option<Dataset>> {
                let path = dir.join(format!("{split}.emb1"));
                if path.exists() {
                    Ok(Some(load_dataset(&path)?.with_split(split)))
                } else {
                    Ok(None)
                }
            };
            let missing = |s: Split| Error::InvalidPlan(format!("missing {s} split in {}", dir.display()));
            Ok(Splits {
                train: load(Split::Train)?.ok_or_else(|| missing(Split::Train))?,
                validation: load(Split::Validation)?,
                test: load(Split::Test)?.ok_or_else(|| missing(Split::Test))?,
            })
        }
        DataSource::Generated { generator, sizes } => Ok(Splits {
            train: generator.generate(Split::Train, &sizes.train)?,
            validation: if sizes.validation.iter().all(|&n| n == 0) {
                None
            } else {
                Some(generator.generate(Split::Validation, &sizes.validation)?)
            },
            test: generator.generate(Split::Test, &sizes.test)?,
        }),
    }
}

/// One trained (variant, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: String,
    pub seed: u64,
    pub config: HeadConfig,
    pub test: MetricsReport,
    /// Logged only; never used for model selection.
    pub validation: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub plan: String,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<VariantSummary>,
}

impl ExperimentResults {
    pub fn runs_of<'a>(&'a self, variant: &'a str) -> impl Iterator<Item = &'a RunRecord> {
        self.runs.iter().filter(move |r| r.variant == variant)
    }

    pub fn summary(&self, variant: &str) -> Option<&VariantSummary> {
        self.summaries.iter().find(|s| s.variant == variant)
    }
}

fn resolve_config(template: &HeadConfig, train: &Dataset, seed: u64) -> Result<HeadConfig> {
    let mut cfg = template.clone();
    cfg.num_labels = train.num_labels();
    cfg.seed = seed;
    if cfg.variant != Variant::TdaAttn {
        cfg.input_dim = train.dim();
    }
    if cfg.variant == Variant::Tda && cfg.reshape.width() != cfg.input_dim {
        cfg.reshape = default_reshape(cfg.input_dim)?;
    }
    cfg.validate()?;
    if cfg.record_width() != train.dim() {
        return Err(Error::InvalidPlan(format!(
            "variant {} expects records of width {}, data has {}",
            cfg.variant,
            cfg.record_width(),
            train.dim()
        )));
    }
    Ok(cfg)
}

/// Trains every variant for every seed on the train split with a fixed epoch
/// budget, reports test metrics (and validation metrics for the log), and
/// attaches each variant's macro-F1 gain over the plain run of the same seed.
/// Writes `results.csv`, `results.md` and any requested diagrams when the plan
/// names an output directory.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ExperimentResults> {
    plan.validate()?;
    let mut splits = load_splits(&plan.data)?;
    if let Some(mapping) = &plan.regroup {
        splits.train = regroup_labels(&splits.train, mapping)?;
        splits.test = regroup_labels(&splits.test, mapping)?;
        if let Some(v) = &splits.validation {
            splits.validation = Some(regroup_labels(v, mapping)?);
        }
    }
    let mut runs = Vec::with_capacity(plan.variants.len() * plan.seeds.len());
    for variant in &plan.variants {
        for &seed in &plan.seeds {
            let cfg = resolve_config(&variant.config, &splits.train, seed)?;
            let model = train(&splits.train.records, &cfg)?;
            let test = evaluate(&model, &cfg, &splits.test)?;
            let validation = match &splits.validation {
                Some(v) if !v.is_empty() => Some(evaluate(&model, &cfg, v)?),
                _ => None,
            };
            runs.push(RunRecord {
                variant: variant.name.clone(),
                seed,
                config: cfg,
                test,
                validation,
            });
        }
    }
    attach_gains(&mut runs);
    let results = ExperimentResults {
        plan: plan.name.clone(),
        summaries: summarize(&runs, &plan.variants),
        runs,
    };
    if let Some(dir) = &plan.output_dir {
        write_outputs(dir, plan, &splits, &results)?;
    }
    Ok(results)
}

fn attach_gains(runs: &mut [RunRecord]) {
    let baselines: Vec<(u64, String, MetricsReport)> = runs
        .iter()
        .filter(|r| r.config.variant == Variant::Plain)
        .map(|r| (r.seed, r.variant.clone(), r.test.clone()))
        .collect();
    for run in runs.iter_mut().filter(|r| r.config.variant != Variant::Plain) {
        if let Some((_, name, base)) = baselines.iter().find(|(seed, ..)| *seed == run.seed) {
            if let Ok(percent) = compare_gain(base, &run.test) {
                run.test.gain = Some(Gain {
                    baseline: name.clone(),
                    percent,
                });
            }
        }
    }
}

fn write_outputs(dir: &Path, plan: &ExperimentPlan, splits: &Splits, results: &ExperimentResults) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), results_csv(results))?;
    std::fs::write(dir.join("results.md"), results_markdown(results))?;
    if !plan.diagram_samples.is_empty() {
        let reshape = results
            .runs
            .iter()
            .find(|r| r.config.variant == Variant::Tda)
            .map(|r| r.config.reshape)
            .map_or_else(|| default_reshape(splits.test.dim()), Ok)?;
        for &i in &plan.diagram_samples {
            let record = splits.test.records.get(i).ok_or_else(|| {
                Error::InvalidPlan(format!("diagram sample {i} beyond test split of {}", splits.test.len()))
            })?;
            let cloud = features::reshape_embedding(&record.vector, &reshape)?;
            let opts = DiagramOptions {
                max_dim: 1,
                ..Default::default()
            };
            let dgm = PersistenceDiagram::compute(&cloud, opts)?;
            std::fs::write(dir.join(format!("diagram_{i}.csv")), dgm.to_csv())?;
        }
    }
    Ok(())
}
