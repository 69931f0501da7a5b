use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand_distr::StandardNormal;
use rand::Rng;
use topotext::corpus::{
    generate_mean_shift, generate_structure_shift, load_dataset, save_dataset, Dataset, EmbeddingRecord,
    MeanShiftParams, Split, StructureShiftParams,
};
use topotext::experiment::{pca_project, results_markdown, run_plan, write_pca_csv, ExperimentPlan};
use topotext::features::{
    default_reshape, extract_batch, extract_tda_features_attn, reshape_embedding, AttentionSpec, ReshapeSpec,
};
use topotext::head::{evaluate, load_model, save_model, train as train_head, HeadConfig, Variant};
use topotext::metrics::{compare_gain, format_gain, format_gain_coarse, Gain, MetricsReport};
use topotext::persistence::{DiagramOptions, PersistenceDiagram, PointCloud};
use topotext::{rng, Error};

use crate::{
    BenchArgs, BenchmarkArg, CliError, CliResult, DiagramArgs, EvalArgs, ExperimentArgs, ExtractArgs, ExtractMode,
    GenArgs, GenKind, PcaArgs, SplitArg, TrainArgs, VariantArg,
};

/// Fills in whichever of rows/cols is missing from the width `d`.
fn resolve_shape(d: usize, rows: Option<usize>, cols: Option<usize>) -> topotext::Result<Option<(usize, usize)>> {
    let zero = || Error::InvalidInput("rows and cols must be positive".into());
    Ok(match (rows, cols) {
        (Some(0), _) | (_, Some(0)) => return Err(zero()),
        (Some(r), Some(c)) => Some((r, c)),
        (Some(r), None) => Some((r, d / r)),
        (None, Some(c)) => Some((d / c, c)),
        (None, None) => None,
    })
}

fn reshape_for(d: usize, rows: Option<usize>, cols: Option<usize>, allow_unstable: bool) -> topotext::Result<ReshapeSpec> {
    let spec = match resolve_shape(d, rows, cols)? {
        Some((r, c)) => ReshapeSpec::new(r, c),
        None => default_reshape(d)?,
    }
    .allowing_unstable(allow_unstable);
    spec.validate(d)?;
    Ok(spec)
}

fn attention_for(
    d: usize,
    rows: Option<usize>,
    cols: Option<usize>,
    expected_pairs: Option<usize>,
) -> CliResult<AttentionSpec> {
    let (r, c) = resolve_shape(d, rows, cols)?
        .ok_or_else(|| CliError::Usage("attention mode needs --rows and/or --cols".into()))?;
    let mut spec = AttentionSpec::new(r, c);
    if let Some(p) = expected_pairs {
        spec.expected_pairs = p;
    }
    Ok(spec)
}

pub fn extract(a: &ExtractArgs) -> CliResult {
    let started = Instant::now();
    let ds = load_dataset(&a.input)?;
    let d = ds.dim();
    let vectors: Vec<Vec<f64>> = match a.mode {
        ExtractMode::Pool => {
            let spec = reshape_for(d, a.rows, a.cols, a.allow_unstable)?;
            let embeddings: Vec<Vec<f64>> = ds.records.iter().map(|r| r.vector.clone()).collect();
            extract_batch(&embeddings, &spec)?.into_iter().map(|f| f.into_vec()).collect()
        }
        ExtractMode::Attn => {
            let spec = attention_for(d, a.rows, a.cols, a.expected_pairs)?;
            if spec.width() != d {
                return Err(Error::ShapeMismatch {
                    expected: format!("{}x{} attention matrices", spec.rows, spec.cols),
                    found: format!("records of width {d}"),
                }
                .into());
            }
            use rayon::prelude::*;
            ds.records
                .par_iter()
                .map(|r| extract_tda_features_attn(&r.vector, &spec).map(|f| f.into_vec()))
                .collect::<topotext::Result<_>>()?
        }
    };
    let out_dim = match (a.mode, vectors.first()) {
        (_, Some(v)) => v.len(),
        (ExtractMode::Pool, None) => reshape_for(d, a.rows, a.cols, a.allow_unstable)?.feature_len(),
        (ExtractMode::Attn, None) => attention_for(d, a.rows, a.cols, a.expected_pairs)?.feature_len(),
    };
    let records = ds
        .records
        .iter()
        .zip(vectors)
        .map(|(r, vector)| EmbeddingRecord {
            label: r.label,
            label_name: r.label_name.clone(),
            vector,
        })
        .collect();
    let out = Dataset::new(ds.manifest.label_names.clone(), out_dim, ds.manifest.split, records)?;
    save_dataset(&a.output, &out)?;
    println!(
        "{}: {} samples, dim {} -> {}: dim {}",
        a.input.display(),
        out.len(),
        d,
        a.output.display(),
        out_dim
    );
    eprintln!("extract took {:.3} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn variant_of(v: VariantArg) -> Variant {
    match v {
        VariantArg::Plain => Variant::Plain,
        VariantArg::Tda => Variant::Tda,
        VariantArg::Gaussian => Variant::Gaussian,
        VariantArg::TdaAttn => Variant::TdaAttn,
    }
}

pub fn train(a: &TrainArgs) -> CliResult {
    let started = Instant::now();
    let ds = load_dataset(&a.input)?;
    let variant = variant_of(a.variant);
    let labels = a.labels.unwrap_or(ds.num_labels());
    let mut cfg = HeadConfig::new(variant, ds.dim(), labels);
    match variant {
        Variant::Tda => cfg.reshape = reshape_for(ds.dim(), a.rows, a.cols, a.allow_unstable)?,
        Variant::TdaAttn => {
            let (r, c) = match (a.rows, a.cols) {
                (Some(r), Some(c)) if r > 0 && c > 0 => (r, c),
                _ => return Err(CliError::Usage("tda-attn needs positive --rows and --cols".into())),
            };
            let mut spec = AttentionSpec::new(r, c);
            if let Some(p) = a.expected_pairs {
                spec.expected_pairs = p;
            }
            cfg.input_dim = ds.dim().checked_sub(spec.width()).filter(|&d| d > 0).ok_or_else(|| {
                Error::ShapeMismatch {
                    expected: format!("embedding plus {r}x{c} attention matrix"),
                    found: format!("records of width {}", ds.dim()),
                }
            })?;
            cfg.reshape = default_reshape(cfg.input_dim).unwrap_or(ReshapeSpec::new(1, cfg.input_dim));
            cfg.attention = Some(spec);
        }
        Variant::Plain | Variant::Gaussian => {}
    }
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.lr;
    cfg.batch_size = a.batch;
    cfg.dropout_p = a.dropout;
    cfg.gaussian_sigma = a.sigma;
    cfg.seed = a.seed;
    cfg.tda_from_raw = a.tda_from_raw;
    cfg.validate()?;
    let model = train_head(&ds.records, &cfg)?;
    save_model(&a.output, &model, &cfg)?;
    println!(
        "trained {} head on {} samples: {} features, {} labels -> {}",
        variant,
        ds.len(),
        cfg.feature_width(),
        cfg.num_labels,
        a.output.display()
    );
    eprintln!("train took {:.3} s", started.elapsed().as_secs_f64());
    Ok(())
}

/// Model / Precision / Recall / Accuracy / Weighted F1 / Macro F1 / % Gain.
fn metrics_table(model: &str, r: &MetricsReport) -> String {
    let gain = r.gain.as_ref().map_or("-".to_string(), |g| {
        format!("{} ({})", format_gain_coarse(g.percent), format_gain(g.percent))
    });
    let mut out = String::new();
    out.push_str("| Model | Precision | Recall | Accuracy | Weighted F1 | Macro F1 | % Gain |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    out.push_str(&format!(
        "| {model} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {gain} |\n",
        r.macro_precision, r.macro_recall, r.accuracy, r.weighted_f1, r.macro_f1
    ));
    out.push_str("\n| Class | Precision | Recall | F1 | Support |\n|---|---|---|---|---|\n");
    for (name, c) in r.label_names.iter().zip(&r.per_class) {
        out.push_str(&format!(
            "| {name} | {:.4} | {:.4} | {:.4} | {} |\n",
            c.precision, c.recall, c.f1, c.support
        ));
    }
    out
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> topotext::Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_text(path: &Path, text: &str) -> topotext::Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn eval(a: &EvalArgs) -> CliResult {
    let (model, cfg) = load_model(&a.model)?;
    let ds = load_dataset(&a.input)?;
    let mut report = evaluate(&model, &cfg, &ds)?;
    if let Some(path) = &a.baseline {
        let base: MetricsReport = read_json(path)?;
        report.gain = Some(Gain {
            baseline: path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
            percent: compare_gain(&base, &report)?,
        });
    }
    if let Some(out) = &a.output {
        let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        text.push('\n');
        write_text(out, &text)?;
    }
    print!("{}", metrics_table(cfg.variant.as_str(), &report));
    Ok(())
}

pub fn gen(a: &GenArgs) -> CliResult {
    let split = match a.split {
        SplitArg::Train => Split::Train,
        SplitArg::Validation => Split::Validation,
        SplitArg::Test => Split::Test,
    };
    let ds = match a.kind {
        GenKind::MeanShift => {
            generate_mean_shift(&MeanShiftParams::new(a.classes, a.per_class.clone(), a.dim, a.seed), split)?
        }
        GenKind::StructureShift => generate_structure_shift(
            &StructureShiftParams::new(a.classes, a.per_class.clone(), a.dim, a.rows, a.seed),
            split,
        )?,
    };
    save_dataset(&a.output, &ds)?;
    println!(
        "{}: {} samples, dim {}, {} classes, split {}",
        a.output.display(),
        ds.len(),
        ds.dim(),
        ds.num_labels(),
        split
    );
    Ok(())
}

/// One point per non-empty line; a first line that does not parse as numbers
/// is taken as a header.
fn read_points(path: &Path) -> topotext::Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let parse = |line: &str| -> Option<Vec<f64>> { line.split(',').map(|t| t.trim().parse().ok()).collect() };
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match parse(line) {
            Some(p) => points.push(p),
            None if points.is_empty() && i == 0 => {}
            None => return Err(Error::Parse(format!("line {}: {line:?} is not a list of numbers", i + 1))),
        }
    }
    if points.is_empty() {
        return Err(Error::Format(format!("{} holds no points", path.display())));
    }
    if let Some(bad) = points.iter().position(|p| p.len() != points[0].len()) {
        return Err(Error::Format(format!(
            "point {} has {} coordinates, expected {}",
            bad + 1,
            points[bad].len(),
            points[0].len()
        )));
    }
    Ok(points)
}

pub fn diagram(a: &DiagramArgs) -> CliResult {
    let cloud = match (&a.points, &a.input) {
        (Some(p), _) => PointCloud::from_points(&read_points(p)?)?,
        (None, Some(input)) => {
            let ds = load_dataset(input)?;
            let record = ds.records.get(a.index).ok_or_else(|| {
                Error::InvalidInput(format!("index {} beyond {} records", a.index, ds.len()))
            })?;
            let spec = reshape_for(ds.dim(), a.rows, a.cols, a.allow_unstable)?;
            reshape_embedding(&record.vector, &spec)?
        }
        (None, None) => return Err(CliError::Usage("diagram needs --points or --input".into())),
    };
    let opts = DiagramOptions {
        max_dim: a.max_dim,
        threshold: a.threshold,
        ..Default::default()
    };
    let dgm = PersistenceDiagram::compute(&cloud, opts)?;
    let text = if a.json {
        let mut t = dgm.to_json()?;
        t.push('\n');
        t
    } else {
        dgm.to_csv()
    };
    match &a.output {
        Some(path) => write_text(path, &text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn bench(a: &BenchArgs) -> CliResult {
    if a.samples == 0 || a.cols == 0 {
        return Err(Error::InvalidInput("--samples and --cols must be positive".into()).into());
    }
    println!("rows,cols,clouds,seconds,clouds_per_sec");
    for &r in &a.rows {
        let spec = ReshapeSpec::new(r, a.cols).allowing_unstable(true);
        spec.validate(r * a.cols)?;
        let mut g = rng::indexed_stream(a.seed, "bench", r as u64);
        let clouds: Vec<Vec<f64>> = (0..a.samples)
            .map(|_| (0..spec.width()).map(|_| g.sample(StandardNormal)).collect())
            .collect();
        let started = Instant::now();
        let features = extract_batch(&clouds, &spec)?;
        let secs = started.elapsed().as_secs_f64();
        debug_assert_eq!(features.len(), a.samples);
        println!(
            "{r},{},{},{secs:.6},{:.2}",
            a.cols,
            a.samples,
            a.samples as f64 / secs.max(1e-12)
        );
    }
    Ok(())
}

pub fn experiment(a: &ExperimentArgs) -> CliResult {
    let seeds = a.seeds.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let mut plan = match (&a.plan, a.benchmark) {
        (Some(path), _) => {
            let mut p: ExperimentPlan = read_json(path)?;
            if let Some(s) = &a.seeds {
                p.seeds = s.clone();
            }
            p
        }
        (None, Some(BenchmarkArg::StructureShift)) => ExperimentPlan::structure_shift_benchmark(seeds),
        (None, Some(BenchmarkArg::MeanShift)) => ExperimentPlan::mean_shift_benchmark(seeds),
        (None, None) => return Err(CliError::Usage("experiment needs --plan or --benchmark".into())),
    };
    if let Some(dir) = &a.output_dir {
        plan.output_dir = Some(dir.clone());
    }
    let started = Instant::now();
    let results = run_plan(&plan)?;
    print!("{}", results_markdown(&results));
    eprintln!("experiment took {:.3} s", started.elapsed().as_secs_f64());
    Ok(())
}

pub fn pca(a: &PcaArgs) -> CliResult {
    let ds = load_dataset(&a.input)?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let projection = pca_project(&ds, model.as_ref().map(|(m, c)| (m, c)), a.k)?;
    let mut out = BufWriter::new(File::create(&a.output)?);
    write_pca_csv(&mut out, &projection, &ds.manifest.label_names)?;
    out.flush()?;
    println!(
        "{}: {} points, variances {:?}",
        a.output.display(),
        projection.points.len(),
        projection.variances
    );
    Ok(())
}
