//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use topotext::experiment::{run_plan, ExperimentPlan};
use topotext::features::{extract_tda_features, extract_tda_features_attn, AttentionSpec, ReshapeSpec};
use topotext::head::{cross_entropy, loss_and_gradient, softmax, HeadConfig, HeadModel, Variant};
use topotext::metrics::{format_gain, gain_percent, ConfusionMatrix, MetricsReport};
use topotext::persistence::{
    enclosing_radius, pairwise_distances, persistence_h0, persistence_h1, H1Options, PointCloud,
};
use topotext_oracles::{central_difference, hand_metrics, naive_distances, naive_h1, orthonormal_from, prim_mst_weights};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian(g: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(g)).collect()
}

fn points(g: &mut ChaCha8Rng, r: usize, c: usize) -> Vec<Vec<f64>> {
    (0..r).map(|_| (0..c).map(|_| g.gen_range(-1.0..1.0)).collect()).collect()
}

fn h0_deaths(pts: &[Vec<f64>]) -> Vec<f64> {
    let cloud = PointCloud::from_points(pts).unwrap();
    let mut d: Vec<f64> = persistence_h0(&pairwise_distances(&cloud).unwrap())
        .unwrap()
        .iter()
        .map(|p| p.death)
        .collect();
    d.sort_by(f64::total_cmp);
    d
}

fn h0_oracle() -> Outcome {
    let started = Instant::now();
    let mut g = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let r = g.gen_range(2..=64);
        let c = g.gen_range(1..=64);
        let pts = points(&mut g, r, c);
        let ours = h0_deaths(&pts);
        let prim = prim_mst_weights(&naive_distances(&pts));
        ensure(ours.len() == prim.len(), || format!("case {case}: {} vs {} deaths", ours.len(), prim.len()))?;
        for (a, b) in ours.iter().zip(&prim) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = started.elapsed();
    ensure(worst <= 1e-9, || format!("max death error {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("100 clouds, max error {worst:e}, {:.2} s", elapsed.as_secs_f64()))
}

fn h1_oracle() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(1002);
    let mut pairs_seen = 0;
    for case in 0..50 {
        let r = g.gen_range(3..=12);
        let c = g.gen_range(1..=4);
        let pts = points(&mut g, r, c);
        let dm = pairwise_distances(&PointCloud::from_points(&pts).unwrap()).unwrap();
        let threshold = enclosing_radius(&dm);
        let ours: Vec<(f64, f64)> = persistence_h1(&dm, threshold, H1Options::default())
            .unwrap()
            .iter()
            .map(|p| (p.birth, p.death))
            .collect();
        let naive = naive_h1(&naive_distances(&pts), threshold, false);
        let same = ours.len() == naive.len()
            && ours.iter().zip(&naive).all(|(a, b)| {
                (a.0 - b.0).abs() <= 1e-9 && (a.1 == b.1 || (a.1 - b.1).abs() <= 1e-9)
            });
        ensure(same, || format!("case {case}: {ours:?} vs {naive:?}"))?;
        pairs_seen += ours.len();
    }
    let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let dm = pairwise_distances(&PointCloud::from_points(&square).unwrap()).unwrap();
    let pairs = persistence_h1(&dm, f64::INFINITY, H1Options::default()).unwrap();
    ensure(
        pairs.len() == 1 && (pairs[0].birth - 1.0).abs() <= 1e-9 && (pairs[0].death - 2f64.sqrt()).abs() <= 1e-9,
        || format!("square gave {pairs:?}"),
    )?;
    Ok(format!("50 clouds ({pairs_seen} pairs) agree; square -> (1, sqrt 2)"))
}

fn shape_constants() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(1003);
    let spec = ReshapeSpec::new(24, 32);
    let f = extract_tda_features(&gaussian(&mut g, 768), &spec).unwrap();
    let mut cfg = HeadConfig::new(Variant::Tda, 768, 4);
    cfg.reshape = spec;
    let got = (f.len() / 3, f.len(), cfg.feature_width());
    ensure(got == (23, 69, 837), || format!("pool mode gave {got:?}"))?;
    let mut widths = Vec::new();
    for m in [400, 512] {
        let attn = AttentionSpec::new(m, 768);
        let features = extract_tda_features_attn(&gaussian(&mut g, m * 768), &attn).unwrap();
        let mut cfg = HeadConfig::new(Variant::TdaAttn, 768, 4);
        cfg.attention = Some(attn);
        widths.push((features.len(), cfg.feature_width()));
    }
    ensure(widths == [(1197, 1965), (1533, 2301)], || format!("attention mode gave {widths:?}"))?;
    Ok("23 pairs / 69 / 837; 1197 / 1965; 1533 / 2301".into())
}

fn stability() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(1004);
    let spec = ReshapeSpec::new(24, 32);
    let mut worst_ratio = 0.0f64;
    let mut worst_invariance = 0.0f64;
    for i in 0..1000 {
        let v = gaussian(&mut g, 768);
        let f = extract_tda_features(&v, &spec).unwrap();
        ensure(f.len() == 69, || format!("input {i}: length {}", f.len()))?;
        let eps = g.gen_range(1e-4..=0.01);
        // Move every point by at most eps.
        let moved: Vec<f64> = v
            .chunks(32)
            .flat_map(|p| {
                let dir = gaussian(&mut g, 32);
                let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                p.iter().zip(dir).map(|(x, d)| x + eps * d / n).collect::<Vec<_>>()
            })
            .collect();
        let fm = extract_tda_features(&moved, &spec).unwrap();
        let a: Vec<f64> = f.deaths().collect();
        let b: Vec<f64> = fm.deaths().collect();
        for (x, y) in a.iter().zip(&b) {
            worst_ratio = worst_ratio.max((x - y).abs() / eps);
        }
        if i < 50 {
            let pts: Vec<Vec<f64>> = v.chunks(32).map(<[f64]>::to_vec).collect();
            let base = h0_deaths(&pts);
            let mut shuffled = pts.clone();
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut g);
            let q = orthonormal_from(&gaussian(&mut g, 32 * 32), 32);
            let rotated: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| q.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + 3.0).collect())
                .collect();
            for other in [h0_deaths(&shuffled), h0_deaths(&rotated)] {
                for (x, y) in base.iter().zip(&other) {
                    worst_invariance = worst_invariance.max((x - y).abs());
                }
            }
        }
    }
    ensure(worst_ratio <= 2.0 + 1e-9, || format!("death moved by {worst_ratio:.4} eps"))?;
    ensure(worst_invariance <= 1e-6, || format!("invariance error {worst_invariance:e}"))?;
    Ok(format!(
        "1000 inputs of length 69; max |delta death| = {worst_ratio:.3} eps; invariance error {worst_invariance:.1e}"
    ))
}

fn gradient_check() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(1005);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let l = g.gen_range(2..=5);
        let d = g.gen_range(2..=9);
        let n = g.gen_range(1..=6);
        let mut cfg = HeadConfig::new(Variant::Plain, d, l);
        cfg.seed = g.gen();
        let mut model = HeadModel::init(&cfg);
        model.bias.iter_mut().for_each(|b| *b = g.gen_range(-0.5..0.5));
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| g.gen_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<usize> = (0..n).map(|_| g.gen_range(0..l)).collect();
        let (_, grad) = loss_and_gradient(&model, &xs, &ys).unwrap();
        let nw = model.weights.len();
        let params: Vec<f64> = model.weights.iter().chain(&model.bias).copied().collect();
        let loss = |p: &[f64]| {
            let mut m = model.clone();
            m.weights.copy_from_slice(&p[..nw]);
            m.bias.copy_from_slice(&p[nw..]);
            xs.iter()
                .zip(&ys)
                .map(|(x, &y)| cross_entropy(&softmax(&m.logits(x).unwrap()), y))
                .sum::<f64>()
                / n as f64
        };
        for (i, a) in grad.weights.iter().chain(&grad.bias).enumerate() {
            let num = central_difference(loss, &params, i, 1e-5);
            let scale = a.abs().max(num.abs());
            let err = if scale < 1e-7 { (a - num).abs() } else { (a - num).abs() / scale };
            worst = worst.max(err);
        }
    }
    ensure(worst <= 1e-4, || format!("max relative error {worst:e}"))?;
    Ok(format!("20 instances, max relative error {worst:.2e}"))
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn structure_shift() -> Outcome {
    let started = Instant::now();
    let results = single_threaded(|| run_plan(&ExperimentPlan::structure_shift_benchmark(vec![1, 2, 3])))
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let mean = |v: &str| results.summary(v).unwrap().macro_f1.mean;
    let (plain, tda, gauss) = (mean("plain"), mean("tda"), mean("gaussian"));
    let detail = format!(
        "macro F1 plain {plain:.4}, tda {tda:.4}, gaussian {gauss:.4}; {:.1} s",
        elapsed.as_secs_f64()
    );
    ensure(tda - plain >= 0.10, || format!("tda gap too small: {detail}"))?;
    ensure(gauss - plain < 0.05, || format!("gaussian gap too large: {detail}"))?;
    ensure(elapsed < Duration::from_secs(300), || format!("too slow: {detail}"))?;
    Ok(detail)
}

fn mean_shift() -> Outcome {
    let results = run_plan(&ExperimentPlan::mean_shift_benchmark(vec![1, 2, 3])).map_err(|e| e.to_string())?;
    let plain = results.summary("plain").unwrap().macro_f1.mean;
    let tda = results.summary("tda").unwrap().macro_f1.mean;
    let detail = format!("macro F1 plain {plain:.4}, tda {tda:.4}");
    ensure(plain >= 0.9, || format!("plain below 0.9: {detail}"))?;
    ensure((tda - plain).abs() <= 0.05, || format!("tda off by more than 0.05: {detail}"))?;
    Ok(detail)
}

fn check_matrix(rows: &[Vec<u64>]) -> Result<(), String> {
    let names = (0..rows.len()).map(|i| i.to_string()).collect();
    let r = MetricsReport::from_confusion(ConfusionMatrix::from_rows(rows).unwrap(), names).unwrap();
    let h = hand_metrics(rows);
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let ok = r.per_class.iter().enumerate().all(|(c, m)| {
        eq(m.precision, h.precision[c]) && eq(m.recall, h.recall[c]) && eq(m.f1, h.f1[c])
    }) && eq(r.accuracy, h.accuracy)
        && eq(r.macro_f1, h.macro_f1)
        && eq(r.weighted_f1, h.weighted_f1);
    ensure(ok, || format!("mismatch on {rows:?}"))
}

fn all_matrices(n: usize, max: u64, mut f: impl FnMut(&[Vec<u64>]) -> Result<(), String>) -> Result<usize, String> {
    let mut flat = vec![0u64; n * n];
    let mut count = 0;
    loop {
        f(&flat.chunks(n).map(<[u64]>::to_vec).collect::<Vec<_>>())?;
        count += 1;
        let mut i = 0;
        while i < flat.len() && flat[i] == max {
            flat[i] = 0;
            i += 1;
        }
        if i == flat.len() {
            return Ok(count);
        }
        flat[i] += 1;
    }
}

fn metrics_oracle() -> Outcome {
    let mut count = all_matrices(1, 10, check_matrix)? + all_matrices(2, 10, check_matrix)?;
    count += all_matrices(3, 3, check_matrix)?;
    for tp in 0..=10u64 {
        for fp in 0..=20u64 {
            for fneg in 0..=20u64 {
                let (fp1, fn1) = (fp.min(10), fneg.min(10));
                check_matrix(&[vec![tp, fn1, fneg - fn1], vec![fp1, 4, 1], vec![fp - fp1, 2, 7]])?;
                count += 1;
            }
        }
    }
    let mut g = ChaCha8Rng::seed_from_u64(1006);
    for _ in 0..100_000 {
        check_matrix(&(0..3).map(|_| (0..3).map(|_| g.gen_range(0..=10)).collect()).collect::<Vec<_>>())?;
        count += 1;
    }
    let a = format_gain(gain_percent(0.8719, 0.9058).map_err(|e| e.to_string())?);
    let b = format_gain(gain_percent(0.9064, 0.9746).map_err(|e| e.to_string())?);
    ensure(a == "+3.9%" && b == "+7.5%", || format!("gains {a}, {b}"))?;
    Ok(format!("{count} matrices agree; gains {a}, {b}"))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_topotext"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let pipeline: &[&[&str]] = &[
        &["gen", "--kind", "structure-shift", "--classes", "3", "--per-class", "20", "--dim", "96", "--rows", "8", "--seed", "5", "-o", "train.emb1"],
        &["gen", "--kind", "structure-shift", "--classes", "3", "--per-class", "10", "--dim", "96", "--rows", "8", "--seed", "5", "--split", "test", "-o", "test.emb1"],
        &["gen", "--kind", "mean-shift", "--classes", "4", "--per-class", "5", "--dim", "16", "-o", "ms.csv"],
        &["extract", "-i", "train.emb1", "-o", "feat.emb1", "--rows", "8", "--cols", "12"],
        &["extract", "-i", "train.emb1", "-o", "attn.emb1", "--mode", "attn", "--rows", "12", "--cols", "8", "--expected-pairs", "9"],
        &["train", "-i", "train.emb1", "-o", "tda.thd1", "--variant", "tda", "--rows", "8", "--cols", "12", "--lr", "0.001", "--epochs", "2"],
        &["train", "-i", "train.emb1", "-o", "gauss.thd1", "--variant", "gaussian", "--lr", "0.001", "--epochs", "2"],
        &["eval", "-m", "gauss.thd1", "-i", "test.emb1", "-o", "gauss.json"],
        &["eval", "-m", "tda.thd1", "-i", "test.emb1", "-o", "tda.json", "--baseline", "gauss.json"],
        &["diagram", "-i", "test.emb1", "--index", "3", "--rows", "8", "--max-dim", "1", "-o", "dgm.csv"],
        &["diagram", "-i", "test.emb1", "--index", "3", "--rows", "8", "--max-dim", "1", "--json"],
        &["pca", "-i", "test.emb1", "-m", "tda.thd1", "-o", "pca.csv"],
    ];
    let files = [
        "train.emb1", "train.manifest.json", "test.emb1", "ms.csv", "feat.emb1", "attn.emb1", "tda.thd1",
        "tda.json", "gauss.thd1", "gauss.json", "dgm.csv", "pca.csv",
    ];
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for args in pipeline {
        let out_a = run_cli(args, a.path())?;
        let out_b = run_cli(args, b.path())?;
        ensure(out_a == out_b, || format!("stdout of {args:?} differs"))?;
    }
    for f in files {
        let x = std::fs::read(a.path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        ensure(x == y, || format!("{f} differs between runs"))?;
    }
    Ok(format!("{} invocations, {} output files byte-identical", pipeline.len(), files.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("H0 oracle equivalence", h0_oracle),
        ("H1 oracle equivalence", h1_oracle),
        ("shape constants", shape_constants),
        ("stability invariants", stability),
        ("gradient check", gradient_check),
        ("structure-shift mechanism", structure_shift),
        ("mean-shift sanity", mean_shift),
        ("metrics oracle", metrics_oracle),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
