use std::path::Path;
use std::process::{Command, Output};

fn topotext(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topotext"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen_structure(dir: &Path, name: &str, split: &str, per_class: &str) {
    let out = topotext(
        &["gen", "--kind", "structure-shift", "--classes", "3", "--per-class", per_class, "--split", split, "--seed", "9", "-o", name],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn square_diagram() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sq.csv"), "0,0\n1,0\n1,1\n0,1\n").unwrap();
    let out = topotext(&["diagram", "--points", "sq.csv"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "dim,birth,death\n0,0,1\n0,0,1\n0,0,1\n0,0,inf\n");
    let out = topotext(&["diagram", "--points", "sq.csv", "--max-dim", "1"], dir.path());
    assert!(stdout(&out).ends_with("0,0,inf\n1,1,1.4142135623730951\n"));
}

#[test]
fn extract_pooled_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    gen_structure(dir.path(), "d.emb1", "train", "4");
    let out = topotext(&["extract", "-i", "d.emb1", "-o", "f.csv", "--rows", "24", "--cols", "32"], dir.path());
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 1 + 69);
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(stdout(&out).contains("dim 69"));
}

#[test]
fn extract_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    gen_structure(dir.path(), "d.emb1", "train", "2");
    let p = dir.path();
    assert_eq!(code(&topotext(&["extract", "-i", "d.emb1", "-o", "f.emb1", "--rows", "32", "--cols", "24"], p)), 3);
    assert_eq!(
        code(&topotext(&["extract", "-i", "d.emb1", "-o", "f.emb1", "--rows", "32", "--cols", "24", "--allow-unstable"], p)),
        0
    );
    assert_eq!(code(&topotext(&["extract", "-i", "d.emb1", "-o", "f.emb1", "--rows", "25"], p)), 3);
    assert_eq!(code(&topotext(&["extract", "-i", "d.emb1", "-o", "f.emb1", "--rows", "0"], p)), 3);
    std::fs::write(p.join("empty.emb1"), b"").unwrap();
    assert_eq!(code(&topotext(&["extract", "-i", "empty.emb1", "-o", "f.emb1"], p)), 2);
    std::fs::write(p.join("empty.csv"), b"").unwrap();
    assert_eq!(code(&topotext(&["extract", "-i", "empty.csv", "-o", "f.emb1"], p)), 2);
    assert_eq!(code(&topotext(&["extract", "-i", "missing.emb1", "-o", "f.emb1"], p)), 2);
}

#[test]
fn malformed_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut junk = b"EMB1".to_vec();
    junk.extend((0..200u32).map(|i| (i.wrapping_mul(2654435761) >> 13) as u8));
    std::fs::write(p.join("junk.emb1"), &junk).unwrap();
    std::fs::write(p.join("ragged.csv"), "label,a,b\nx,1,2\ny,1\n").unwrap();
    std::fs::write(p.join("text.csv"), "label,a\nx,abc\n").unwrap();
    std::fs::write(p.join("pts.csv"), "1,2\n3\n").unwrap();
    for args in [
        &["extract", "-i", "junk.emb1", "-o", "o.emb1"][..],
        &["extract", "-i", "ragged.csv", "-o", "o.emb1"],
        &["extract", "-i", "text.csv", "-o", "o.emb1"],
        &["diagram", "--points", "pts.csv"],
        &["pca", "-i", "junk.emb1", "-o", "p.csv"],
    ] {
        let out = topotext(args, p);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&topotext(&["--no-such-flag"], p)), 64);
    assert_eq!(code(&topotext(&["extract", "--rows", "3"], p)), 64);
    assert_eq!(code(&topotext(&["train", "-i", "a", "-o", "b", "--variant", "nope"], p)), 64);
    let out = Command::new(env!("CARGO_BIN_EXE_topotext"))
        .args(["diagram", "--points", "x.csv"])
        .env("TOPOTEXT_THREADS", "zero")
        .current_dir(p)
        .output()
        .unwrap();
    assert_eq!(code(&out), 64);
    let help = topotext(&["--help"], p);
    assert_eq!(code(&help), 0);
    let mut all_help = stdout(&help);
    for sub in ["extract", "train", "eval", "gen", "diagram", "bench", "experiment", "pca"] {
        let out = topotext(&[sub, "--help"], p);
        assert_eq!(code(&out), 0);
        all_help.push_str(&stdout(&out));
    }
    for flag in [
        "--rows", "--cols", "--mode", "--variant", "--labels", "--epochs", "--lr", "--batch", "--dropout", "--sigma",
        "--seed", "--allow-unstable", "--max-dim", "--threshold",
    ] {
        assert!(all_help.contains(flag), "{flag} undocumented");
    }
    assert!(all_help.contains("TOPOTEXT_THREADS"));
}

#[test]
fn train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    gen_structure(p, "tr.emb1", "train", "20");
    gen_structure(p, "te.emb1", "test", "5");
    for (model, extra) in [("a", &["--variant", "plain"][..]), ("b", &["--variant", "tda", "--rows", "24"])] {
        let path = format!("{model}.thd1");
        let mut args = vec!["train", "-i", "tr.emb1", "-o", &path, "--lr", "0.001", "--epochs", "2"];
        args.extend_from_slice(extra);
        assert_eq!(code(&topotext(&args, p)), 0);
        assert!(p.join(format!("{model}.config.json")).exists());
    }
    let first = topotext(&["eval", "-m", "b.thd1", "-i", "te.emb1", "-o", "r1.json"], p);
    assert_eq!(code(&first), 0);
    assert!(stdout(&first).starts_with("| Model | Precision | Recall | Accuracy | Weighted F1 | Macro F1 | % Gain |"));
    assert_eq!(code(&topotext(&["train", "-i", "tr.emb1", "-o", "c.thd1", "--variant", "tda", "--rows", "24", "--lr", "0.001", "--epochs", "2"], p)), 0);
    assert_eq!(std::fs::read(p.join("b.thd1")).unwrap(), std::fs::read(p.join("c.thd1")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("r1.json")).unwrap()).unwrap();
    assert!(report["macro_f1"].as_f64().is_some());

    assert_eq!(code(&topotext(&["eval", "-m", "a.thd1", "-i", "te.emb1", "-o", "base.json"], p)), 0);
    let gain = topotext(&["eval", "-m", "b.thd1", "-i", "te.emb1", "--baseline", "base.json"], p);
    assert_eq!(code(&gain), 0);
    assert!(stdout(&gain).contains('%'));

    assert_eq!(code(&topotext(&["eval", "-m", "missing.thd1", "-i", "te.emb1"], p)), 2);
    // A model evaluated on data of the wrong width is a shape error.
    assert_eq!(code(&topotext(&["gen", "--kind", "mean-shift", "--classes", "3", "--dim", "10", "--per-class", "2", "-o", "w.emb1"], p)), 0);
    assert_eq!(code(&topotext(&["eval", "-m", "a.thd1", "-i", "w.emb1"], p)), 3);
}

#[test]
fn attention_variant_trains_from_appended_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // 96-wide embedding followed by an 8x12 attention matrix: reuse a
    // 192-wide generated record as both.
    assert_eq!(code(&topotext(&["gen", "--kind", "mean-shift", "--classes", "3", "--dim", "192", "--per-class", "6", "-o", "a.emb1"], p)), 0);
    let out = topotext(&["train", "-i", "a.emb1", "-o", "m.thd1", "--variant", "tda-attn", "--rows", "8", "--cols", "12", "--epochs", "1"], p);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("117 features"));
    assert_eq!(code(&topotext(&["eval", "-m", "m.thd1", "-i", "a.emb1"], p)), 0);
    assert_eq!(code(&topotext(&["train", "-i", "a.emb1", "-o", "m.thd1", "--variant", "tda-attn", "--rows", "8"], p)), 64);
}

#[test]
fn bench_reports_throughput() {
    let dir = tempfile::tempdir().unwrap();
    let out = topotext(&["bench", "--rows", "8,16", "--samples", "3"], dir.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("rows,cols,clouds,seconds,clouds_per_sec"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn experiment_from_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut plan = topotext::experiment::ExperimentPlan::structure_shift_benchmark(vec![1]);
    plan.data = topotext::experiment::DataSource::Generated {
        generator: topotext::experiment::GeneratorSpec::StructureShift(topotext::corpus::StructureShiftParams::new(
            3,
            vec![1],
            64,
            8,
            3,
        )),
        sizes: topotext::experiment::SplitSizes {
            train: vec![10],
            validation: vec![0],
            test: vec![4],
        },
    };
    std::fs::write(p.join("plan.json"), serde_json::to_string(&plan).unwrap()).unwrap();
    let out = topotext(&["experiment", "--plan", "plan.json", "--seeds", "1,2", "-o", "res"], p);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(p.join("res/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * (2 + 2));
    assert!(p.join("res/results.md").exists());
}
