use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ExperimentResults, PlanVariant, RunRecord};
use crate::metrics::{format_gain, format_gain_coarse, MetricsReport};

/// Mean and sample standard deviation of one statistic across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: String,
    pub n_runs: usize,
    pub precision: Spread,
    pub recall: Spread,
    pub accuracy: Spread,
    pub weighted_f1: Spread,
    pub macro_f1: Spread,
    pub gain_percent: Option<Spread>,
}

/// Per-variant mean and spread over seeds, in plan order.
pub fn summarize(runs: &[RunRecord], variants: &[PlanVariant]) -> Vec<VariantSummary> {
    variants
        .iter()
        .filter_map(|v| {
            let mine: Vec<&MetricsReport> = runs.iter().filter(|r| r.variant == v.name).map(|r| &r.test).collect();
            let stat = |f: fn(&MetricsReport) -> f64| Spread::of(&mine.iter().map(|r| f(r)).collect::<Vec<_>>());
            let gains: Vec<f64> = mine.iter().filter_map(|r| r.gain.as_ref().map(|g| g.percent)).collect();
            Some(VariantSummary {
                variant: v.name.clone(),
                n_runs: mine.len(),
                precision: stat(|r| r.macro_precision)?,
                recall: stat(|r| r.macro_recall)?,
                accuracy: stat(|r| r.accuracy)?,
                weighted_f1: stat(|r| r.weighted_f1)?,
                macro_f1: stat(|r| r.macro_f1)?,
                gain_percent: Spread::of(&gains),
            })
        })
        .collect()
}

const CSV_HEADER: &str = "variant,seed,precision,recall,accuracy,weighted_f1,macro_f1,gain_percent";

/// One row per run followed by `mean` and `std` rows per variant.
pub fn results_csv(results: &ExperimentResults) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &results.summaries {
        for r in results.runs_of(&s.variant) {
            let t = &r.test;
            let gain = t.gain.as_ref().map_or(String::new(), |g| format!("{:.6}", g.percent));
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                r.variant, r.seed, t.macro_precision, t.macro_recall, t.accuracy, t.weighted_f1, t.macro_f1, gain
            );
        }
        for (tag, pick) in [("mean", (|x: Spread| x.mean) as fn(Spread) -> f64), ("std", |x: Spread| x.std)] {
            let gain = s.gain_percent.map_or(String::new(), |g| format!("{:.6}", pick(g)));
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                s.variant,
                tag,
                pick(s.precision),
                pick(s.recall),
                pick(s.accuracy),
                pick(s.weighted_f1),
                pick(s.macro_f1),
                gain
            );
        }
    }
    out
}

/// Markdown table with the usual Model / Precision / Recall / Accuracy /
/// Weighted F1 / Macro F1 / % Gain columns: one row per run, then one
/// `mean ± std` row per variant.
pub fn results_markdown(results: &ExperimentResults) -> String {
    let mut out = format!("# {}\n\n", results.plan);
    out.push_str("| Model | Seed | Precision | Recall | Accuracy | Weighted F1 | Macro F1 | % Gain |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in &results.runs {
        let t = &r.test;
        let gain = t.gain.as_ref().map_or("-".to_string(), |g| {
            format!("{} ({})", format_gain_coarse(g.percent), format_gain(g.percent))
        });
        let _ = writeln!(
            out,
            "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {} |",
            r.variant, r.seed, t.macro_precision, t.macro_recall, t.accuracy, t.weighted_f1, t.macro_f1, gain
        );
    }
    out.push_str("\n## Mean ± std over seeds\n\n");
    out.push_str("| Model | Runs | Precision | Recall | Accuracy | Weighted F1 | Macro F1 | % Gain |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    let pm = |s: Spread| format!("{:.4} ± {:.4}", s.mean, s.std);
    for s in &results.summaries {
        let gain = s.gain_percent.map_or("-".to_string(), |g| {
            format!("{} ({:+.1} ± {:.1})", format_gain_coarse(g.mean), g.mean, g.std)
        });
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            s.variant,
            s.n_runs,
            pm(s.precision),
            pm(s.recall),
            pm(s.accuracy),
            pm(s.weighted_f1),
            pm(s.macro_f1),
            gain
        );
    }
    out
}
