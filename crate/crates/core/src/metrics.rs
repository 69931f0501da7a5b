//! Multi-class classification metrics.
//!
//! Precision, recall and F1 with no predictions / no support are 0. Macro
//! averages run over the classes that occur in the truth or in the
//! predictions; weighted averages weight each class by its support.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rows are true labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::shape(format!("{n}x{n} matrix"), "ragged rows"));
        }
        Ok(Self {
            n,
            counts: rows.concat(),
        })
    }

    pub fn from_labels(truth: &[usize], predicted: &[usize], n: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::shape(format!("{} predictions", truth.len()), predicted.len()));
        }
        let mut cm = Self::new(n);
        for (&t, &p) in truth.iter().zip(predicted) {
            let bad = if t >= n { Some(t) } else if p >= n { Some(p) } else { None };
            if let Some(label) = bad {
                return Err(Error::InvalidLabel { label, num_labels: n });
            }
            cm.counts[t * n + p] += 1;
        }
        Ok(cm)
    }

    pub fn num_classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        (0..self.n).map(|p| self.get(class, p)).sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        (0..self.n).map(|t| self.get(t, class)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.n.max(1)).map(<[u64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Relative macro-F1 change against a named baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub baseline: String,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label_names: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub confusion: ConfusionMatrix,
    pub gain: Option<Gain>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn from_confusion(confusion: ConfusionMatrix, label_names: Vec<String>) -> Result<Self> {
        let n = confusion.num_classes();
        if label_names.len() != n {
            return Err(Error::shape(format!("{n} label names"), label_names.len()));
        }
        let per_class: Vec<ClassMetrics> = (0..n)
            .map(|c| {
                let tp = confusion.get(c, c);
                let support = confusion.support(c);
                let predicted = confusion.predicted(c);
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassMetrics {
                    precision,
                    recall,
                    f1,
                    support,
                }
            })
            .collect();
        let present: Vec<usize> = (0..n)
            .filter(|&c| confusion.support(c) > 0 || confusion.predicted(c) > 0)
            .collect();
        let macro_mean = |f: fn(&ClassMetrics) -> f64| {
            if present.is_empty() {
                0.0
            } else {
                present.iter().map(|&c| f(&per_class[c])).sum::<f64>() / present.len() as f64
            }
        };
        let total = confusion.total();
        let weighted_f1 = if total == 0 {
            0.0
        } else {
            per_class.iter().map(|m| m.f1 * m.support as f64).sum::<f64>() / total as f64
        };
        Ok(Self {
            label_names,
            accuracy: ratio((0..n).map(|c| confusion.get(c, c)).sum(), total),
            macro_precision: macro_mean(|m| m.precision),
            macro_recall: macro_mean(|m| m.recall),
            macro_f1: macro_mean(|m| m.f1),
            weighted_f1,
            per_class,
            confusion,
            gain: None,
        })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], label_names: Vec<String>) -> Result<Self> {
        let cm = ConfusionMatrix::from_labels(truth, predicted, label_names.len())?;
        Self::from_confusion(cm, label_names)
    }
}

/// `(b - a) / a * 100` on macro F1, in percent.
pub fn gain_percent(baseline_macro_f1: f64, macro_f1: f64) -> Result<f64> {
    if baseline_macro_f1 == 0.0 {
        return Err(Error::UndefinedGain);
    }
    Ok((macro_f1 - baseline_macro_f1) / baseline_macro_f1 * 100.0)
}

/// Macro-F1 gain of `b` over `a`. Both reports must come from the same test
/// split (identical per-class supports).
pub fn compare_gain(a: &MetricsReport, b: &MetricsReport) -> Result<f64> {
    let supports = |r: &MetricsReport| r.per_class.iter().map(|m| m.support).collect::<Vec<_>>();
    if supports(a) != supports(b) {
        return Err(Error::InvalidInput("reports come from different test splits".into()));
    }
    gain_percent(a.macro_f1, b.macro_f1)
}

/// One-decimal signed percentage, e.g. `+3.9%`.
pub fn format_gain(percent: f64) -> String {
    let rounded = (percent * 10.0).round() / 10.0;
    if rounded == 0.0 {
        "0.0%".to_string()
    } else {
        format!("{rounded:+.1}%")
    }
}

/// Whole-percent gain with an arrow, e.g. `4% ↑`.
pub fn format_gain_coarse(percent: f64) -> String {
    let whole = percent.round();
    if whole == 0.0 {
        "0%".to_string()
    } else if whole > 0.0 {
        format!("{whole}% ↑")
    } else {
        format!("{}% ↓", -whole)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|k| format!("c{k}")).collect()
    }

    #[test]
    fn two_class_worked_example() {
        let cm = ConfusionMatrix::from_rows(&[vec![8, 2], vec![3, 7]]).unwrap();
        let r = MetricsReport::from_confusion(cm, names(2)).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert!((r.per_class[0].f1 - 0.76190).abs() < 1e-5);
        assert!((r.per_class[1].f1 - 0.73684).abs() < 1e-5);
        assert!((r.macro_f1 - 0.74937).abs() < 1e-5);
    }

    #[test]
    fn perfect_predictions() {
        let truth = [0, 1, 2, 1, 0];
        let r = MetricsReport::from_predictions(&truth, &truth, names(3)).unwrap();
        assert_eq!((r.accuracy, r.macro_f1, r.weighted_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn single_class_present() {
        let r = MetricsReport::from_predictions(&[0, 0, 0], &[0, 0, 0], names(4)).unwrap();
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.weighted_f1, 1.0);
    }

    #[test]
    fn published_gains() {
        assert_eq!(format_gain(gain_percent(0.8719, 0.9058).unwrap()), "+3.9%");
        assert_eq!(format_gain_coarse(gain_percent(0.8719, 0.9058).unwrap()), "4% ↑");
        assert_eq!(format_gain(gain_percent(0.9064, 0.9746).unwrap()), "+7.5%");
        assert_eq!(gain_percent(0.5, 0.5).unwrap(), 0.0);
        assert!(matches!(gain_percent(0.0, 0.5), Err(Error::UndefinedGain)));
        assert_eq!(format_gain_coarse(-1.2), "1% ↓");
    }

    #[test]
    fn compare_gain_needs_same_split() {
        let a = MetricsReport::from_predictions(&[0, 1], &[0, 0], names(2)).unwrap();
        let b = MetricsReport::from_predictions(&[0, 1], &[0, 1], names(2)).unwrap();
        assert!(compare_gain(&a, &b).unwrap() > 0.0);
        assert_eq!(compare_gain(&a, &a).unwrap(), 0.0);
        let c = MetricsReport::from_predictions(&[1, 1], &[1, 1], names(2)).unwrap();
        assert!(compare_gain(&a, &c).is_err());
    }

    #[test]
    fn label_errors() {
        assert!(matches!(
            ConfusionMatrix::from_labels(&[0, 3], &[0, 1], 2),
            Err(Error::InvalidLabel { label: 3, .. })
        ));
        assert!(ConfusionMatrix::from_labels(&[0], &[0, 1], 2).is_err());
    }
}
