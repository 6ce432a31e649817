use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics<T> {
    pub label: T,
    /// Zero when nothing was predicted as this label; see `precision_undefined`.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold count.
    pub support: usize,
    pub predicted: usize,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport<T> {
    pub labels: Vec<LabelMetrics<T>>,
    pub accuracy: f64,
    /// Unweighted mean of per-label F1 over labels with nonzero support.
    pub macro_f1: Option<f64>,
    /// `confusion[gold][pred]` counts in label-set order.
    pub confusion: Vec<Vec<usize>>,
    pub n: usize,
}

impl<T> ClassificationReport<T> {
    /// Confusion rows divided by their gold count; empty rows stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.confusion
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect()
            })
            .collect()
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Per-label precision, recall and F1 of `pred` against `gold`.
pub fn per_label_prf<T: PartialEq + Clone>(
    gold: &[T],
    pred: &[T],
    label_set: &[T],
) -> Result<ClassificationReport<T>, MetricError> {
    if gold.len() != pred.len() {
        return Err(MetricError::LengthMismatch { left: gold.len(), right: pred.len() });
    }
    if gold.is_empty() {
        return Err(MetricError::TooFewItems { needed: 1, got: 0 });
    }
    let pos = |v: &T, at: usize| label_set.iter().position(|l| l == v).ok_or(MetricError::UnknownLabel(at));
    let k = label_set.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        confusion[pos(g, i)?][pos(p, i)?] += 1;
    }

    let mut labels = Vec::with_capacity(k);
    let mut correct = 0;
    for (i, label) in label_set.iter().enumerate() {
        let tp = confusion[i][i];
        correct += tp;
        let support: usize = confusion[i].iter().sum();
        let predicted: usize = confusion.iter().map(|r| r[i]).sum();
        let (precision, precision_undefined) = ratio(tp, predicted);
        let (recall, recall_undefined) = ratio(tp, support);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        labels.push(LabelMetrics {
            label: label.clone(),
            precision,
            recall,
            f1,
            support,
            predicted,
            precision_undefined,
            recall_undefined,
        });
    }
    let supported: Vec<f64> = labels.iter().filter(|l| l.support > 0).map(|l| l.f1).collect();
    Ok(ClassificationReport {
        accuracy: correct as f64 / gold.len() as f64,
        macro_f1: (!supported.is_empty()).then(|| supported.iter().sum::<f64>() / supported.len() as f64),
        labels,
        confusion,
        n: gold.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedLabel<T> {
    pub label: T,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean gold count across reports.
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedReport<T> {
    pub labels: Vec<AveragedLabel<T>>,
    pub accuracy: f64,
    pub reports: usize,
}

/// Element-wise mean of reports that share one label set.
pub fn average_reports<T: PartialEq + Clone>(
    reports: &[ClassificationReport<T>],
) -> Result<AveragedReport<T>, MetricError> {
    let first = reports.first().ok_or(MetricError::TooFewItems { needed: 1, got: 0 })?;
    let m = reports.len() as f64;
    let mut labels = Vec::with_capacity(first.labels.len());
    for (i, l) in first.labels.iter().enumerate() {
        let mut acc = AveragedLabel { label: l.label.clone(), precision: 0.0, recall: 0.0, f1: 0.0, support: 0.0 };
        for r in reports {
            let x = r.labels.get(i).filter(|x| x.label == l.label).ok_or(MetricError::UnknownLabel(i))?;
            acc.precision += x.precision / m;
            acc.recall += x.recall / m;
            acc.f1 += x.f1 / m;
            acc.support += x.support as f64 / m;
        }
        labels.push(acc);
    }
    Ok(AveragedReport { labels, accuracy: reports.iter().map(|r| r.accuracy).sum::<f64>() / m, reports: reports.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_label_example() {
        let r = per_label_prf(&[1, 1, 2], &[1, 2, 2], &[1, 2]).unwrap();
        let l1 = &r.labels[0];
        assert_eq!((l1.precision, l1.recall), (1.0, 0.5));
        assert!((l1.f1 - 2.0 / 3.0).abs() < 1e-12);
        let l2 = &r.labels[1];
        assert_eq!((l2.precision, l2.recall), (0.5, 1.0));
        assert!((l2.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.confusion, [[1, 1], [0, 1]]);
        assert_eq!(r.row_normalized(), [[0.5, 0.5], [0.0, 1.0]]);
    }

    #[test]
    fn zero_support_is_flagged() {
        let r = per_label_prf(&[1, 1], &[1, 1], &[1, 2, 3]).unwrap();
        assert!(r.labels[1].recall_undefined && r.labels[1].precision_undefined);
        assert_eq!(r.labels[1].f1, 0.0);
        assert_eq!(r.macro_f1, Some(1.0));
        assert_eq!(per_label_prf(&[9], &[1], &[1]).unwrap_err(), MetricError::UnknownLabel(0));
    }

    #[test]
    fn averaging_is_elementwise() {
        let a = per_label_prf(&[1, 2], &[1, 2], &[1, 2]).unwrap();
        let b = per_label_prf(&[1, 2], &[2, 1], &[1, 2]).unwrap();
        let avg = average_reports(&[a, b]).unwrap();
        assert_eq!(avg.accuracy, 0.5);
        assert_eq!(avg.labels[0].f1, 0.5);
        assert_eq!(avg.labels[0].support, 1.0);
    }
}
