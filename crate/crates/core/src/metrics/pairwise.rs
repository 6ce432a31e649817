use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MetricError;

/// One rater's scores keyed by item id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingVector {
    pub rater_id: String,
    pub scores: BTreeMap<String, f64>,
}

impl RatingVector {
    pub fn new(
        rater_id: impl Into<String>,
        items: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self, MetricError> {
        let mut scores = BTreeMap::new();
        for (id, s) in items {
            if !s.is_finite() {
                return Err(MetricError::NotFinite);
            }
            if scores.insert(id.clone(), s).is_some() {
                return Err(MetricError::DuplicateItem(id));
            }
        }
        Ok(Self { rater_id: rater_id.into(), scores })
    }

    /// Scores on the items both raters cover, in item-id order.
    pub fn align(&self, other: &RatingVector) -> (Vec<f64>, Vec<f64>) {
        self.scores.iter().filter_map(|(id, &a)| other.scores.get(id).map(|&b| (a, b))).unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub a: String,
    pub b: String,
    pub value: Option<f64>,
    pub n_common: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSummary {
    /// Mean over pairs with a defined value.
    pub mean: Option<f64>,
    pub pairs: Vec<PairResult>,
    /// Pairs whose statistic was undefined.
    pub skipped: usize,
}

fn summarize<F>(pairs: Vec<(&RatingVector, &RatingVector)>, metric: F) -> Result<PairwiseSummary, MetricError>
where
    F: Fn(&[f64], &[f64]) -> Result<Option<f64>, MetricError>,
{
    let mut out = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let (x, y) = a.align(b);
        if x.is_empty() {
            return Err(MetricError::NoCommonItems { a: a.rater_id.clone(), b: b.rater_id.clone() });
        }
        out.push(PairResult {
            a: a.rater_id.clone(),
            b: b.rater_id.clone(),
            value: metric(&x, &y)?,
            n_common: x.len(),
        });
    }
    let defined: Vec<f64> = out.iter().filter_map(|p| p.value).collect();
    Ok(PairwiseSummary {
        mean: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        skipped: out.len() - defined.len(),
        pairs: out,
    })
}

/// `metric` over every unordered pair of raters, in input order.
pub fn pairwise_agreement<F>(raters: &[RatingVector], metric: F) -> Result<PairwiseSummary, MetricError>
where
    F: Fn(&[f64], &[f64]) -> Result<Option<f64>, MetricError>,
{
    if raters.len() < 2 {
        return Err(MetricError::TooFewRaters(raters.len()));
    }
    let mut pairs = Vec::new();
    for i in 0..raters.len() {
        for j in i + 1..raters.len() {
            pairs.push((&raters[i], &raters[j]));
        }
    }
    summarize(pairs, metric)
}

/// `metric` over every (left, right) pair across two groups.
pub fn cross_pairwise<F>(
    left: &[RatingVector],
    right: &[RatingVector],
    metric: F,
) -> Result<PairwiseSummary, MetricError>
where
    F: Fn(&[f64], &[f64]) -> Result<Option<f64>, MetricError>,
{
    if left.is_empty() || right.is_empty() {
        return Err(MetricError::TooFewRaters(left.len().min(right.len())));
    }
    let pairs = left.iter().flat_map(|a| right.iter().map(move |b| (a, b))).collect();
    summarize(pairs, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::kendall_tau_b;
    use alloc::format;
    use alloc::vec;

    fn rv(id: &str, s: &[f64]) -> RatingVector {
        RatingVector::new(id, s.iter().enumerate().map(|(i, &v)| (format!("i{i}"), v))).unwrap()
    }

    #[test]
    fn mean_of_three_pairs() {
        let fixed = |v: f64| move |_: &[f64], _: &[f64]| Ok(Some(v));
        let raters = vec![rv("a", &[1.0]), rv("b", &[1.0]), rv("c", &[1.0])];
        let s = pairwise_agreement(&raters, fixed(0.5)).unwrap();
        assert_eq!(s.pairs.len(), 3);
        assert_eq!(s.mean, Some(0.5));
        let vals = [1.0, 0.5, 0.5];
        let mean = vals.iter().sum::<f64>() / 3.0;
        assert!((mean - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_pairs_are_skipped() {
        let raters = vec![rv("a", &[1., 2., 3.]), rv("b", &[1., 3., 2.]), rv("c", &[2., 2., 2.])];
        let s = pairwise_agreement(&raters, kendall_tau_b).unwrap();
        assert_eq!(s.skipped, 2);
        assert!((s.mean.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_raters_error() {
        let a = RatingVector::new("a", vec![("x".into(), 1.0)]).unwrap();
        let b = RatingVector::new("b", vec![("y".into(), 1.0)]).unwrap();
        assert!(matches!(
            pairwise_agreement(&[a.clone(), b.clone()], kendall_tau_b),
            Err(MetricError::NoCommonItems { .. })
        ));
        assert_eq!(cross_pairwise(&[a], &[], kendall_tau_b), Err(MetricError::TooFewRaters(0)));
        assert!(matches!(
            RatingVector::new("d", vec![("x".into(), 1.0), ("x".into(), 2.0)]),
            Err(MetricError::DuplicateItem(_))
        ));
    }
}
