use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MetricError;

/// Measurement level for the disagreement function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaLevel {
    Nominal,
    #[default]
    Ordinal,
    Interval,
}

/// Krippendorff's alpha over a raters-by-items matrix; `None` marks a
/// missing rating. Items with fewer than two ratings are not pairable and
/// are ignored. Returns `Ok(None)` when expected disagreement is zero.
pub fn krippendorff_alpha(ratings: &[Vec<Option<f64>>], level: AlphaLevel) -> Result<Option<f64>, MetricError> {
    if ratings.len() < 2 {
        return Err(MetricError::TooFewRaters(ratings.len()));
    }
    let items = ratings[0].len();
    for r in ratings {
        if r.len() != items {
            return Err(MetricError::LengthMismatch { left: items, right: r.len() });
        }
        if r.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MetricError::NotFinite);
        }
    }

    let units: Vec<Vec<f64>> = (0..items)
        .map(|i| ratings.iter().filter_map(|r| r[i]).collect::<Vec<f64>>())
        .filter(|u| u.len() >= 2)
        .collect();
    if units.is_empty() {
        return Err(MetricError::InsufficientOverlap);
    }

    let mut values: Vec<f64> = units.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let idx = |v: f64| values.binary_search_by(|p| p.total_cmp(&v)).unwrap_or(0);
    let k = values.len();

    let mut coincidence = vec![vec![0.0f64; k]; k];
    for unit in &units {
        let weight = 1.0 / (unit.len() - 1) as f64;
        for (a, &va) in unit.iter().enumerate() {
            for (b, &vb) in unit.iter().enumerate() {
                if a != b {
                    coincidence[idx(va)][idx(vb)] += weight;
                }
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();

    let delta = |c: usize, d: usize| -> f64 {
        match level {
            AlphaLevel::Nominal => (c != d) as u8 as f64,
            AlphaLevel::Interval => {
                let diff = values[c] - values[d];
                diff * diff
            }
            AlphaLevel::Ordinal => {
                let (lo, hi) = if c <= d { (c, d) } else { (d, c) };
                let span: f64 = marginals[lo..=hi].iter().sum::<f64>() - (marginals[lo] + marginals[hi]) / 2.0;
                span * span
            }
        }
    };

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            let dist = delta(c, d);
            observed += coincidence[c][d] * dist;
            expected += marginals[c] * marginals[d] * dist;
        }
    }
    if expected == 0.0 {
        return Ok(None);
    }
    Ok(Some(1.0 - (n - 1.0) * observed / expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn row(v: &[i64]) -> Vec<Option<f64>> {
        v.iter().map(|&x| Some(x as f64)).collect()
    }

    #[test]
    fn two_coders_exact_fractions() {
        let m = vec![row(&[1, 2, 3, 3, 2, 1, 4, 1, 2]), row(&[1, 2, 3, 3, 2, 2, 4, 1, 2])];
        let a = |l| krippendorff_alpha(&m, l).unwrap().unwrap();
        assert!((a(AlphaLevel::Nominal) - 98.0 / 115.0).abs() < 1e-12);
        assert!((a(AlphaLevel::Ordinal) - 407.0 / 441.0).abs() < 1e-12);
        assert!((a(AlphaLevel::Interval) - 280.0 / 297.0).abs() < 1e-12);
    }

    #[test]
    fn missing_ratings_are_skipped() {
        let m = vec![vec![Some(1.0), Some(2.0), None], row(&[1, 2, 3])];
        assert_eq!(krippendorff_alpha(&m, AlphaLevel::Nominal), Ok(Some(1.0)));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(krippendorff_alpha(&[row(&[1])], AlphaLevel::Nominal), Err(MetricError::TooFewRaters(1)));
        let m = vec![vec![Some(1.0), None], vec![None, Some(2.0)]];
        assert_eq!(krippendorff_alpha(&m, AlphaLevel::Nominal), Err(MetricError::InsufficientOverlap));
        let constant = vec![row(&[3, 3]), row(&[3, 3])];
        assert_eq!(krippendorff_alpha(&constant, AlphaLevel::Ordinal), Ok(None));
    }
}
