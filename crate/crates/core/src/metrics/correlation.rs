use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{check_paired, MetricError};

fn cmp(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

/// Sum of `t(t-1)/2` over runs of equal values in a sorted slice.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    if !sorted.is_empty() {
        total += run * (run - 1) / 2;
    }
    total
}

/// Stable merge sort returning the number of strict inversions.
fn sort_counting_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mut buf = vec![0.0; n];
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if cmp(v[i], v[j]) == Ordering::Greater {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + end - j].copy_from_slice(&v[j..end]);
            start = end;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

/// Kendall's tau-b in O(n log n). `None` when either input is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<Option<f64>, MetricError> {
    check_paired(x, y, 2)?;
    let n = x.len() as u64;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| cmp(x[a], x[b]).then(cmp(y[a], y[b])));

    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let pairs: Vec<(f64, f64)> = order.iter().map(|&i| (x[i], y[i])).collect();
    let x_ties = tied_pairs(&xs);
    let joint_ties = tied_pairs(&pairs);

    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let discordant = sort_counting_inversions(&mut ys);
    let y_ties = tied_pairs(&ys);

    let total = n * (n - 1) / 2;
    let untied_x = total - x_ties;
    let untied_y = total - y_ties;
    if untied_x == 0 || untied_y == 0 {
        return Ok(None);
    }
    let diff = total as i64 - x_ties as i64 - y_ties as i64 + joint_ties as i64 - 2 * discordant as i64;
    let denom = libm::sqrt(untied_x as f64) * libm::sqrt(untied_y as f64);
    Ok(Some(diff as f64 / denom))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| cmp(v[a], v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation. `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>, MetricError> {
    check_paired(x, y, 2)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (libm::sqrt(sxx) * libm::sqrt(syy))).clamp(-1.0, 1.0)))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<Option<f64>, MetricError> {
    check_paired(x, y, 2)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Mean squared error.
pub fn mse(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    check_paired(x, y, 1)?;
    let sum: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn known_values() {
        assert!(close(kendall_tau_b(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap().unwrap(), 2.0 / 3.0));
        assert!(close(kendall_tau_b(&[1., 1., 2.], &[1., 2., 2.]).unwrap().unwrap(), 0.5));
        assert!(close(spearman_rho(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap().unwrap(), 0.8));
        assert!(close(spearman_rho(&[1., 1., 2.], &[2., 1., 1.]).unwrap().unwrap(), -0.5));
        assert_eq!(mse(&[1., 5.], &[2., 3.]), Ok(2.5));
        assert_eq!(mse(&[1.], &[5.]), Ok(16.0));
    }

    #[test]
    fn constant_input_is_undefined() {
        assert_eq!(kendall_tau_b(&[2., 2., 2.], &[1., 2., 3.]), Ok(None));
        assert_eq!(spearman_rho(&[1., 2., 3.], &[4., 4., 4.]), Ok(None));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(kendall_tau_b(&[1.], &[1.]), Err(MetricError::TooFewItems { needed: 2, got: 1 }));
        assert_eq!(mse(&[1., 2.], &[1.]), Err(MetricError::LengthMismatch { left: 2, right: 1 }));
        assert_eq!(mse(&[], &[]), Err(MetricError::TooFewItems { needed: 1, got: 0 }));
        assert_eq!(pearson(&[f64::NAN, 1.], &[1., 2.]), Err(MetricError::NotFinite));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3., 1., 3., 2.]), [3.5, 1.0, 3.5, 2.0]);
    }
}
