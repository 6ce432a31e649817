//! Agreement and classification statistics.
//!
//! Statistics that are undefined for the given input (a constant vector,
//! zero expected disagreement) come back as `None`, never as a sentinel
//! number.

mod classification;
mod correlation;
mod krippendorff;
mod pairwise;

pub use classification::{
    average_reports, per_label_prf, AveragedLabel, AveragedReport, ClassificationReport, LabelMetrics,
};
pub use correlation::{average_ranks, kendall_tau_b, mse, pearson, spearman_rho};
pub use krippendorff::{krippendorff_alpha, AlphaLevel};
pub use pairwise::{cross_pairwise, pairwise_agreement, PairResult, PairwiseSummary, RatingVector};

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("need at least 2 raters, got {0}")]
    TooFewRaters(usize),
    #[error("no item is rated by two or more raters")]
    InsufficientOverlap,
    #[error("label at position {0} is not in the label set")]
    UnknownLabel(usize),
    #[error("raters {a} and {b} share no items")]
    NoCommonItems { a: String, b: String },
    #[error("duplicate item id {0}")]
    DuplicateItem(String),
    #[error("non-finite rating")]
    NotFinite,
}

pub(crate) fn check_paired(x: &[f64], y: &[f64], min: usize) -> Result<(), MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < min {
        return Err(MetricError::TooFewItems { needed: min, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MetricError::NotFinite);
    }
    Ok(())
}
