use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Thresholds that turn a value sequence into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    /// `tends-to-zero` needs `last < tail_ratio · first`.
    pub tail_ratio: f64,
    /// `bounded-below` needs every tail value `≥ bounded_ratio · first`.
    pub bounded_ratio: f64,
    /// Values at or below this are treated as exact zeros.
    pub zero_floor: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule { tail_ratio: 0.05, bounded_ratio: 0.5, zero_floor: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TendsToZero,
    BoundedBelow,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::TendsToZero => "tends-to-zero",
            Verdict::BoundedBelow => "bounded-below",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// The numbers a verdict was decided from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictStats {
    pub first: f64,
    pub last: f64,
    /// `last / first` (NaN when `first` is zero).
    pub ratio: f64,
    /// Minimum over the second half of the sequence.
    pub tail_min: f64,
    /// Whether the second half is non-increasing.
    pub tail_monotone: bool,
}

/// Decide a verdict. The tail is the second half of the sequence (at least
/// two values when available).
pub fn decide(values: &[f64], rule: &VerdictRule) -> Result<(Verdict, VerdictStats)> {
    if values.is_empty() {
        return Err(LabError::InvalidParameter("verdict needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::InvalidParameter("verdict over non-finite values".into()));
    }
    let first = values[0];
    let last = *values.last().unwrap();
    let start = (values.len() / 2).min(values.len().saturating_sub(2));
    let tail = &values[start..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = |v: f64| v.abs() * 1e-12 + rule.zero_floor;
    let tail_monotone = tail.windows(2).all(|w| w[1] <= w[0] + slack(w[0]));
    let stats = VerdictStats { first, last, ratio: last / first, tail_min, tail_monotone };
    let verdict = if values.iter().all(|v| v.abs() <= rule.zero_floor) {
        Verdict::TendsToZero
    } else if last < rule.tail_ratio * first && tail_monotone {
        Verdict::TendsToZero
    } else if tail_min >= rule.bounded_ratio * first && tail_min > rule.zero_floor {
        Verdict::BoundedBelow
    } else {
        Verdict::Inconclusive
    };
    Ok((verdict, stats))
}
