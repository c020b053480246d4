use serde::{Deserialize, Serialize};

use super::verdict::{decide, Verdict, VerdictRule, VerdictStats};
use crate::engine::{integrate_measure, MeasureField};
use crate::error::{LabError, Result};
use crate::grid::RegionMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpShape {
    /// Supported in the real ball `|x − c| < radius`.
    Ball,
    /// Product over complex coordinates of discs `|z_k − c_k| < radius`.
    Product,
}

/// A smooth compactly supported test function built from
/// `b(s) = exp(1 − 1/(1 − s²))` for `s < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTest {
    pub center: [f64; 4],
    pub radius: f64,
    pub shape: BumpShape,
}

fn bump(s2: f64) -> f64 {
    if s2 < 1.0 {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

impl BumpTest {
    pub fn ball(center: [f64; 4], radius: f64) -> Self {
        BumpTest { center, radius, shape: BumpShape::Ball }
    }

    pub fn product(center: [f64; 4], radius: f64) -> Self {
        BumpTest { center, radius, shape: BumpShape::Product }
    }

    /// Value at real coordinates; only the first `dims` are used.
    pub fn eval(&self, x: &[f64; 4], dims: usize) -> f64 {
        let d2 = |k: usize| (x[k] - self.center[k]).powi(2) / (self.radius * self.radius);
        match self.shape {
            BumpShape::Ball => bump((0..dims).map(d2).sum()),
            BumpShape::Product => (0..dims / 2).map(|k| bump(d2(2 * k) + d2(2 * k + 1))).product(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakVerdict {
    pub test: BumpTest,
    /// `⟨μ_j, φ⟩` in sequence order.
    pub pairings: Vec<f64>,
    pub verdict: Verdict,
    pub stats: VerdictStats,
}

/// Pair each measure with each test function and judge the sequences.
pub fn weak_convergence_verdict(
    measures: &[MeasureField],
    tests: &[BumpTest],
    rule: &VerdictRule,
) -> Result<Vec<WeakVerdict>> {
    let first = measures.first().ok_or_else(|| LabError::InvalidParameter("no measures given".into()))?;
    if measures.iter().any(|m| !m.domain().is_same_shape(first.domain())) {
        return Err(LabError::GridMismatch("measures live on different grids".into()));
    }
    let full = RegionMask::full(first.domain());
    let dims = first.domain().dims();
    tests
        .iter()
        .map(|t| {
            if !(t.radius > 0.0) {
                return Err(LabError::InvalidParameter(format!("bump radius must be positive, got {}", t.radius)));
            }
            let pairings = measures
                .iter()
                .map(|m| integrate_measure(m, &full, |x| t.eval(x, dims)))
                .collect::<Result<Vec<f64>>>()?;
            let (verdict, stats) = decide(&pairings, rule)?;
            Ok(WeakVerdict { test: *t, pairings, verdict, stats })
        })
        .collect()
}
