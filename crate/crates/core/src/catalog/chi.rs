use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Value and first two derivatives of a weight at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiEval {
    pub value: f64,
    pub d1: f64,
    /// `None` where the second derivative is a measure rather than a function
    /// (hard cutoffs).
    pub d2: Option<f64>,
}

/// Convex nondecreasing weights `χ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChiWeight {
    Identity,
    /// `−(−t)^α`, `0 < α < 1`, on `t < 0`.
    PhiAlpha(f64),
    /// `−m(1 − e^{t/m})`, on `t < 0`; bounded below by `−m`.
    ExpFamily(f64),
    /// `max(t, −level)`; smoothed with a soft-plus of width `smoothing` when
    /// `smoothing > 0`.
    Cutoff { level: f64, smoothing: f64 },
    Table(ChiTable),
}

/// A weight given by a piecewise-linear, nonnegative second derivative.
///
/// `χ''` is linear between consecutive knots and zero outside them;
/// `χ(t0) = value0`, `χ'(t0) = slope0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiTable {
    knots: Vec<f64>,
    second: Vec<f64>,
    value0: f64,
    slope0: f64,
    // χ and χ' at each knot
    at_knots: Vec<(f64, f64)>,
}

impl ChiTable {
    pub fn new(knots: Vec<f64>, second: Vec<f64>, value0: f64, slope0: f64) -> Result<Self> {
        if knots.is_empty() || knots.len() != second.len() {
            return Err(LabError::InvalidParameter("table needs matching, nonempty knots and values".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidParameter("table knots must increase strictly".into()));
        }
        if second.iter().any(|&c| !(c >= 0.0)) || !(slope0 >= 0.0) {
            return Err(LabError::InvalidParameter("table must be convex and nondecreasing".into()));
        }
        if knots.iter().chain(&second).any(|v| !v.is_finite()) || !value0.is_finite() {
            return Err(LabError::InvalidParameter("table entries must be finite".into()));
        }
        let mut at_knots = vec![(value0, slope0)];
        for i in 0..knots.len() - 1 {
            let d = knots[i + 1] - knots[i];
            at_knots.push(segment(at_knots[i], second[i], second[i + 1], d, d));
        }
        Ok(ChiTable { knots, second, value0, slope0, at_knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn value0(&self) -> f64 {
        self.value0
    }

    pub fn slope0(&self) -> f64 {
        self.slope0
    }

    fn eval(&self, t: f64) -> ChiEval {
        let k = &self.knots;
        if t <= k[0] {
            return ChiEval { value: self.value0 + self.slope0 * (t - k[0]), d1: self.slope0, d2: Some(0.0) };
        }
        let last = k.len() - 1;
        if t >= k[last] {
            let (v, s) = self.at_knots[last];
            return ChiEval { value: v + s * (t - k[last]), d1: s, d2: Some(0.0) };
        }
        let i = k.partition_point(|&x| x <= t) - 1;
        let d = k[i + 1] - k[i];
        let tau = t - k[i];
        let (v, s) = segment(self.at_knots[i], self.second[i], self.second[i + 1], d, tau);
        let c = self.second[i] + (self.second[i + 1] - self.second[i]) * tau / d;
        ChiEval { value: v, d1: s, d2: Some(c) }
    }
}

// Exact integration of a linear second derivative over [0, tau] of a segment of length d.
fn segment((v, s): (f64, f64), c0: f64, c1: f64, d: f64, tau: f64) -> (f64, f64) {
    let slope = (c1 - c0) / d;
    let s1 = s + c0 * tau + slope * tau * tau / 2.0;
    let v1 = v + s * tau + c0 * tau * tau / 2.0 + slope * tau.powi(3) / 6.0;
    (v1, s1)
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

impl ChiWeight {
    /// Validate parameters.
    pub fn checked(self) -> Result<Self> {
        match &self {
            ChiWeight::PhiAlpha(a) if !(*a > 0.0 && *a < 1.0) => {
                Err(LabError::InvalidParameter(format!("phi exponent must lie in (0, 1), got {a}")))
            }
            ChiWeight::ExpFamily(m) if !(*m > 0.0 && m.is_finite()) => {
                Err(LabError::InvalidParameter(format!("exp family parameter must be positive, got {m}")))
            }
            ChiWeight::Cutoff { level, smoothing } if !(level.is_finite() && *smoothing >= 0.0) => {
                Err(LabError::InvalidParameter(format!("bad cutoff parameters ({level}, {smoothing})")))
            }
            _ => Ok(self),
        }
    }

    /// Whether `t` lies in the weight's domain.
    pub fn in_domain(&self, t: f64) -> bool {
        match self {
            ChiWeight::Identity | ChiWeight::Cutoff { .. } => t.is_finite(),
            _ => t < 0.0 && t.is_finite(),
        }
    }

    /// Infimum of `χ` over its domain, if finite.
    pub fn lower_bound(&self) -> Option<f64> {
        match self {
            ChiWeight::Identity | ChiWeight::PhiAlpha(_) => None,
            ChiWeight::ExpFamily(m) => Some(-m),
            ChiWeight::Cutoff { level, .. } => Some(-level),
            ChiWeight::Table(t) => (t.slope0 == 0.0).then_some(t.value0),
        }
    }

    pub fn eval(&self, t: f64) -> Result<ChiEval> {
        if !self.in_domain(t) {
            return Err(LabError::ChiDomain { chi: self.to_string(), value: t });
        }
        Ok(match self {
            ChiWeight::Identity => ChiEval { value: t, d1: 1.0, d2: Some(0.0) },
            ChiWeight::PhiAlpha(a) => {
                let s = -t;
                ChiEval { value: -s.powf(*a), d1: a * s.powf(a - 1.0), d2: Some(a * (1.0 - a) * s.powf(a - 2.0)) }
            }
            ChiWeight::ExpFamily(m) => {
                let e = (t / m).exp();
                ChiEval { value: m * (t / m).exp_m1(), d1: e, d2: Some(e / m) }
            }
            ChiWeight::Cutoff { level, smoothing } => {
                let floor = -level;
                if *smoothing == 0.0 {
                    if t > floor {
                        ChiEval { value: t, d1: 1.0, d2: None }
                    } else {
                        ChiEval { value: floor, d1: 0.0, d2: None }
                    }
                } else {
                    let s = (t - floor) / smoothing;
                    let p = sigmoid(s);
                    ChiEval { value: floor + smoothing * softplus(s), d1: p, d2: Some(p * (1.0 - p) / smoothing) }
                }
            }
            ChiWeight::Table(tab) => tab.eval(t),
        })
    }

    /// `χ''` where it is a function; errors for hard cutoffs.
    pub fn second_derivative(&self, t: f64) -> Result<f64> {
        self.eval(t)?.d2.ok_or_else(|| LabError::ChiNotEvaluable(self.to_string()))
    }

    /// True for the hard cutoff, whose `χ''` is a point mass.
    pub fn is_hard(&self) -> bool {
        matches!(self, ChiWeight::Cutoff { smoothing, .. } if *smoothing == 0.0)
    }
}

impl fmt::Display for ChiWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiWeight::Identity => write!(f, "identity"),
            ChiWeight::PhiAlpha(a) => write!(f, "phi({a:?})"),
            ChiWeight::ExpFamily(m) => write!(f, "exp({m:?})"),
            ChiWeight::Cutoff { level, smoothing } => write!(f, "cutoff({level:?}, {smoothing:?})"),
            ChiWeight::Table(t) => {
                write!(f, "table({:?}, {:?}", t.value0, t.slope0)?;
                for (k, c) in t.knots.iter().zip(&t.second) {
                    write!(f, ", {k:?}, {c:?}")?;
                }
                write!(f, ")")
            }
        }
    }
}
