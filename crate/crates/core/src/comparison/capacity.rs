use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Expr, PshSpec};
use crate::engine::{integrate_measure_by_node, wedge_with_current, CurrentSpec};
use crate::error::{LabError, Result};
use crate::grid::{GridDomain, RegionMask};
use crate::lab::spec_hessian;

/// How far a candidate may leave `[0, 1]` on the domain.
pub const RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMass {
    pub spec: String,
    pub mass: f64,
}

/// A lower bound for the relative capacity from a finite candidate family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub k_nodes: usize,
    pub candidates: Vec<CandidateMass>,
    /// Maximum candidate mass; a lower bound, never the supremum itself.
    pub best: f64,
    pub best_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub finite_difference: bool,
    /// Smoothing width for hard cutoffs (default `5h`).
    pub smoothing: Option<f64>,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions { finite_difference: false, smoothing: None }
    }
}

/// `max_v ∫_K (dd^c v)^q ∧ T` over candidates `v` with `0 ≤ v ≤ 1` on Ω.
pub fn capacity_estimate(
    k: &RegionMask,
    omega: &GridDomain,
    current: &CurrentSpec,
    candidates: &[PshSpec],
    opts: &CapacityOptions,
) -> Result<CapacityReport> {
    current.validate(omega.n())?;
    if !k.domain().is_same_shape(omega) {
        return Err(LabError::GridMismatch("compact set and domain use different grids".into()));
    }
    let n = omega.n();
    let inside = omega.in_domain_mask();
    let masses = candidates
        .iter()
        .enumerate()
        .map(|(index, v)| {
            if v.n() != n {
                return Err(LabError::GridMismatch(format!("candidate {index} lives in C^{}", v.n())));
            }
            let bad = (0..omega.len()).into_par_iter().filter(|&i| inside[i]).find_map_first(|i| {
                let p = omega.point(i);
                match v.eval(&p[..n]) {
                    Ok(x) if (-RANGE_TOL..=1.0 + RANGE_TOL).contains(&x) => None,
                    Ok(x) => Some(x),
                    Err(_) => Some(f64::NEG_INFINITY),
                }
            });
            if let Some(value) = bad {
                return Err(LabError::CandidateOutOfRange { index, value });
            }
            if k.is_empty() {
                return Ok(0.0);
            }
            let h = spec_hessian(v, omega, opts.smoothing, opts.finite_difference)?;
            let mu = wedge_with_current(&h, current)?;
            integrate_measure_by_node(&mu, k, |_| 1.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0.0;
    let mut best_index = None;
    for (i, &m) in masses.iter().enumerate() {
        if m > best {
            best = m;
            best_index = Some(i);
        }
    }
    Ok(CapacityReport {
        k_nodes: k.count(),
        candidates: candidates.iter().zip(&masses).map(|(c, &mass)| CandidateMass { spec: c.to_string(), mass }).collect(),
        best,
        best_index,
    })
}

/// `max(1 + log(|z_var|/R)/log(R/r), 0)` smoothed at width `eps` and rescaled
/// so it stays in `[0, 1]` on `|z_var| < R`.
pub fn log_envelope(var: usize, r: f64, big_r: f64, eps: f64) -> Result<Expr> {
    if !(r > 0.0 && big_r > r && eps > 0.0) {
        return Err(LabError::InvalidParameter(format!("need 0 < r < R and eps > 0 (r = {r}, R = {big_r}, eps = {eps})")));
    }
    let l = (big_r / r).ln();
    let arg = Expr::sum(vec![Expr::scale(1.0 / l, Expr::LogMod(var)), Expr::Const(1.0 - big_r.ln() / l)]);
    Ok(Expr::scale(1.0 / (1.0 + eps * std::f64::consts::LN_2), Expr::max(arg, 0.0, Some(eps))))
}

/// Default family on `|z| < R`: `|z|²/R²` and, for each inner radius,
/// the (averaged, in C²) log-envelopes.
pub fn default_candidates(n: usize, big_r: f64, inner: &[f64], eps: f64) -> Result<Vec<PshSpec>> {
    let mut out = Vec::new();
    let quad: Vec<Expr> = (0..n).map(Expr::ModSq).collect();
    out.push(PshSpec::new(n, Expr::scale(1.0 / (big_r * big_r), Expr::sum(quad)))?);
    for &r in inner {
        let parts = (0..n).map(|k| log_envelope(k, r, big_r, eps)).collect::<Result<Vec<_>>>()?;
        out.push(PshSpec::new(n, Expr::scale(1.0 / n as f64, Expr::sum(parts)))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Exclusion, Region};

    fn disc2() -> GridDomain {
        GridDomain::cube(1, -2.2, 2.2, 0.02, vec![Exclusion::outside_ball(2.0)]).unwrap()
    }

    #[test]
    fn empty_set_and_constant() {
        let g = disc2();
        let empty = RegionMask::new(g.clone(), vec![false; g.len()]).unwrap();
        let c = default_candidates(1, 2.0, &[1.0], 0.1).unwrap();
        assert_eq!(capacity_estimate(&empty, &g, &CurrentSpec::trivial(1), &c, &CapacityOptions::default()).unwrap().best, 0.0);
        let one = vec![PshSpec::parse_in("1", 1).unwrap()];
        let k = Region::Ball { radius: 1.0 }.to_mask(&g);
        assert_eq!(capacity_estimate(&k, &g, &CurrentSpec::trivial(1), &one, &CapacityOptions::default()).unwrap().best, 0.0);
    }

    #[test]
    fn out_of_range_candidate() {
        let g = disc2();
        let k = Region::Ball { radius: 1.0 }.to_mask(&g);
        let c = vec![PshSpec::parse("abs2(z1)").unwrap()];
        let r = capacity_estimate(&k, &g, &CurrentSpec::trivial(1), &c, &CapacityOptions::default());
        assert!(matches!(r, Err(LabError::CandidateOutOfRange { index: 0, .. })));
    }

    #[test]
    fn envelope_stays_in_range() {
        let e = log_envelope(0, 1.0, 2.0, 0.1).unwrap();
        let v = PshSpec::new(1, e).unwrap();
        for k in 1..200 {
            let x = v.eval(&[num_complex::Complex64::new(2.0 * k as f64 / 200.0, 0.0)]).unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }
}
