use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::ChiWeight;
use crate::error::{LabError, Result};
use crate::quad::{integrate_2d, QuadOptions};

/// The reduced integral over `Δ_r(w0)` and the two lower bounds for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockiReport {
    pub chi: String,
    pub w0: [f64; 2],
    pub r: f64,
    pub integral: f64,
    pub quad_error: f64,
    pub relative_error: f64,
    /// `4π² χ'(log r)² / (9 (−log r) r²)`
    pub bound: f64,
    /// Integrand minimum over the disc times its area:
    /// `2π χ'(−√(log(|w0|−r) log r))² / ((−log(|w0|−r)) (|w0|+r)²) · πr²`.
    pub chain_bound: f64,
    /// `integral ≥ bound − quad_error`
    pub holds: bool,
}

fn slope(chi: &ChiWeight, t: f64) -> Result<f64> {
    let e = chi.eval(t)?;
    if e.d1.is_finite() {
        Ok(e.d1)
    } else {
        Err(LabError::ChiNotEvaluable(format!("{chi} at {t}")))
    }
}

/// `I = ∫_{Δ_r(w0)} 2π χ'(−√(log|w| log r))² / ((−log|w|) |w|²) dV₂(w)`
/// by nested adaptive quadrature in polar coordinates about `w0`.
pub fn blocki_integral(chi: &ChiWeight, w0: Complex64, r: f64, opts: &QuadOptions) -> Result<BlockiReport> {
    let m = w0.norm();
    if !(r > 0.0 && 2.0 * r < m.min(1.0 - m)) {
        return Err(LabError::RadiusConstraint(format!("need 0 < 2r < min(|w0|, 1 - |w0|); r = {r}, |w0| = {m}")));
    }
    let lr = r.ln();
    let err = std::cell::RefCell::new(None);
    let f = |rho: f64, theta: f64| {
        let w = w0 + Complex64::from_polar(rho, theta);
        let lw = w.norm().ln();
        match slope(chi, -(lw * lr).sqrt()) {
            Ok(d) => 2.0 * PI * d * d / (-lw * w.norm_sqr()) * rho,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let q = integrate_2d(f, 0.0, r, |_| 0.0, |_| 2.0 * PI, |_| Vec::new(), opts);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let d = slope(chi, lr)?;
    let bound = 4.0 * PI * PI * d * d / (9.0 * (-lr) * r * r);
    let lm = (m - r).ln();
    let dc = slope(chi, -(lm * lr).sqrt())?;
    let chain_bound = 2.0 * PI * dc * dc / (-lm * (m + r) * (m + r)) * PI * r * r;
    let relative_error = if q.value != 0.0 { q.error / q.value.abs() } else { q.error };
    Ok(BlockiReport {
        chi: chi.to_string(),
        w0: [w0.re, w0.im],
        r,
        integral: q.value,
        quad_error: q.error,
        relative_error,
        bound,
        chain_bound,
        holds: q.value >= bound - q.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ChiTable;

    #[test]
    fn flat_chi_gives_zero() {
        let chi = ChiWeight::Table(ChiTable::new(vec![-1.0, 0.0], vec![0.0, 0.0], -1.0, 0.0).unwrap());
        let r = blocki_integral(&chi, Complex64::new(0.5, 0.0), 0.1, &QuadOptions::default()).unwrap();
        assert_eq!(r.integral, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn radius_constraint() {
        let r = blocki_integral(&ChiWeight::Identity, Complex64::new(0.5, 0.0), 0.3, &QuadOptions::default());
        assert!(matches!(r, Err(LabError::RadiusConstraint(_))));
    }

    #[test]
    fn identity_bound_value() {
        let r = blocki_integral(&ChiWeight::Identity, Complex64::new(0.5, 0.0), 0.1, &QuadOptions::default()).unwrap();
        assert!((r.bound - 4.0 * PI * PI / (9.0 * 10f64.ln() * 0.01)).abs() < 1e-9);
        assert!(r.chain_bound <= r.integral);
    }
}
