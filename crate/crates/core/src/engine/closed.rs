use num_complex::Complex64;

use crate::catalog::ChiWeight;
use crate::error::{LabError, Result};

fn check_disc(z: Complex64, name: &str) -> Result<f64> {
    let r = z.norm();
    if r == 0.0 {
        return Err(LabError::SingularPoint(format!("{name} = 0 lies on a singular axis")));
    }
    if r >= 1.0 {
        return Err(LabError::OutsideNaturalDomain(format!("|{name}| = {r} is not below 1")));
    }
    Ok(r)
}

/// Density of `(dd^c χ(u))²` for the Blocki function
/// `u(z, w) = −√(log|z| · log|w|)`:
/// `χ'(u) χ''(u) / (2 √(log|z| log|w|) |z|² |w|²)`.
pub fn closed_form_blocki_density(chi: &ChiWeight, point: [Complex64; 2]) -> Result<f64> {
    let r = check_disc(point[0], "z")?;
    let s = check_disc(point[1], "w")?;
    let p = r.ln() * s.ln();
    let u = -p.sqrt();
    let e = chi.eval(u)?;
    let d2 = e.d2.ok_or_else(|| LabError::ChiNotEvaluable(chi.to_string()))?;
    Ok(e.d1 * d2 / (2.0 * p.sqrt() * r * r * s * s))
}

/// Density of `du ∧ d^c u ∧ dd^c u` for the Blocki function:
/// `1 / (4 √(log|z| log|w|) |z|² |w|²)`.
pub fn closed_form_blocki_mixed(point: [Complex64; 2]) -> Result<f64> {
    let r = check_disc(point[0], "z")?;
    let s = check_disc(point[1], "w")?;
    Ok(1.0 / (4.0 * (r.ln() * s.ln()).sqrt() * r * r * s * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_zero() {
        let p = [Complex64::new(0.3, 0.1), Complex64::new(0.2, -0.4)];
        assert_eq!(closed_form_blocki_density(&ChiWeight::Identity, p).unwrap(), 0.0);
    }

    #[test]
    fn exp_family_at_inverse_e() {
        let e = (-1.0f64).exp();
        let p = [Complex64::new(e, 0.0), Complex64::new(0.0, e)];
        let d = closed_form_blocki_density(&ChiWeight::ExpFamily(1.0), p).unwrap();
        assert!((d - (2.0f64).exp() / 2.0).abs() < 1e-12);
        let m = closed_form_blocki_mixed(p).unwrap();
        assert!((m - (4.0f64).exp() / 4.0).abs() < 1e-10);
    }

    #[test]
    fn axes_are_singular() {
        let p = [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)];
        assert!(matches!(closed_form_blocki_density(&ChiWeight::Identity, p), Err(LabError::SingularPoint(_))));
    }
}
