use std::fmt;

use serde::{Deserialize, Serialize};

use super::chi::ChiWeight;
use super::expr::Expr;
use super::PshSpec;
use crate::error::{LabError, Result};

/// Which χ to use at index j in a `chi_compose` scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChiFamily {
    /// `χ_j = exp_family(j)`.
    Exp,
    /// `χ_j = cutoff(j, smoothing)`.
    Cutoff { smoothing: f64 },
    /// An explicit list, indexed from `j = 1`.
    Explicit(Vec<ChiWeight>),
}

impl ChiFamily {
    pub fn member(&self, j: u32) -> Result<ChiWeight> {
        match self {
            ChiFamily::Exp => Ok(ChiWeight::ExpFamily(j as f64)),
            ChiFamily::Cutoff { smoothing } => ChiWeight::Cutoff { level: j as f64, smoothing: *smoothing }.checked(),
            ChiFamily::Explicit(list) => list
                .get(j as usize - 1)
                .cloned()
                .ok_or_else(|| LabError::InvalidParameter(format!("chi list has no member {j}"))),
        }
    }
}

/// Approximation schemes `u ↦ u_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SequenceScheme {
    /// `max(u, −j)`, distributed over separable sums; smoothed at the given width.
    MaxCutoff { smoothing: Option<f64> },
    /// Every `log|z|²` becomes `log(|z|² + 1/j)`.
    LogShift,
    ChiCompose(ChiFamily),
    /// Mollification at radius `epsilon0 / j`; only available on grids.
    MollifyScale { epsilon0: f64 },
    /// `u_j = u` for every j.
    Stationary,
}

impl SequenceScheme {
    /// Short identifier used in reports.
    pub fn id(&self) -> &'static str {
        match self {
            SequenceScheme::MaxCutoff { .. } => "max_cutoff",
            SequenceScheme::LogShift => "log_shift",
            SequenceScheme::ChiCompose(_) => "chi_compose",
            SequenceScheme::MollifyScale { .. } => "mollify_scale",
            SequenceScheme::Stationary => "stationary",
        }
    }
}

impl fmt::Display for SequenceScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceScheme::MaxCutoff { smoothing: None } => write!(f, "max_cutoff"),
            SequenceScheme::MaxCutoff { smoothing: Some(e) } => write!(f, "max_cutoff({e:?})"),
            SequenceScheme::LogShift => write!(f, "log_shift"),
            SequenceScheme::ChiCompose(ChiFamily::Exp) => write!(f, "chi_compose(exp)"),
            SequenceScheme::ChiCompose(ChiFamily::Cutoff { smoothing }) => write!(f, "chi_compose(cutoff, {smoothing:?})"),
            SequenceScheme::ChiCompose(ChiFamily::Explicit(list)) => {
                let items: Vec<String> = list.iter().map(|c| c.to_string()).collect();
                write!(f, "chi_compose(list, {})", items.join(", "))
            }
            SequenceScheme::MollifyScale { epsilon0 } => write!(f, "mollify_scale({epsilon0:?})"),
            SequenceScheme::Stationary => write!(f, "stationary"),
        }
    }
}

fn cutoff(e: Expr, level: f64, smoothing: Option<f64>) -> Expr {
    Expr::max(e, level, smoothing)
}

/// The j-th member of the scheme applied to `spec` (j ≥ 1).
pub fn make_sequence(spec: &PshSpec, scheme: &SequenceScheme, j: u32) -> Result<PshSpec> {
    if j == 0 {
        return Err(LabError::InvalidParameter("sequence indices start at 1".into()));
    }
    let jf = j as f64;
    let expr = match scheme {
        SequenceScheme::MaxCutoff { smoothing } => {
            if let Some(e) = smoothing {
                if !(*e > 0.0) {
                    return Err(LabError::InvalidParameter(format!("smoothing width must be positive, got {e}")));
                }
            }
            match spec.expr.split_separable() {
                Some((a, b)) if spec.n == 2 && a.support() != 0 && b.support() != 0 => {
                    Expr::sum(vec![cutoff(a, -jf, *smoothing), cutoff(b, -jf, *smoothing)])
                }
                _ => cutoff(spec.expr.clone(), -jf, *smoothing),
            }
        }
        SequenceScheme::LogShift => {
            if !spec.expr.has_log_atoms() {
                return Err(LabError::IncompatibleScheme("log_shift needs logarithmic atoms".into()));
            }
            let d = 1.0 / jf;
            spec.expr.map(&|e| match e {
                Expr::LogMod(k) => Expr::scale(0.5, Expr::LogModSq { var: k, shift: d }),
                Expr::LogModSq { var, shift } => Expr::LogModSq { var, shift: shift + d },
                other => other,
            })
        }
        SequenceScheme::ChiCompose(family) => Expr::chi(family.member(j)?, spec.expr.clone()),
        SequenceScheme::MollifyScale { .. } => {
            return Err(LabError::IncompatibleScheme("mollify_scale acts on sampled grids, not expressions".into()))
        }
        SequenceScheme::Stationary => spec.expr.clone(),
    };
    PshSpec::new(spec.n, expr)
}

/// `(z, w) ↦ u(z) + v(w)`.
pub fn sum_product(u: &PshSpec, v: &PshSpec) -> Result<PshSpec> {
    let n = u.n + v.n;
    if n > 2 {
        return Err(LabError::DimensionTooLarge(n));
    }
    PshSpec::new(n, Expr::sum(vec![u.expr.clone(), v.expr.shift_vars(u.n)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn pt(a: f64, b: f64) -> [Complex64; 2] {
        [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
    }

    #[test]
    fn cutoff_of_log() {
        let u = PshSpec::new(1, Expr::LogMod(0)).unwrap();
        let u2 = make_sequence(&u, &SequenceScheme::MaxCutoff { smoothing: None }, 2).unwrap();
        assert_eq!(u2.eval(&pt((-5.0f64).exp(), 0.0)[..1]).unwrap(), -2.0);
    }

    #[test]
    fn log_shift_at_origin() {
        let u = PshSpec::parse("sum(logsq(z1, 0.0), logsq(z2, 0.0))").unwrap();
        let u4 = make_sequence(&u, &SequenceScheme::LogShift, 4).unwrap();
        assert!((u4.eval(&pt(0.0, 0.0)).unwrap() - 2.0 * 0.25f64.ln()).abs() < 1e-15);
        let pure = PshSpec::new(2, Expr::ModSq(0)).unwrap();
        assert!(matches!(make_sequence(&pure, &SequenceScheme::LogShift, 1), Err(LabError::IncompatibleScheme(_))));
    }

    #[test]
    fn chi_exp_of_blocki() {
        let u = crate::catalog::named("blocki").unwrap();
        let u1 = make_sequence(&u, &SequenceScheme::ChiCompose(ChiFamily::Exp), 1).unwrap();
        let e = (-1.0f64).exp();
        let v = u1.eval(&pt(e, e)).unwrap();
        assert!((v + (1.0 - e)).abs() < 1e-14);
    }

    #[test]
    fn product_of_logs() {
        let u = PshSpec::new(1, Expr::LogMod(0)).unwrap();
        let s = sum_product(&u, &u).unwrap();
        assert_eq!(s.n(), 2);
        let v = s.eval(&pt((-1.0f64).exp(), (-2.0f64).exp())).unwrap();
        assert!((v + 3.0).abs() < 1e-14);
        assert!(matches!(sum_product(&s, &u), Err(LabError::DimensionTooLarge(3))));
    }
}
