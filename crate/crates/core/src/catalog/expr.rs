use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chi::ChiWeight;
use super::jet::Jet;
use crate::error::{LabError, Result};

/// Expression tree for functions on C¹ or C². Variable indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    /// `|z_k|²`
    ModSq(usize),
    /// `log|z_k|`
    LogMod(usize),
    /// `log(|z_k|² + shift)`
    LogModSq { var: usize, shift: f64 },
    /// `−√(−log|z_k|)` on the punctured unit disc.
    NegSqrtNegLog(usize),
    /// `Re(coeff · z_var)`
    RePart { var: usize, coeff: Complex64 },
    /// `log|a₁z₁ + a₂z₂ + b|`
    LogAbsLinear { coeffs: [Complex64; 2], offset: Complex64 },
    Scale(f64, Box<Expr>),
    Sum(Vec<Expr>),
    /// `−f·g` for negative `f`, `g`.
    NegProduct(Box<Expr>, Box<Expr>),
    /// `max(arg, level)`; soft-plus smoothed at width `smoothing` if given.
    Max { arg: Box<Expr>, level: f64, smoothing: Option<f64> },
    Chi { chi: ChiWeight, arg: Box<Expr> },
}

/// A jet, or the value `−∞` at a pole of a logarithmic term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetValue {
    Finite(Jet),
    NegInf,
}

/// Bit pattern recording which side of every hard kink a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Signature {
    bits: u64,
    count: u32,
}

impl Signature {
    fn push(&mut self, side: bool) {
        if side {
            self.bits ^= 1 << (self.count % 64);
        }
        self.count += 1;
    }
}

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

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

impl Expr {
    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum(terms)
    }

    pub fn scale(c: f64, e: Expr) -> Expr {
        Expr::Scale(c, Box::new(e))
    }

    pub fn neg_product(a: Expr, b: Expr) -> Expr {
        Expr::NegProduct(Box::new(a), Box::new(b))
    }

    pub fn max(arg: Expr, level: f64, smoothing: Option<f64>) -> Expr {
        Expr::Max { arg: Box::new(arg), level, smoothing }
    }

    pub fn chi(chi: ChiWeight, arg: Expr) -> Expr {
        Expr::Chi { chi, arg: Box::new(arg) }
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Scale(_, e) => vec![e],
            Expr::Sum(v) => v.iter().collect(),
            Expr::NegProduct(a, b) => vec![a, b],
            Expr::Max { arg, .. } | Expr::Chi { arg, .. } => vec![arg],
            _ => vec![],
        }
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    /// Bitmask of variables the expression depends on.
    pub fn support(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::ModSq(k) | Expr::LogMod(k) | Expr::NegSqrtNegLog(k) => 1 << k,
            Expr::LogModSq { var, .. } | Expr::RePart { var, .. } => 1 << var,
            Expr::LogAbsLinear { coeffs, .. } => {
                (if coeffs[0] != CZERO { 1 } else { 0 }) | (if coeffs[1] != CZERO { 2 } else { 0 })
            }
            _ => self.children().into_iter().fold(0, |m, c| m | c.support()),
        }
    }

    /// Number of variables needed to evaluate the expression.
    pub fn arity(&self) -> usize {
        match self.support() {
            0 | 1 => 1,
            _ => 2,
        }
    }

    pub fn has_hard_kinks(&self) -> bool {
        self.any(&|e| match e {
            Expr::Max { smoothing, .. } => smoothing.is_none(),
            Expr::Chi { chi, .. } => chi.is_hard(),
            _ => false,
        })
    }

    pub fn has_log_atoms(&self) -> bool {
        self.any(&|e| matches!(e, Expr::LogMod(_) | Expr::LogModSq { .. }))
    }

    /// Whether every atom depends only on the moduli `|z_k|`.
    pub fn is_radial(&self) -> bool {
        !self.any(&|e| matches!(e, Expr::RePart { .. } | Expr::LogAbsLinear { .. }))
    }

    /// Split as `a(z₁) + b(z₂)`; constants go to `a`.
    pub fn split_separable(&self) -> Option<(Expr, Expr)> {
        match self.support() {
            0 | 1 => return Some((self.clone(), Expr::Const(0.0))),
            2 => return Some((Expr::Const(0.0), self.clone())),
            _ => {}
        }
        let Expr::Sum(terms) = self else { return None };
        let mut a = Vec::new();
        let mut b = Vec::new();
        for t in terms {
            match t.support() {
                0 | 1 => a.push(t.clone()),
                2 => b.push(t.clone()),
                _ => return None,
            }
        }
        let join = |mut v: Vec<Expr>| if v.len() == 1 { v.pop().unwrap() } else if v.is_empty() { Expr::Const(0.0) } else { Expr::Sum(v) };
        Some((join(a), join(b)))
    }

    /// Apply `f` bottom-up to every node.
    pub fn map(&self, f: &dyn Fn(Expr) -> Expr) -> Expr {
        let e = match self {
            Expr::Scale(c, e) => Expr::Scale(*c, Box::new(e.map(f))),
            Expr::Sum(v) => Expr::Sum(v.iter().map(|t| t.map(f)).collect()),
            Expr::NegProduct(a, b) => Expr::NegProduct(Box::new(a.map(f)), Box::new(b.map(f))),
            Expr::Max { arg, level, smoothing } => Expr::Max { arg: Box::new(arg.map(f)), level: *level, smoothing: *smoothing },
            Expr::Chi { chi, arg } => Expr::Chi { chi: chi.clone(), arg: Box::new(arg.map(f)) },
            leaf => leaf.clone(),
        };
        f(e)
    }

    /// Renumber variables `k → k + offset`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.map(&|e| match e {
            Expr::ModSq(k) => Expr::ModSq(k + offset),
            Expr::LogMod(k) => Expr::LogMod(k + offset),
            Expr::NegSqrtNegLog(k) => Expr::NegSqrtNegLog(k + offset),
            Expr::LogModSq { var, shift } => Expr::LogModSq { var: var + offset, shift },
            Expr::RePart { var, coeff } => Expr::RePart { var: var + offset, coeff },
            Expr::LogAbsLinear { coeffs, offset: b } if offset == 1 => {
                Expr::LogAbsLinear { coeffs: [CZERO, coeffs[0]], offset: b }
            }
            other => other,
        })
    }

    /// Jet at `z`, recording kink sides in `sig`.
    pub fn jet(&self, z: &[Complex64; 2], sig: &mut Signature) -> Result<JetValue> {
        use JetValue::*;
        Ok(match self {
            Expr::Const(c) => Finite(Jet::constant(*c)),
            Expr::ModSq(k) => Finite(Jet::single(*k, z[*k].norm_sqr(), z[*k].conj(), 1.0)),
            Expr::LogMod(k) => {
                let w = z[*k];
                if w == CZERO {
                    NegInf
                } else {
                    Finite(Jet::single(*k, w.norm().ln(), w.finv() * 0.5, 0.0))
                }
            }
            Expr::LogModSq { var, shift } => {
                let w = z[*var];
                let s = w.norm_sqr() + shift;
                if s == 0.0 {
                    NegInf
                } else {
                    Finite(Jet::single(*var, s.ln(), w.conj() / s, shift / (s * s)))
                }
            }
            Expr::NegSqrtNegLog(k) => {
                let w = z[*k];
                let r = w.norm();
                if r >= 1.0 {
                    return Err(LabError::OutsideNaturalDomain(format!("negsqrtlog needs |z{}| < 1, got {r}", k + 1)));
                }
                if r == 0.0 {
                    NegInf
                } else {
                    let l = -r.ln();
                    let sl = l.sqrt();
                    Finite(Jet::single(*k, -sl, w.finv() / (4.0 * sl), 1.0 / (16.0 * r * r * l * sl)))
                }
            }
            Expr::RePart { var, coeff } => Finite(Jet::single(*var, (coeff * z[*var]).re, coeff * 0.5, 0.0)),
            Expr::LogAbsLinear { coeffs, offset } => {
                let w = coeffs[0] * z[0] + coeffs[1] * z[1] + offset;
                if w == CZERO {
                    NegInf
                } else {
                    let inv = w.finv() * 0.5;
                    Finite(Jet { value: w.norm().ln(), grad: [coeffs[0] * inv, coeffs[1] * inv], hess: Default::default() })
                }
            }
            Expr::Scale(c, e) => match e.jet(z, sig)? {
                Finite(j) => Finite(j.scale(*c)),
                NegInf if *c > 0.0 => NegInf,
                NegInf if *c == 0.0 => Finite(Jet::constant(0.0)),
                NegInf => return Err(LabError::SingularPoint("negative multiple of a pole".into())),
            },
            Expr::Sum(terms) => {
                let mut acc = Jet::constant(0.0);
                let mut inf = false;
                for t in terms {
                    match t.jet(z, sig)? {
                        Finite(j) => acc = acc.add(&j),
                        NegInf => inf = true,
                    }
                }
                if inf {
                    NegInf
                } else {
                    Finite(acc)
                }
            }
            Expr::NegProduct(a, b) => {
                let ja = a.jet(z, sig)?;
                let jb = b.jet(z, sig)?;
                let neg = |v: &JetValue| match v {
                    Finite(j) => j.value < 0.0,
                    NegInf => true,
                };
                if !neg(&ja) || !neg(&jb) {
                    return Err(LabError::OutsideNaturalDomain("negprod factors must be negative".into()));
                }
                match (ja, jb) {
                    (Finite(x), Finite(y)) => Finite(x.mul(&y).scale(-1.0)),
                    _ => NegInf,
                }
            }
            Expr::Max { arg, level, smoothing } => {
                let ja = arg.jet(z, sig)?;
                match smoothing {
                    None => match ja {
                        Finite(j) if j.value > *level => {
                            sig.push(true);
                            Finite(j)
                        }
                        _ => {
                            sig.push(false);
                            Finite(Jet::constant(*level))
                        }
                    },
                    Some(eps) => match ja {
                        Finite(j) => {
                            let s = (j.value - level) / eps;
                            let p = sigmoid(s);
                            Finite(j.compose(level + eps * softplus(s), p, p * (1.0 - p) / eps))
                        }
                        NegInf => Finite(Jet::constant(*level)),
                    },
                }
            }
            Expr::Chi { chi, arg } => match arg.jet(z, sig)? {
                Finite(j) => {
                    let e = chi.eval(j.value)?;
                    if chi.is_hard() {
                        sig.push(e.d1 > 0.0);
                    }
                    Finite(j.compose(e.value, e.d1, e.d2.unwrap_or(0.0)))
                }
                NegInf => {
                    if chi.is_hard() {
                        sig.push(false);
                    }
                    match chi.lower_bound() {
                        Some(b) => Finite(Jet::constant(b)),
                        None => NegInf,
                    }
                }
            },
        })
    }

    /// Value at `z`; `−∞` at poles.
    pub fn value(&self, z: &[Complex64; 2]) -> Result<f64> {
        let mut sig = Signature::default();
        Ok(match self.jet(z, &mut sig)? {
            JetValue::Finite(j) => j.value,
            JetValue::NegInf => f64::NEG_INFINITY,
        })
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, items: &[String]) -> fmt::Result {
    write!(f, "{name}({})", items.join(", "))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::ModSq(k) => write!(f, "abs2(z{})", k + 1),
            Expr::LogMod(k) => write!(f, "log(z{})", k + 1),
            Expr::LogModSq { var, shift } => write!(f, "logsq(z{}, {shift:?})", var + 1),
            Expr::NegSqrtNegLog(k) => write!(f, "negsqrtlog(z{})", k + 1),
            Expr::RePart { var, coeff } => write!(f, "re(z{}, {:?}, {:?})", var + 1, coeff.re, coeff.im),
            Expr::LogAbsLinear { coeffs, offset } => write!(
                f,
                "loglin({:?}, {:?}, {:?}, {:?}, {:?}, {:?})",
                coeffs[0].re, coeffs[0].im, coeffs[1].re, coeffs[1].im, offset.re, offset.im
            ),
            Expr::Scale(c, e) => write!(f, "scale({c:?}, {e})"),
            Expr::Sum(v) => write_list(f, "sum", &v.iter().map(|t| t.to_string()).collect::<Vec<_>>()),
            Expr::NegProduct(a, b) => write!(f, "negprod({a}, {b})"),
            Expr::Max { arg, level, smoothing: None } => write!(f, "max({arg}, {level:?})"),
            Expr::Max { arg, level, smoothing: Some(eps) } => write!(f, "smax({arg}, {level:?}, {eps:?})"),
            Expr::Chi { chi, arg } => write!(f, "chi({chi}, {arg})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn modsq_jet() {
        let mut s = Signature::default();
        let JetValue::Finite(j) = Expr::ModSq(0).jet(&[c(1.0, 2.0), c(0.0, 0.0)], &mut s).unwrap() else { panic!() };
        assert_eq!(j.value, 5.0);
        assert_eq!(j.grad[0], c(1.0, -2.0));
        assert_eq!(j.hess.a11, 1.0);
    }

    #[test]
    fn cutoff_of_pole_is_level() {
        let e = Expr::max(Expr::LogMod(0), -3.0, None);
        assert_eq!(e.value(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), -3.0);
        assert_eq!(Expr::LogMod(0).value(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn separable_split() {
        let e = Expr::sum(vec![Expr::LogMod(0), Expr::LogMod(1), Expr::Const(-1.0)]);
        let (a, b) = e.split_separable().unwrap();
        assert_eq!(a, Expr::sum(vec![Expr::LogMod(0), Expr::Const(-1.0)]));
        assert_eq!(b, Expr::LogMod(1));
        let blocki = Expr::neg_product(Expr::NegSqrtNegLog(0), Expr::NegSqrtNegLog(1));
        assert!(blocki.split_separable().is_none());
    }

    #[test]
    fn kink_signature_changes_across_cutoff() {
        let e = Expr::max(Expr::LogMod(0), -1.0, None);
        let mut s1 = Signature::default();
        let mut s2 = Signature::default();
        e.jet(&[c(0.1, 0.0), c(0.0, 0.0)], &mut s1).unwrap();
        e.jet(&[c(0.9, 0.0), c(0.0, 0.0)], &mut s2).unwrap();
        assert_ne!(s1, s2);
    }

    #[test]
    fn natural_domain_is_enforced() {
        let e = Expr::NegSqrtNegLog(0);
        assert!(matches!(e.value(&[c(1.5, 0.0), c(0.0, 0.0)]), Err(LabError::OutsideNaturalDomain(_))));
    }
}
