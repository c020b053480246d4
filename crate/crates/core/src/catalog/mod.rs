//! Closed-form PSH functions, weights and approximation schemes.

mod chi;
mod expr;
mod jet;
mod parse;
mod sequence;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use chi::{ChiEval, ChiTable, ChiWeight};
pub use expr::{Expr, JetValue, Signature};
pub use jet::{Herm2, Jet};
pub use parse::{parse_chi, parse_expr, parse_scheme};
pub use sequence::{make_sequence, sum_product, ChiFamily, SequenceScheme};

use crate::error::{LabError, Result};

/// A closed-form function on C¹ or C².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PshSpec {
    n: usize,
    expr: Expr,
}

fn pad(point: &[Complex64]) -> [Complex64; 2] {
    let mut z = [Complex64::new(0.0, 0.0); 2];
    for (k, p) in point.iter().take(2).enumerate() {
        z[k] = *p;
    }
    z
}

impl PshSpec {
    pub fn new(n: usize, expr: Expr) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(LabError::UnsupportedDimension(n));
        }
        if expr.support() >> n != 0 {
            return Err(LabError::InvalidParameter(format!("expression `{expr}` uses variables beyond n = {n}")));
        }
        Ok(PshSpec { n, expr })
    }

    /// Parse the text form; the dimension is the number of variables used.
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(spec) = named(text.trim()) {
            return Ok(spec);
        }
        let expr = parse_expr(text)?;
        let n = expr.arity();
        PshSpec::new(n, expr)
    }

    /// Parse the text form in a fixed dimension.
    pub fn parse_in(text: &str, n: usize) -> Result<Self> {
        PshSpec::new(n, resolve(text)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    fn check_len(&self, point: &[Complex64]) -> Result<()> {
        if point.len() != self.n {
            return Err(LabError::InvalidParameter(format!("expected a point in C^{}, got {} coordinates", self.n, point.len())));
        }
        Ok(())
    }

    /// Closed-form value; errors on the singular set.
    pub fn eval(&self, point: &[Complex64]) -> Result<f64> {
        self.check_len(point)?;
        let v = self.expr.value(&pad(point))?;
        if v == f64::NEG_INFINITY {
            return Err(LabError::SingularPoint(format!("{self} is −∞ at {point:?}")));
        }
        Ok(v)
    }

    /// Exact complex gradient and Hessian.
    pub fn eval_complex_derivs(&self, point: &[Complex64]) -> Result<Jet> {
        if !self.has_analytic_derivs() {
            return Err(LabError::FiniteDifferenceOnly(self.to_string()));
        }
        self.check_len(point)?;
        match self.jet_at(&pad(point), &mut Signature::default())? {
            JetValue::Finite(j) => Ok(j),
            JetValue::NegInf => Err(LabError::SingularPoint(format!("{self} is −∞ at {point:?}"))),
        }
    }

    /// Jet away from kinks; hard cutoffs contribute their one-sided derivative.
    pub fn jet_at(&self, z: &[Complex64; 2], sig: &mut Signature) -> Result<JetValue> {
        self.expr.jet(z, sig)
    }

    pub fn has_analytic_derivs(&self) -> bool {
        !self.expr.has_hard_kinks()
    }

    /// Replace every hard cutoff by its smooth version at width `eps`.
    pub fn smoothed(&self, eps: f64) -> PshSpec {
        let expr = self.expr.map(&|e| match e {
            Expr::Max { arg, level, smoothing: None } => Expr::Max { arg, level, smoothing: Some(eps) },
            Expr::Chi { chi: ChiWeight::Cutoff { level, smoothing }, arg } if smoothing == 0.0 => {
                Expr::Chi { chi: ChiWeight::Cutoff { level, smoothing: eps }, arg }
            }
            other => other,
        });
        PshSpec { n: self.n, expr }
    }

    /// Human-readable description of where the expression is −∞ or undefined.
    pub fn singular_set(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_singular(&self.expr, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

fn collect_singular(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::LogMod(k) => out.push(format!("hyperplane z{} = 0", k + 1)),
        Expr::LogModSq { var, shift } if *shift == 0.0 => out.push(format!("hyperplane z{} = 0", var + 1)),
        Expr::NegSqrtNegLog(k) => {
            out.push(format!("hyperplane z{} = 0", k + 1));
            out.push(format!("outside |z{}| < 1", k + 1));
        }
        Expr::LogAbsLinear { .. } => out.push(format!("zero set of {e}")),
        Expr::Max { .. } => {}
        Expr::Scale(_, a) | Expr::Chi { arg: a, .. } => collect_singular(a, out),
        Expr::Sum(v) => v.iter().for_each(|t| collect_singular(t, out)),
        Expr::NegProduct(a, b) => {
            collect_singular(a, out);
            collect_singular(b, out);
        }
        _ => {}
    }
}

impl fmt::Display for PshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// A named catalog function.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub n: usize,
    pub expression: &'static str,
    pub role: &'static str,
}

/// A listed scheme or weight family.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyEntry {
    pub name: &'static str,
    pub syntax: &'static str,
    pub role: &'static str,
}

/// Everything `list` prints.
#[derive(Debug, Clone, Serialize)]
pub struct Listing {
    pub specs: Vec<CatalogEntry>,
    pub schemes: Vec<FamilyEntry>,
    pub chi: Vec<FamilyEntry>,
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "abs2-sum",
        n: 2,
        expression: "sum(abs2(z1), abs2(z2))",
        role: "Kähler potential of ω; calibrates (dd^c|z|²)² = 32",
    },
    CatalogEntry {
        name: "barrier-v",
        n: 2,
        expression: "sum(abs2(z1), re(z2, 1.0, 0.0), re(z2, 0.0, -1.0), -6.0)",
        role: "barrier |z1|² + x2 + y2 − M with M = 6 for the cube [−1, 1]⁴",
    },
    CatalogEntry {
        name: "blocki",
        n: 2,
        expression: "negprod(negsqrtlog(z1), negsqrtlog(z2))",
        role: "Blocki's maximal function on the punctured bidisc; (dd^c u)² = 0",
    },
    CatalogEntry {
        name: "cegrell",
        n: 2,
        expression: "sum(logsq(z1, 0.0), logsq(z2, 0.0))",
        role: "Cegrell's example; log_shift approximants keep mass 32π²/(1+1/j)²",
    },
    CatalogEntry {
        name: "f-neg-sqrt-log",
        n: 1,
        expression: "negsqrtlog(z1)",
        role: "one-variable factor of the Blocki function",
    },
    CatalogEntry {
        name: "log-sum",
        n: 2,
        expression: "sum(log(z1), log(z2))",
        role: "doubling-variables sum log|z| + log|w|; max_cutoff masses 8π² on a torus",
    },
    CatalogEntry {
        name: "log-z1",
        n: 2,
        expression: "log(z1)",
        role: "maximal, constant on the leaves {z1 = c}",
    },
    CatalogEntry {
        name: "re-z1",
        n: 2,
        expression: "re(z1, 1.0, 0.0)",
        role: "pluriharmonic control, zero measure",
    },
];

const SCHEMES: &[FamilyEntry] = &[
    FamilyEntry { name: "chi_compose", syntax: "chi_compose(exp) | chi_compose(cutoff, eps) | chi_compose(list, chi...)", role: "u_j = χ_j ∘ u" },
    FamilyEntry { name: "log_shift", syntax: "log_shift", role: "log|z|² → log(|z|² + 1/j)" },
    FamilyEntry { name: "max_cutoff", syntax: "max_cutoff | max_cutoff(eps)", role: "max(u, −j), per variable on separable sums" },
    FamilyEntry { name: "mollify_scale", syntax: "mollify_scale(eps0)", role: "grid mollification at radius eps0 / j" },
    FamilyEntry { name: "stationary", syntax: "stationary", role: "u_j = u" },
];

const CHI: &[FamilyEntry] = &[
    FamilyEntry { name: "cutoff", syntax: "cutoff(j) | cutoff(j, eps)", role: "max(t, −j), soft-plus smoothed when eps > 0" },
    FamilyEntry { name: "exp", syntax: "exp(m)", role: "−m(1 − e^{t/m}), bounded, decreasing to the identity as m grows" },
    FamilyEntry { name: "identity", syntax: "identity", role: "χ(t) = t" },
    FamilyEntry { name: "phi", syntax: "phi(alpha)", role: "−(−t)^α, 0 < α < 1" },
    FamilyEntry { name: "table", syntax: "table(chi0, slope0, t0, c0, t1, c1, ...)", role: "piecewise-linear χ'' ≥ 0 integrated exactly" },
];

/// The named catalog function, if any.
pub fn named(name: &str) -> Option<PshSpec> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .map(|e| PshSpec::new(e.n, parse_expr(e.expression).expect("catalog entry parses")).expect("catalog entry is valid"))
}

/// A catalog name or an expression.
fn resolve(text: &str) -> Result<Expr> {
    match named(text.trim()) {
        Some(spec) => Ok(spec.expr),
        None => parse_expr(text),
    }
}

/// Sorted listing of specs, schemes and weight families.
pub fn list_catalog() -> Listing {
    let mut specs = ENTRIES.to_vec();
    specs.sort_by_key(|e| e.name);
    let mut schemes = SCHEMES.to_vec();
    schemes.sort_by_key(|e| e.name);
    let mut chi = CHI.to_vec();
    chi.sort_by_key(|e| e.name);
    Listing { specs, schemes, chi }
}
