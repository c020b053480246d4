use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::{biradial, pair, single, BiDensity, Estimate, Integrand, Part, Ring, Shape};
use super::verdict::{decide, Verdict, VerdictRule, VerdictStats};
use crate::catalog::{make_sequence, PshSpec, SequenceScheme};
use crate::engine::{integrate_measure_by_node, ma_density, mixed_density};
use crate::error::{LabError, Result};
use crate::grid::{
    analytic_hessian, complex_hessian, mollify, sample, ComplexHessianField, GridDomain, MollifierSpec, Region,
};
use crate::quad::QuadOptions;

/// Weight applied to `u_j` inside a scan integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    /// `(|u| + 1)^{−a}`
    ShiftedPower { a: f64 },
    /// `|u|^{−a}`
    AbsPower { a: f64 },
    Unit,
}

impl WeightKind {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            WeightKind::ShiftedPower { a } => (u.abs() + 1.0).powf(-a),
            WeightKind::AbsPower { a } => u.abs().powf(-a),
            WeightKind::Unit => 1.0,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            WeightKind::ShiftedPower { a } | WeightKind::AbsPower { a } => Some(a),
            WeightKind::Unit => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.exponent() {
            Some(a) if !(a >= 0.0 && a.is_finite()) => {
                Err(LabError::InvalidParameter(format!("weight exponent must be finite and >= 0, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// The integral a scan tracks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Quantity {
    /// `∫_U w(u_j) (dd^c u_j)^n`
    WeightedMa { weight: WeightKind },
    /// `∫_{U ∩ {u_j > −t}} (dd^c u_j)^n + du_j ∧ d^c u_j ∧ (dd^c u_j)^{n−1}`
    M1Truncated { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Pick the cheapest exact reduction the function admits, else the grid.
    Auto,
    /// Separable sums of radial terms: product of ring measures.
    RadialProduct,
    /// Smooth functions of `(|z1|, |z2|)`: 2-D quadrature in log radii.
    BiRadial,
    /// Densities on a grid.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub estimator: Estimator,
    /// Required by the grid estimator.
    pub grid: Option<GridDomain>,
    pub rule: VerdictRule,
    pub quad: QuadOptions,
    /// Smoothing width for hard cutoffs on the grid (default `5h`).
    pub smoothing: Option<f64>,
    /// Use finite differences rather than analytic jets on the grid.
    pub finite_difference: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            estimator: Estimator::Auto,
            grid: None,
            rule: VerdictRule::default(),
            quad: QuadOptions { abs_tol: 1e-12, rel_tol: 1e-9, max_panels: 2000 },
            smoothing: None,
            finite_difference: true,
        }
    }
}

/// Per-j values of a scan with the verdict they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub spec: String,
    pub scheme: String,
    pub scheme_id: String,
    pub estimator: Estimator,
    pub quantity: Quantity,
    pub exponent: Option<f64>,
    pub truncation: Option<f64>,
    pub region: Region,
    pub j: Vec<u32>,
    pub values: Vec<f64>,
    /// Quadrature error estimates (zero for grid sums).
    pub errors: Vec<f64>,
    pub rule: VerdictRule,
    pub verdict: Verdict,
    pub stats: VerdictStats,
}

impl ScanReport {
    /// Columns `j,value,error`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| LabError::Io(e.to_string());
        out.write_record(["j", "value", "error"]).map_err(io)?;
        for k in 0..self.j.len() {
            out.write_record([self.j[k].to_string(), format!("{:?}", self.values[k]), format!("{:?}", self.errors[k])])
                .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Re-decide the verdict under another rule.
    pub fn with_rule(mut self, rule: VerdictRule) -> Result<Self> {
        let (v, s) = decide(&self.values, &rule)?;
        self.rule = rule;
        self.verdict = v;
        self.stats = s;
        Ok(self)
    }
}

fn radial_parts(spec: &PshSpec) -> Option<(crate::catalog::Expr, crate::catalog::Expr)> {
    if !spec.expr().is_radial() {
        return None;
    }
    if spec.n() == 1 {
        return Some((spec.expr().clone(), crate::catalog::Expr::Const(0.0)));
    }
    spec.expr().split_separable()
}

fn choose(spec: &PshSpec, scheme: &SequenceScheme, j0: u32, opts: &ScanOptions) -> Result<Estimator> {
    if opts.estimator != Estimator::Auto {
        return Ok(opts.estimator);
    }
    if let SequenceScheme::MollifyScale { .. } = scheme {
        return Ok(Estimator::Grid);
    }
    let u = make_sequence(spec, scheme, j0)?;
    if radial_parts(&u).is_some() {
        return Ok(Estimator::RadialProduct);
    }
    if u.n() == 2 && u.expr().is_radial() && !u.expr().has_hard_kinks() {
        return Ok(Estimator::BiRadial);
    }
    if opts.grid.is_some() {
        return Ok(Estimator::Grid);
    }
    Err(LabError::IncompatibleScheme(format!("no closed-form reduction for `{u}` and no grid given")))
}

fn product_value(u: &PshSpec, q: &Quantity, region: &Region, opts: &ScanOptions) -> Result<Estimate> {
    let (a, b) = radial_parts(u).ok_or_else(|| {
        LabError::IncompatibleScheme(format!("`{u}` is not a separable sum of radial terms"))
    })?;
    let n = u.n();
    let shape = Shape::from_region(region, n)?;
    let range = |var: usize| match region {
        Region::Polydisc { inner, outer } => (inner[var], outer[var]),
        Region::Ball { radius } => (0.0, *radius),
    };
    let (lo0, hi0) = range(0);
    let ra = Ring::new(&a, 0, lo0, hi0)?;
    let (weight, level): (Box<dyn Fn(f64) -> f64 + Sync>, Option<f64>) = match q {
        Quantity::WeightedMa { weight } => {
            let w = *weight;
            (Box::new(move |x| w.eval(x)), None)
        }
        Quantity::M1Truncated { t } => (Box::new(|_| 1.0), Some(-t)),
    };
    let g = Integrand { weight: &*weight, level };
    if n == 1 {
        return match q {
            Quantity::WeightedMa { .. } => single(&ra, Part::Mass, &g, lo0, hi0, &opts.quad),
            Quantity::M1Truncated { .. } => {
                let m = single(&ra, Part::Mass, &g, lo0, hi0, &opts.quad)?;
                let e = single(&ra, Part::Energy, &g, lo0, hi0, &opts.quad)?;
                Ok((m.0 + e.0, m.1 + e.1))
            }
        };
    }
    let (lo1, hi1) = range(1);
    let rb = Ring::new(&b, 1, lo1, hi1)?;
    let mm = pair(&ra, Part::Mass, &rb, Part::Mass, &g, &shape, &opts.quad)?;
    match q {
        Quantity::WeightedMa { .. } => Ok((2.0 * mm.0, 2.0 * mm.1)),
        Quantity::M1Truncated { .. } => {
            let gm = pair(&ra, Part::Energy, &rb, Part::Mass, &g, &shape, &opts.quad)?;
            let mg = pair(&ra, Part::Mass, &rb, Part::Energy, &g, &shape, &opts.quad)?;
            Ok((2.0 * mm.0 + gm.0 + mg.0, 2.0 * mm.1 + gm.1 + mg.1))
        }
    }
}

fn biradial_value(u: &PshSpec, q: &Quantity, region: &Region, opts: &ScanOptions) -> Result<Estimate> {
    let shape = Shape::from_region(region, u.n())?;
    match q {
        Quantity::WeightedMa { weight } => {
            let w = *weight;
            let f = move |x: f64| w.eval(x);
            biradial(u, BiDensity::Ma, &Integrand { weight: &f, level: None }, &shape, &opts.quad)
        }
        Quantity::M1Truncated { t } => {
            let f = |_: f64| 1.0;
            biradial(u, BiDensity::MaPlusMixed, &Integrand { weight: &f, level: Some(-t) }, &shape, &opts.quad)
        }
    }
}

fn grid_member(spec: &PshSpec, scheme: &SequenceScheme, j: u32, opts: &ScanOptions) -> Result<ComplexHessianField> {
    let grid = opts
        .grid
        .as_ref()
        .ok_or_else(|| LabError::InvalidParameter("the grid estimator needs a grid".into()))?;
    member_hessian(spec, scheme, j, grid, opts.smoothing, opts.finite_difference)
}

/// Complex Hessian field of the j-th member of a scheme on `grid`. Hard
/// cutoffs are smoothed at `smoothing` (default `5h`).
pub(crate) fn member_hessian(
    spec: &PshSpec,
    scheme: &SequenceScheme,
    j: u32,
    grid: &GridDomain,
    smoothing: Option<f64>,
    finite_difference: bool,
) -> Result<ComplexHessianField> {
    if spec.n() != grid.n() {
        return Err(LabError::GridMismatch("spec and grid dimension differ".into()));
    }
    if let SequenceScheme::MollifyScale { epsilon0 } = scheme {
        let f = sample(spec, grid)?;
        let m = mollify(&f, &MollifierSpec::new(epsilon0 / j as f64))?;
        return complex_hessian(&m);
    }
    spec_hessian(&make_sequence(spec, scheme, j)?, grid, smoothing, finite_difference)
}

/// Complex Hessian field of a spec on `grid`, smoothing hard cutoffs first.
pub(crate) fn spec_hessian(
    spec: &PshSpec,
    grid: &GridDomain,
    smoothing: Option<f64>,
    finite_difference: bool,
) -> Result<ComplexHessianField> {
    if spec.n() != grid.n() {
        return Err(LabError::GridMismatch("spec and grid dimension differ".into()));
    }
    let mut u = spec.clone();
    if u.expr().has_hard_kinks() {
        u = u.smoothed(smoothing.unwrap_or(5.0 * grid.h()));
    }
    if finite_difference {
        complex_hessian(&sample(&u, grid)?)
    } else {
        analytic_hessian(&u, grid)
    }
}

fn grid_value(h: &ComplexHessianField, q: &Quantity, region: &Region) -> Result<f64> {
    let mask = region.to_mask(h.domain());
    if mask.is_empty() {
        return Err(LabError::EmptyRegion);
    }
    let vals = h.values();
    match q {
        Quantity::WeightedMa { weight } => integrate_measure_by_node(&ma_density(h), &mask, |i| weight.eval(vals[i])),
        Quantity::M1Truncated { t } => {
            let ind = |i: usize| if vals[i] > -t { 1.0 } else { 0.0 };
            Ok(integrate_measure_by_node(&ma_density(h), &mask, ind)?
                + integrate_measure_by_node(&mixed_density(h), &mask, ind)?)
        }
    }
}

fn scan(
    spec: &PshSpec,
    scheme: &SequenceScheme,
    q: Quantity,
    region: &Region,
    js: &[u32],
    opts: &ScanOptions,
) -> Result<ScanReport> {
    if js.is_empty() || js.contains(&0) {
        return Err(LabError::InvalidParameter("index range must be nonempty with j >= 1".into()));
    }
    if region.is_empty(spec.n()) {
        return Err(LabError::EmptyRegion);
    }
    let est = choose(spec, scheme, js[0], opts)?;
    let per_j: Vec<Result<Estimate>> = js
        .par_iter()
        .map(|&j| match est {
            Estimator::Grid => Ok((grid_value(&grid_member(spec, scheme, j, opts)?, &q, region)?, 0.0)),
            Estimator::RadialProduct => product_value(&make_sequence(spec, scheme, j)?, &q, region, opts),
            Estimator::BiRadial => biradial_value(&make_sequence(spec, scheme, j)?, &q, region, opts),
            Estimator::Auto => unreachable!("resolved above"),
        })
        .collect();
    let mut values = Vec::with_capacity(js.len());
    let mut errors = Vec::with_capacity(js.len());
    for r in per_j {
        let (v, e) = r?;
        values.push(v);
        errors.push(e);
    }
    let (verdict, stats) = decide(&values, &opts.rule)?;
    let (exponent, truncation) = match q {
        Quantity::WeightedMa { weight } => (weight.exponent(), None),
        Quantity::M1Truncated { t } => (None, Some(t)),
    };
    Ok(ScanReport {
        spec: spec.to_string(),
        scheme: scheme.to_string(),
        scheme_id: scheme.id().to_string(),
        estimator: est,
        quantity: q,
        exponent,
        truncation,
        region: region.clone(),
        j: js.to_vec(),
        values,
        errors,
        rule: opts.rule,
        verdict,
        stats,
    })
}

/// `∫_U w(u_j) (dd^c u_j)^n` for each `j`.
pub fn weighted_ma_scan(
    spec: &PshSpec,
    scheme: &SequenceScheme,
    weight: WeightKind,
    region: &Region,
    js: &[u32],
    opts: &ScanOptions,
) -> Result<ScanReport> {
    weight.validate()?;
    scan(spec, scheme, Quantity::WeightedMa { weight }, region, js, opts)
}

/// Truncated Monge-Ampère plus gradient-energy mass on `{u_j > −t}`.
pub fn m1_truncated_scan(
    spec: &PshSpec,
    scheme: &SequenceScheme,
    t: f64,
    region: &Region,
    js: &[u32],
    opts: &ScanOptions,
) -> Result<ScanReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LabError::InvalidParameter(format!("truncation level must be positive, got {t}")));
    }
    scan(spec, scheme, Quantity::M1Truncated { t }, region, js, opts)
}
