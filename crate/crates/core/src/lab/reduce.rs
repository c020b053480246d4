//! Closed-form estimators for radial functions.
//!
//! Integrals are taken in logarithmic radii `τ_k = log|z_k|`, which turns
//! the poles at the axes into half-lines. Panels are split at powers of two
//! in `τ` so each scale gets its own quadrature rule.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::catalog::{Expr, JetValue, PshSpec, Signature};
use crate::engine::density::{det_n, mixed_raw};
use crate::engine::radial::{RadialTerm, R_FLOOR};
use crate::engine::ma_constant;
use crate::error::{LabError, Result};
use crate::grid::Region;
use crate::quad::{find_breakpoints, integrate_with_breaks, QuadOptions};

const CUT_SAMPLES: usize = 24;

/// Which measure a radial factor contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Part {
    /// `dd^c a`
    Mass,
    /// `da ∧ d^c a`
    Energy,
}

/// `g(u) · 1{u > level}` for the integrand of a scan.
pub(crate) struct Integrand<'a> {
    pub weight: &'a (dyn Fn(f64) -> f64 + Sync),
    pub level: Option<f64>,
}

impl Integrand<'_> {
    fn at(&self, u: f64) -> f64 {
        match self.level {
            Some(l) if !(u > l) => 0.0,
            _ => (self.weight)(u),
        }
    }
}

/// Radial ranges `[lo, hi)` of a region, per variable.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Shape {
    Box { lo: [f64; 2], hi: [f64; 2] },
    Ball { radius: f64 },
}

impl Shape {
    pub(crate) fn from_region(region: &Region, n: usize) -> Result<Shape> {
        if region.is_empty(n) {
            return Err(LabError::EmptyRegion);
        }
        Ok(match region {
            Region::Polydisc { inner, outer } => Shape::Box { lo: *inner, hi: *outer },
            Region::Ball { radius } => Shape::Ball { radius: *radius },
        })
    }

    fn range(&self, var: usize) -> (f64, f64) {
        match self {
            Shape::Box { lo, hi } => (lo[var], hi[var]),
            Shape::Ball { radius } => (0.0, *radius),
        }
    }

    /// Upper radius of the other variable given this one.
    fn other_hi(&self, var: usize, r: f64) -> f64 {
        match self {
            Shape::Box { hi, .. } => hi[1 - var],
            Shape::Ball { radius } => (radius * radius - r * r).max(0.0).sqrt(),
        }
    }
}

fn tau_floor(r: f64) -> f64 {
    r.max(R_FLOOR).ln()
}

fn scale_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut t = -0.125;
    while t > lo {
        if t < hi {
            out.push(t);
        }
        t *= 2.0;
    }
    out.push(hi);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn merge(mut a: Vec<f64>, b: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    a.extend(b.iter().copied().filter(|&t| t > lo && t < hi));
    a.push(lo);
    a.push(hi);
    a.retain(|&t| t >= lo && t <= hi);
    a.sort_by(f64::total_cmp);
    a.dedup();
    a
}

/// A radial factor `a(|z_var|)` with its ring measure on `[lo, hi)`.
pub(crate) struct Ring {
    term: RadialTerm,
    atoms: Vec<(f64, f64)>,
    breaks: Vec<f64>,
}

impl Ring {
    pub(crate) fn new(expr: &Expr, var: usize, lo: f64, hi: f64) -> Result<Ring> {
        let term = RadialTerm::new(expr, var)?;
        let m = term.measure(lo, hi)?;
        let (t_lo, t_hi) = (m.breaks[0], *m.breaks.last().unwrap());
        let breaks = merge(scale_breaks(t_lo, t_hi), &m.breaks, t_lo, t_hi);
        Ok(Ring { term, atoms: m.atoms, breaks })
    }

    fn atoms(&self, part: Part) -> &[(f64, f64)] {
        match part {
            Part::Mass => &self.atoms,
            Part::Energy => &[],
        }
    }

    fn density(&self, part: Part, tau: f64) -> Result<f64> {
        match part {
            Part::Mass => self.term.mass_density_tau(tau),
            Part::Energy => self.term.energy_density_tau(tau),
        }
    }

    fn value(&self, r: f64) -> Result<f64> {
        self.term.value(r)
    }

    fn breaks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        merge(Vec::new(), &self.breaks, lo, hi)
    }
}

struct Errs(RefCell<Option<LabError>>);

impl Errs {
    fn new() -> Self {
        Errs(RefCell::new(None))
    }

    fn take<T: Default>(&self, r: Result<T>) -> T {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                T::default()
            }
        }
    }

    fn finish(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// `(value, error estimate)`.
pub(crate) type Estimate = (f64, f64);

fn add(a: Estimate, b: Estimate) -> Estimate {
    (a.0 + b.0, a.1 + b.1)
}

/// Add the crossings of `u(τ) = level` inside each panel.
fn with_cut(mut pts: Vec<f64>, level: Option<f64>, u: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let Some(l) = level else { return pts };
    let mut extra = Vec::new();
    for w in pts.windows(2) {
        extra.extend(find_breakpoints(|t| u(t) > l, w[0], w[1], CUT_SAMPLES));
    }
    pts.extend(extra);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ g(a) d(part of a)` over `[lo, hi)` (one variable).
pub(crate) fn single(a: &Ring, part: Part, g: &Integrand, lo: f64, hi: f64, opts: &QuadOptions) -> Result<Estimate> {
    let errs = Errs::new();
    let mut atoms = 0.0;
    for &(r, m) in a.atoms(part) {
        if r >= lo && r < hi {
            atoms += m * g.at(errs.take(a.value(r)));
        }
    }
    let (t_lo, t_hi) = (tau_floor(lo), hi.ln());
    let pts = with_cut(a.breaks_in(t_lo, t_hi), g.level, &|t| errs.take(a.value(t.exp())));
    let q = integrate_with_breaks(
        &mut |t| {
            let d = errs.take(a.density(part, t));
            if d == 0.0 {
                0.0
            } else {
                d * g.at(errs.take(a.value(t.exp())))
            }
        },
        &pts,
        opts,
    );
    errs.finish()?;
    Ok((atoms + q.value, q.error))
}

/// `∫∫ g(a + b) d(pa of a) d(pb of b)` over the region (two variables).
pub(crate) fn pair(
    a: &Ring,
    pa: Part,
    b: &Ring,
    pb: Part,
    g: &Integrand,
    shape: &Shape,
    opts: &QuadOptions,
) -> Result<Estimate> {
    let errs = Errs::new();
    let (a_lo, a_hi) = shape.range(0);
    let (b_lo, b_hi) = shape.range(1);
    let inside = |r: f64, s: f64| r >= a_lo && r < a_hi && s >= b_lo && s < shape.other_hi(0, r).min(b_hi);
    let mut total: Estimate = (0.0, 0.0);

    for &(r, ma) in a.atoms(pa) {
        for &(s, mb) in b.atoms(pb) {
            if inside(r, s) {
                total.0 += ma * mb * g.at(errs.take(a.value(r)) + errs.take(b.value(s)));
            }
        }
    }

    // Atoms of one factor against the density of the other.
    let line = |x: &Ring, px: Part, y: &Ring, py: Part, var: usize| -> Estimate {
        let (x_lo, x_hi) = shape.range(var);
        let (y_lo, y_hi) = shape.range(1 - var);
        let mut acc = (0.0, 0.0);
        for &(r, m) in x.atoms(px) {
            if !(r >= x_lo && r < x_hi) {
                continue;
            }
            let ur = errs.take(x.value(r));
            let top = shape.other_hi(var, r).min(y_hi);
            if !(top > y_lo) {
                continue;
            }
            let (t_lo, t_hi) = (tau_floor(y_lo), top.ln());
            let pts = with_cut(y.breaks_in(t_lo, t_hi), g.level, &|t| ur + errs.take(y.value(t.exp())));
            let q = integrate_with_breaks(
                &mut |t| {
                    let d = errs.take(y.density(py, t));
                    if d == 0.0 {
                        0.0
                    } else {
                        d * g.at(ur + errs.take(y.value(t.exp())))
                    }
                },
                &pts,
                opts,
            );
            acc = add(acc, (m * q.value, m.abs() * q.error));
        }
        acc
    };
    total = add(total, line(a, pa, b, pb, 0));
    total = add(total, line(b, pb, a, pa, 1));

    // Density against density.
    let inner_opts = QuadOptions { abs_tol: opts.abs_tol * 0.1, rel_tol: opts.rel_tol * 0.1, ..*opts };
    let inner_err = RefCell::new(0.0);
    let outer_pts = a.breaks_in(tau_floor(a_lo), a_hi.ln());
    let q = integrate_with_breaks(
        &mut |t1| {
            let da = errs.take(a.density(pa, t1));
            if da == 0.0 {
                return 0.0;
            }
            let r = t1.exp();
            let ur = errs.take(a.value(r));
            let top = shape.other_hi(0, r).min(b_hi);
            if !(top > b_lo) {
                return 0.0;
            }
            let (t_lo, t_hi) = (tau_floor(b_lo), top.ln());
            let pts = with_cut(b.breaks_in(t_lo, t_hi), g.level, &|t| ur + errs.take(b.value(t.exp())));
            let qi = integrate_with_breaks(
                &mut |t2| {
                    let db = errs.take(b.density(pb, t2));
                    if db == 0.0 {
                        0.0
                    } else {
                        db * g.at(ur + errs.take(b.value(t2.exp())))
                    }
                },
                &pts,
                &inner_opts,
            );
            *inner_err.borrow_mut() += qi.error.abs() * da.abs();
            da * qi.value
        },
        &outer_pts,
        opts,
    );
    let span = outer_pts.last().unwrap() - outer_pts[0];
    let evals = (q.evaluations.max(1)) as f64;
    let inner = inner_err.into_inner();
    total = add(total, (q.value, q.error + inner / evals * span));
    errs.finish()?;
    Ok(total)
}

/// What a bi-radial integrand measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BiDensity {
    /// `(dd^c u)²`
    Ma,
    /// `(dd^c u)² + du ∧ d^c u ∧ dd^c u`
    MaPlusMixed,
}

/// `∫ g(u) dμ` for a smooth function of `(|z1|, |z2|)` and `μ` built from
/// its jets, reduced to the `(τ1, τ2)` quadrant.
pub(crate) fn biradial(spec: &PshSpec, what: BiDensity, g: &Integrand, shape: &Shape, opts: &QuadOptions) -> Result<Estimate> {
    if spec.n() != 2 || !spec.expr().is_radial() {
        return Err(LabError::InvalidParameter(format!("`{spec}` is not a function of (|z1|, |z2|)")));
    }
    if spec.expr().has_hard_kinks() {
        return Err(LabError::NeedsSmoothing(spec.to_string()));
    }
    let errs = Errs::new();
    let c = ma_constant(2);
    let jet = |t1: f64, t2: f64| -> Option<(f64, f64)> {
        let z = [Complex64::new(t1.exp(), 0.0), Complex64::new(t2.exp(), 0.0)];
        match errs.take(spec.jet_at(&z, &mut Signature::default()).map(Some)) {
            Some(JetValue::Finite(j)) => {
                let ma = (c * det_n(&j.hess, 2)).max(0.0);
                let d = match what {
                    BiDensity::Ma => ma,
                    BiDensity::MaPlusMixed => ma + mixed_raw(&j.grad, &j.hess, 2).max(0.0),
                };
                Some((j.value, d))
            }
            _ => None,
        }
    };
    let value = |t1: f64, t2: f64| jet(t1, t2).map(|j| j.0).unwrap_or(f64::NEG_INFINITY);
    let (a_lo, a_hi) = shape.range(0);
    let (b_lo, b_hi) = shape.range(1);
    let inner_opts = QuadOptions { abs_tol: opts.abs_tol * 0.1, rel_tol: opts.rel_tol * 0.1, ..*opts };
    let inner_err = RefCell::new(0.0);
    let outer_pts = scale_breaks(tau_floor(a_lo), a_hi.ln());
    let q = integrate_with_breaks(
        &mut |t1| {
            let r = t1.exp();
            let top = shape.other_hi(0, r).min(b_hi);
            if !(top > b_lo) {
                return 0.0;
            }
            let (t_lo, t_hi) = (tau_floor(b_lo), top.ln());
            let pts = with_cut(scale_breaks(t_lo, t_hi), g.level, &|t2| value(t1, t2));
            let qi = integrate_with_breaks(
                &mut |t2| match jet(t1, t2) {
                    Some((u, d)) if d != 0.0 => {
                        let s = t2.exp();
                        4.0 * PI * PI * r * r * s * s * d * g.at(u)
                    }
                    _ => 0.0,
                },
                &pts,
                &inner_opts,
            );
            *inner_err.borrow_mut() += qi.error.abs();
            qi.value
        },
        &outer_pts,
        opts,
    );
    errs.finish()?;
    let span = outer_pts.last().unwrap() - outer_pts[0];
    let evals = (q.evaluations.max(1)) as f64;
    let inner = inner_err.into_inner();
    Ok((q.value, q.error + inner / evals * span))
}
