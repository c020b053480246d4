use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::MeasureField;
use crate::catalog::{ChiWeight, Herm2};
use crate::error::{LabError, Result};
use crate::grid::{ComplexHessianField, GridDomain};

/// `4^n · n!`: the density of `(dd^c u)^n` per unit `det H`.
pub fn ma_constant(n: usize) -> f64 {
    match n {
        1 => 4.0,
        _ => 32.0,
    }
}

/// Clipping policy for densities that should be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Eigenvalue tolerance relative to `max |H|`.
    pub tol_psd_rel: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { tol_psd_rel: 1e-6 }
    }
}

impl DensityOptions {
    /// Density-level tolerance: first-order effect of an eigenvalue error of
    /// `tol_psd_rel · max|H|` on an n-fold product.
    fn density_tol(&self, n: usize, scale: f64) -> f64 {
        ma_constant(n) * n as f64 * self.tol_psd_rel * scale.powi(n as i32)
    }
}

fn assemble<F>(h: &ComplexHessianField, tol: f64, f: F) -> MeasureField
where
    F: Fn(usize) -> f64 + Sync,
{
    let d = h.domain();
    let raw: Vec<(f64, bool)> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !h.valid()[i] {
                return (0.0, false);
            }
            let v = f(i);
            if v < -tol {
                (0.0, true)
            } else {
                (v, false)
            }
        })
        .collect();
    let clipped = raw.iter().filter(|r| r.1).count();
    let density = raw.into_iter().map(|r| r.0).collect();
    MeasureField::new(d.clone(), density, h.valid().to_vec(), h.provenance()).unwrap().with_clipping(clipped, tol)
}

pub(crate) fn det_n(h: &Herm2, n: usize) -> f64 {
    if n == 1 {
        h.a11
    } else {
        h.det()
    }
}

pub(crate) fn mixed_raw(g: &[Complex64; 2], h: &Herm2, n: usize) -> f64 {
    if n == 1 {
        4.0 * g[0].norm_sqr()
    } else {
        16.0 * Herm2::outer(g).mixed(h)
    }
}

/// `(dd^c u)^n = 4^n n! det H`, clipped below `−tol`.
pub fn ma_density(h: &ComplexHessianField) -> MeasureField {
    ma_density_with(h, &DensityOptions::default())
}

pub fn ma_density_with(h: &ComplexHessianField, opts: &DensityOptions) -> MeasureField {
    let n = h.domain().n();
    let tol = opts.density_tol(n, h.max_abs());
    let c = ma_constant(n);
    assemble(h, tol, |i| c * det_n(h.hess(i), n))
}

/// `du ∧ d^c u ∧ (dd^c u)^{n−1}`.
pub fn mixed_density(h: &ComplexHessianField) -> MeasureField {
    let n = h.domain().n();
    let g_scale = (0..h.domain().len())
        .into_par_iter()
        .filter(|&i| h.valid()[i])
        .map(|i| h.grad(i)[0].norm_sqr() + h.grad(i)[1].norm_sqr())
        .reduce(|| 0.0, f64::max);
    let c = if n == 1 { 4.0 } else { 32.0 };
    let tol = DensityOptions::default().tol_psd_rel * c * g_scale * h.max_abs().powi(n as i32 - 1);
    assemble(h, tol, |i| mixed_raw(h.grad(i), h.hess(i), n))
}

/// `(dd^c χ(u))^n = χ'^n (dd^c u)^n + n χ'' χ'^{n−1} du∧d^c u∧(dd^c u)^{n−1}`.
pub fn chi_pushforward_density(h: &ComplexHessianField, chi: &ChiWeight) -> Result<MeasureField> {
    let d = h.domain();
    let n = d.n();
    let c = ma_constant(n);
    let vals = h.values();
    let factors: Vec<(f64, f64)> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !h.valid()[i] {
                return Ok((0.0, 0.0));
            }
            let e = chi.eval(vals[i])?;
            let d2 = e.d2.ok_or_else(|| LabError::ChiNotEvaluable(chi.to_string()))?;
            Ok((e.d1, d2))
        })
        .collect::<Result<_>>()?;
    let scale = (0..d.len())
        .into_par_iter()
        .filter(|&i| h.valid()[i])
        .map(|i| {
            let (d1, d2) = factors[i];
            d1.abs().powi(n as i32) * h.hess(i).max_abs().powi(n as i32) + d2.abs() * mixed_raw(h.grad(i), h.hess(i), n).abs()
        })
        .reduce(|| 0.0, f64::max);
    let tol = DensityOptions::default().tol_psd_rel * n as f64 * c * scale;
    Ok(assemble(h, tol, |i| {
        let (d1, d2) = factors[i];
        let ma = c * det_n(h.hess(i), n);
        let mx = mixed_raw(h.grad(i), h.hess(i), n);
        d1.powi(n as i32) * ma + n as f64 * d2 * d1.powi(n as i32 - 1) * mx
    }))
}

/// Density of `du ∧ d^c v ∧ ω^{n−1}` (symmetrized in u and v).
pub fn gradient_pairing_density(hu: &ComplexHessianField, hv: &ComplexHessianField) -> Result<MeasureField> {
    if !hu.domain().is_same_shape(hv.domain()) {
        return Err(LabError::GridMismatch("gradient fields on different grids".into()));
    }
    let d = hu.domain();
    let n = d.n();
    let c = if n == 1 { 4.0 } else { 16.0 };
    let valid: Vec<bool> = hu.valid().iter().zip(hv.valid()).map(|(a, b)| *a && *b).collect();
    let density = (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !valid[i] {
                return 0.0;
            }
            let (a, b) = (hu.grad(i), hv.grad(i));
            c * (0..n).map(|k| (a[k] * b[k].conj()).re).sum::<f64>()
        })
        .collect();
    MeasureField::new(d.clone(), density, valid, hu.provenance())
}

/// A finite family of complex lines `{z_fixed = c}` carrying weight `leaf_weight` each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFamily {
    pub fixed: usize,
    pub base_points: Vec<Complex64>,
    pub leaf_weight: f64,
}

impl SliceFamily {
    /// Leaves through every `stride`-th node of the fixed variable's plane,
    /// each weighted by the area `(stride·h)²` it represents.
    pub fn lattice(domain: &GridDomain, fixed: usize, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(LabError::InvalidParameter("leaf stride must be positive".into()));
        }
        let base = domain.base_plane(fixed)?;
        let c = base.counts();
        let mut base_points = Vec::new();
        for a in (0..c[0]).step_by(stride) {
            for b in (0..c[1]).step_by(stride) {
                base_points.push(base.point(base.index(&[a, b]))[0]);
            }
        }
        Ok(SliceFamily { fixed, base_points, leaf_weight: (stride as f64 * domain.h()).powi(2) })
    }

    /// Base-plane node index of every base point; errors if one is off the lattice.
    pub fn base_nodes(&self, domain: &GridDomain) -> Result<Vec<usize>> {
        let base = domain.base_plane(self.fixed)?;
        let h = domain.h();
        self.base_points
            .iter()
            .map(|c| {
                let idx = base
                    .nearest_node(&[c.re, c.im])
                    .ok_or_else(|| LabError::UnsupportedCurrent(format!("base point {c} outside the grid")))?;
                let p = base.point(idx)[0];
                if (p - c).norm() > 1e-9 * h {
                    return Err(LabError::UnsupportedCurrent(format!("base point {c} is not a lattice node")));
                }
                Ok(idx)
            })
            .collect()
    }
}

/// Closed positive currents paired with `(dd^c u)^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CurrentKind {
    Trivial,
    OmegaPower,
    Slice(SliceFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentSpec {
    pub kind: CurrentKind,
    /// Degree of the Monge-Ampère factor.
    pub q: usize,
}

impl CurrentSpec {
    pub fn trivial(n: usize) -> Self {
        CurrentSpec { kind: CurrentKind::Trivial, q: n }
    }

    pub fn omega(q: usize) -> Self {
        CurrentSpec { kind: CurrentKind::OmegaPower, q }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = match &self.kind {
            CurrentKind::Trivial => self.q == n,
            CurrentKind::OmegaPower => self.q >= 1 && self.q <= n,
            CurrentKind::Slice(f) => n == 2 && self.q == 1 && f.fixed < 2 && f.leaf_weight > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::UnsupportedCurrent(format!("{:?} with q = {} in dimension {n}", self.kind, self.q)))
        }
    }
}

/// `(dd^c u)^q ∧ T`.
pub fn wedge_with_current(h: &ComplexHessianField, t: &CurrentSpec) -> Result<MeasureField> {
    let d = h.domain();
    let n = d.n();
    t.validate(n)?;
    match &t.kind {
        CurrentKind::Trivial => Ok(ma_density(h)),
        CurrentKind::OmegaPower if t.q == n => Ok(ma_density(h)),
        CurrentKind::OmegaPower => {
            // n = 2, q = 1: 16 · tr H
            let tol = DensityOptions::default().density_tol(1, h.max_abs()) * 4.0;
            Ok(assemble(h, tol, |i| 16.0 * h.hess(i).trace()))
        }
        CurrentKind::Slice(family) => {
            let base = d.base_plane(family.fixed)?;
            let mut on_leaf = vec![false; base.len()];
            for idx in family.base_nodes(d)? {
                on_leaf[idx] = true;
            }
            let f = family.fixed;
            let hh = d.h() * d.h();
            let tol = DensityOptions::default().density_tol(1, h.max_abs()) * family.leaf_weight / hh;
            Ok(assemble(h, tol, |i| {
                let m = d.multi_index(i);
                let b = base.index(&[m[2 * f], m[2 * f + 1]]);
                if !on_leaf[b] {
                    return 0.0;
                }
                let free = if f == 0 { h.hess(i).a22 } else { h.hess(i).a11 };
                4.0 * free * family.leaf_weight / hh
            }))
        }
    }
}
