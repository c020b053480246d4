//! Closed-form reductions for functions of one variable and for separable
//! sums `a(z1) + b(z2)`.
//!
//! For a function `a` of `z_k` alone, `dd^c a = Δa dA` on the `z_k` plane;
//! its mass inside a circle of radius `r` is the flux `2πr ∂_r a`, so hard
//! kinks produce atoms equal to the jump of the flux.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::measure::MeasureField;
use crate::catalog::{Expr, JetValue, PshSpec, Signature};
use crate::error::{LabError, Result};
use crate::grid::{GridDomain, Provenance};
use crate::quad::{find_breakpoints, integrate_with_breaks, QuadOptions};

/// Smallest radius reached by radial quadrature; the flux through this
/// circle is booked as an atom at the origin.
pub const R_FLOOR: f64 = 1e-150;

const KINK_SAMPLES: usize = 400;

/// A function of the single variable `z_var`.
#[derive(Debug, Clone)]
pub struct RadialTerm {
    expr: Expr,
    var: usize,
}

/// Ring measure of a radial term on `[r_lo, r_hi)`: atoms at radii plus a
/// density in `τ = log r`.
#[derive(Debug, Clone)]
pub struct RadialMeasure {
    /// `(radius, mass)`; radius `R_FLOOR` stands for the origin.
    pub atoms: Vec<(f64, f64)>,
    /// Breakpoints in `τ`, including both ends.
    pub breaks: Vec<f64>,
}

impl RadialTerm {
    /// Requires `expr` to depend on `|z_var|` only.
    pub fn new(expr: &Expr, var: usize) -> Result<Self> {
        if !expr.is_radial() || expr.support() & !(1u8 << var) != 0 {
            return Err(LabError::InvalidParameter(format!("`{expr}` is not a radial function of z{}", var + 1)));
        }
        Ok(RadialTerm { expr: expr.clone(), var })
    }

    fn point(&self, r: f64) -> [Complex64; 2] {
        let mut z = [Complex64::new(0.0, 0.0); 2];
        z[self.var] = Complex64::new(r, 0.0);
        z
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.expr.value(&self.point(r))
    }

    /// `(value, Re ∂a/∂z, ∂²a/∂z∂z̄, |∂a/∂z|²)` at radius `r`.
    fn jet(&self, r: f64) -> Result<Option<(f64, f64, f64, f64)>> {
        let mut sig = Signature::default();
        Ok(match self.expr.jet(&self.point(r), &mut sig)? {
            JetValue::Finite(j) => {
                let g = j.grad[self.var];
                let h = if self.var == 0 { j.hess.a11 } else { j.hess.a22 };
                Some((j.value, g.re, h, g.norm_sqr()))
            }
            JetValue::NegInf => None,
        })
    }

    fn signature(&self, r: f64) -> Signature {
        let mut sig = Signature::default();
        let _ = self.expr.jet(&self.point(r), &mut sig);
        sig
    }

    /// `2πr ∂_r a`, the mass of `dd^c a` inside the circle of radius `r`
    /// (for functions without kinks inside).
    pub fn flux(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r)?.map(|j| 4.0 * PI * r * j.1).unwrap_or(0.0))
    }

    /// Absolutely continuous part of `dd^c a` per unit `τ = log r`.
    pub fn mass_density_tau(&self, tau: f64) -> Result<f64> {
        let r = tau.exp();
        Ok(self.jet(r)?.map(|j| 8.0 * PI * r * r * j.2).unwrap_or(0.0))
    }

    /// Density of `da ∧ d^c a` per unit `τ`.
    pub fn energy_density_tau(&self, tau: f64) -> Result<f64> {
        let r = tau.exp();
        Ok(self.jet(r)?.map(|j| 8.0 * PI * r * r * j.3).unwrap_or(0.0))
    }

    /// Atoms and breakpoints of `dd^c a` on the annulus `r_lo ≤ r < r_hi`.
    pub fn measure(&self, r_lo: f64, r_hi: f64) -> Result<RadialMeasure> {
        let t_lo = r_lo.max(R_FLOOR).ln();
        let t_hi = r_hi.ln();
        if !(t_hi > t_lo) {
            return Err(LabError::EmptyRegion);
        }
        let kinks = find_breakpoints(|t| self.signature(t.exp()), t_lo, t_hi, KINK_SAMPLES);
        let mut atoms = Vec::new();
        if r_lo <= R_FLOOR {
            let m = self.flux(R_FLOOR)?;
            if m != 0.0 {
                atoms.push((R_FLOOR, m));
            }
        }
        for &t in &kinks {
            let r = t.exp();
            let jump = self.flux(r * (1.0 + 1e-9))? - self.flux(r * (1.0 - 1e-9))?;
            if jump != 0.0 {
                atoms.push((r, jump));
            }
        }
        let mut breaks = vec![t_lo];
        breaks.extend(kinks);
        breaks.push(t_hi);
        Ok(RadialMeasure { atoms, breaks })
    }

    /// Total mass of `dd^c a` on the annulus.
    pub fn total_mass(&self, r_lo: f64, r_hi: f64, opts: &QuadOptions) -> Result<f64> {
        let m = self.measure(r_lo, r_hi)?;
        let mut err = None;
        let ac = integrate_with_breaks(
            &mut |t| match self.mass_density_tau(t) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            &m.breaks,
            opts,
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(ac.value + m.atoms.iter().map(|a| a.1).sum::<f64>())
    }
}

fn edge_flux(term: &Expr, var: usize, a: [f64; 2], b: [f64; 2], normal: [f64; 2], opts: &QuadOptions) -> Result<f64> {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut err = None;
    let r = crate::quad::integrate(
        |s| {
            let x = a[0] + s * (b[0] - a[0]);
            let y = a[1] + s * (b[1] - a[1]);
            let mut z = [Complex64::new(0.0, 0.0); 2];
            z[var] = Complex64::new(x, y);
            match term.jet(&z, &mut Signature::default()) {
                Ok(JetValue::Finite(j)) => {
                    let g = j.grad[var];
                    (2.0 * g.re * normal[0] - 2.0 * g.im * normal[1]) * len
                }
                Ok(JetValue::NegInf) => 0.0,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        opts,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Mass of `dd^c a` in the square cell of side `h` centred at `c`, as the
/// outward flux of `∇a` through its boundary.
fn cell_mass(term: &Expr, var: usize, c: [f64; 2], h: f64, opts: &QuadOptions) -> Result<f64> {
    let (x0, x1, y0, y1) = (c[0] - h / 2.0, c[0] + h / 2.0, c[1] - h / 2.0, c[1] + h / 2.0);
    Ok(edge_flux(term, var, [x1, y0], [x1, y1], [1.0, 0.0], opts)?
        + edge_flux(term, var, [x0, y0], [x0, y1], [-1.0, 0.0], opts)?
        + edge_flux(term, var, [x0, y1], [x1, y1], [0.0, 1.0], opts)?
        + edge_flux(term, var, [x0, y0], [x1, y0], [0.0, -1.0], opts)?)
}

/// Exact cell masses of `(dd^c u)^n` for `u = a(z1)` (n = 1) or a separable
/// `u = a(z1) + b(z2)` (n = 2), where `(dd^c u)² = 2 dd^c a ∧ dd^c b`.
///
/// Cells are the squares of side `h` centred at nodes; singular parts of the
/// measure are spread over the cell that carries them.
pub fn separable_cell_measure(spec: &PshSpec, domain: &GridDomain) -> Result<MeasureField> {
    if spec.n() != domain.n() {
        return Err(LabError::GridMismatch("spec and grid dimension differ".into()));
    }
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, max_panels: 200 };
    let h = domain.h();
    let plane = |var: usize| -> Result<Vec<f64>> {
        let term = if spec.n() == 1 { spec.expr().clone() } else { part(spec, var)? };
        let counts = [domain.counts()[2 * var], domain.counts()[2 * var + 1]];
        let lo = [domain.lo()[2 * var], domain.lo()[2 * var + 1]];
        (0..counts[0] * counts[1])
            .into_par_iter()
            .map(|k| {
                let c = [lo[0] + h * (k / counts[1]) as f64, lo[1] + h * (k % counts[1]) as f64];
                cell_mass(&term, var, c, h, &opts)
            })
            .collect()
    };
    let valid = domain.in_domain_mask();
    let cell = domain.cell_volume();
    let density: Vec<f64> = if spec.n() == 1 {
        plane(0)?.into_iter().map(|m| m / cell).collect()
    } else {
        let ma = plane(0)?;
        let mb = plane(1)?;
        let nb = mb.len();
        (0..domain.len()).map(|i| 2.0 * ma[i / nb] * mb[i % nb] / cell).collect()
    };
    MeasureField::new(domain.clone(), density, valid, Provenance::ClosedForm)
}

fn part(spec: &PshSpec, var: usize) -> Result<Expr> {
    let (a, b) = spec
        .expr()
        .split_separable()
        .ok_or_else(|| LabError::InvalidParameter(format!("`{spec}` is not a separable sum")))?;
    Ok(if var == 0 { a } else { b })
}
