use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::GridDomain;
use super::function::GridFunction;
use crate::catalog::{Herm2, JetValue, PshSpec, Signature};
use crate::error::{LabError, Result};

/// Where derivative data came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FiniteDifference,
    Analytic,
    ClosedForm,
}

/// Tolerance for Hermitian symmetry of supplied matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Per-node complex gradient and Hessian `∂²u/∂z_j∂z̄_k`.
#[derive(Debug, Clone)]
pub struct ComplexHessianField {
    domain: GridDomain,
    valid: Vec<bool>,
    values: Vec<f64>,
    grad: Vec<[Complex64; 2]>,
    hess: Vec<Herm2>,
    provenance: Provenance,
}

impl ComplexHessianField {
    /// Build from full matrices, checking Hermitian symmetry at valid nodes.
    pub fn from_nodes(
        domain: GridDomain,
        valid: Vec<bool>,
        values: Vec<f64>,
        grad: Vec<[Complex64; 2]>,
        full: Vec<[[Complex64; 2]; 2]>,
        provenance: Provenance,
    ) -> Result<Self> {
        let len = domain.len();
        if valid.len() != len || values.len() != len || grad.len() != len || full.len() != len {
            return Err(LabError::GridMismatch("field length differs from node count".into()));
        }
        let n = domain.n();
        let mut hess = Vec::with_capacity(len);
        for (i, m) in full.iter().enumerate() {
            if valid[i] {
                let scale = m.iter().flatten().map(|c| c.norm()).fold(1.0, f64::max);
                let mut defect = m[0][0].im.abs().max(m[1][1].im.abs());
                if n == 2 {
                    defect = defect.max((m[0][1] - m[1][0].conj()).norm());
                }
                if defect > HERMITIAN_TOL * scale {
                    return Err(LabError::NonHermitian { node: i, defect });
                }
            }
            hess.push(Herm2 {
                a11: m[0][0].re,
                a22: if n == 2 { m[1][1].re } else { 0.0 },
                a12: if n == 2 { 0.5 * (m[0][1] + m[1][0].conj()) } else { CZERO },
            });
        }
        Ok(ComplexHessianField { domain, valid, values, grad, hess, provenance })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hess(&self, idx: usize) -> &Herm2 {
        &self.hess[idx]
    }

    pub fn grad(&self, idx: usize) -> &[Complex64; 2] {
        &self.grad[idx]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// `max |H|` over valid nodes.
    pub fn max_abs(&self) -> f64 {
        (0..self.hess.len())
            .into_par_iter()
            .filter(|&i| self.valid[i])
            .map(|i| self.hess[i].max_abs())
            .reduce(|| 0.0, f64::max)
    }

    fn min_eig(&self, i: usize) -> f64 {
        if self.domain.n() == 1 {
            self.hess[i].a11
        } else {
            self.hess[i].min_eigenvalue()
        }
    }

    /// Smallest Hessian eigenvalue over valid nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        (0..self.hess.len())
            .into_par_iter()
            .filter(|&i| self.valid[i])
            .map(|i| self.min_eig(i))
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Valid nodes whose smallest eigenvalue is below `−tol`.
    pub fn psd_violations(&self, tol: f64) -> usize {
        (0..self.hess.len()).into_par_iter().filter(|&i| self.valid[i] && self.min_eig(i) < -tol).count()
    }
}

/// Centered finite-difference gradient and Hessian at valid nodes.
pub fn complex_hessian(f: &GridFunction) -> Result<ComplexHessianField> {
    let d = f.domain();
    if f.valid_count() == 0 {
        return Err(LabError::InvalidStencil("no node has a complete stencil".into()));
    }
    let h = d.h();
    let s: Vec<isize> = (0..d.dims()).map(|a| d.stride(a) as isize).collect();
    let v = f.values();
    let at = |i: usize, o: isize| v[(i as isize + o) as usize];
    let n = d.n();
    let jets: Vec<([Complex64; 2], Herm2)> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            if !f.valid()[i] {
                return ([CZERO; 2], Herm2::ZERO);
            }
            let d1 = |a: usize| (at(i, s[a]) - at(i, -s[a])) / (2.0 * h);
            let d2 = |a: usize, b: usize| {
                if a == b {
                    (at(i, s[a]) - 2.0 * v[i] + at(i, -s[a])) / (h * h)
                } else {
                    (at(i, s[a] + s[b]) - at(i, s[a] - s[b]) - at(i, s[b] - s[a]) + at(i, -s[a] - s[b])) / (4.0 * h * h)
                }
            };
            let mut grad = [CZERO; 2];
            for (j, g) in grad.iter_mut().enumerate().take(n) {
                *g = Complex64::new(0.5 * d1(2 * j), -0.5 * d1(2 * j + 1));
            }
            let diag = |j: usize| 0.25 * (d2(2 * j, 2 * j) + d2(2 * j + 1, 2 * j + 1));
            let hess = if n == 1 {
                Herm2 { a11: diag(0), a22: 0.0, a12: CZERO }
            } else {
                Herm2 {
                    a11: diag(0),
                    a22: diag(1),
                    a12: Complex64::new(0.25 * (d2(0, 2) + d2(1, 3)), 0.25 * (d2(0, 3) - d2(1, 2))),
                }
            };
            (grad, hess)
        })
        .collect();
    let (grad, hess) = jets.into_iter().unzip();
    Ok(ComplexHessianField {
        domain: d.clone(),
        valid: f.valid().to_vec(),
        values: v.to_vec(),
        grad,
        hess,
        provenance: Provenance::FiniteDifference,
    })
}

/// Exact derivatives at every defined node from the expression's jets.
pub fn analytic_hessian(spec: &PshSpec, domain: &GridDomain) -> Result<ComplexHessianField> {
    if !spec.has_analytic_derivs() {
        return Err(LabError::FiniteDifferenceOnly(spec.to_string()));
    }
    if spec.n() != domain.n() {
        return Err(LabError::GridMismatch(format!("spec in C^{} on a grid in C^{}", spec.n(), domain.n())));
    }
    let jets: Vec<Option<crate::catalog::Jet>> = (0..domain.len())
        .into_par_iter()
        .map(|i| {
            if !domain.in_domain(i) {
                return Ok(None);
            }
            match spec.jet_at(&domain.point(i), &mut Signature::default())? {
                JetValue::Finite(j) if j.is_finite() => Ok(Some(j)),
                _ => Ok(None),
            }
        })
        .collect::<Result<_>>()?;
    let valid: Vec<bool> = jets.iter().map(|j| j.is_some()).collect();
    if !valid.iter().any(|&v| v) {
        return Err(LabError::InvalidStencil("no node where the derivatives are defined".into()));
    }
    let values = jets.iter().map(|j| j.map(|j| j.value).unwrap_or(f64::NAN)).collect();
    let grad = jets.iter().map(|j| j.map(|j| j.grad).unwrap_or([CZERO; 2])).collect();
    let hess = jets.iter().map(|j| j.map(|j| j.hess).unwrap_or(Herm2::ZERO)).collect();
    Ok(ComplexHessianField { domain: domain.clone(), valid, values, grad, hess, provenance: Provenance::Analytic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;

    #[test]
    fn quadratic_is_exact() {
        let g = GridDomain::cube(1, -1.0, 1.0, 0.1, vec![]).unwrap();
        let f = sample(&PshSpec::parse("abs2(z1)").unwrap(), &g).unwrap();
        let h = complex_hessian(&f).unwrap();
        for i in 0..g.len() {
            if h.valid()[i] {
                assert!((h.hess(i).a11 - 1.0).abs() < 1e-10);
                let x = g.point(i)[0];
                assert!((h.grad(i)[0] - x.conj()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn mixed_entry_orientation() {
        // |z1 + i z2|² has ∂²/∂z1∂z̄2 = −i
        let g = GridDomain::cube(2, -0.5, 0.5, 0.1, vec![]).unwrap();
        let f = GridFunction::from_values(
            g.clone(),
            (0..g.len())
                .map(|i| {
                    let z = g.point(i);
                    (z[0] + Complex64::i() * z[1]).norm_sqr()
                })
                .collect(),
        )
        .unwrap();
        let h = complex_hessian(&f).unwrap();
        let i = g.nearest_node(&[0.0; 4]).unwrap();
        assert!((h.hess(i).a12 - Complex64::new(0.0, -1.0)).norm() < 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = GridDomain::cube(2, -0.5, 0.5, 0.25, vec![]).unwrap();
        let len = g.len();
        let mut full = vec![[[CZERO; 2]; 2]; len];
        full[3][0][1] = Complex64::new(1.0, 0.0);
        let err = ComplexHessianField::from_nodes(g, vec![true; len], vec![0.0; len], vec![[CZERO; 2]; len], full, Provenance::Analytic)
            .unwrap_err();
        assert!(matches!(err, LabError::NonHermitian { node: 3, .. }));
    }
}
