use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::PshSpec;
use crate::engine::{integrate_measure_by_node, wedge_with_current, CurrentSpec};
use crate::error::{LabError, Result};
use crate::grid::{ComplexHessianField, GridDomain, RegionMask};
use crate::lab::spec_hessian;

/// Nodes with `|u − v|` below this are ties and belong to neither side.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOptions {
    /// Replace `u` by `u + 2δ` before checking.
    pub delta_shift: Option<f64>,
    /// Allowed deficit `rhs − lhs`; default `10 h² · total mass`.
    pub tolerance: Option<f64>,
    /// Allowed negativity of `u − v` on the outer shell.
    pub boundary_tol: f64,
    pub finite_difference: bool,
    /// Smoothing width for hard cutoffs (default `5h`).
    pub smoothing: Option<f64>,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        ComparisonOptions { delta_shift: None, tolerance: None, boundary_tol: 1e-9, finite_difference: false, smoothing: None }
    }
}

/// Both sides of the comparison inequality over `{u < v}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `∫_{u<v} (dd^c v)^q ∧ T`
    pub lhs: f64,
    /// `∫_{u<v} (dd^c u)^q ∧ T`
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Nodes in `{u < v}`.
    pub region_nodes: usize,
    pub valid_nodes: usize,
    /// `min (u − v)` over the outer shell of valid nodes.
    pub shell_min: f64,
    pub shell_nodes: usize,
    pub delta_shift: Option<f64>,
    pub h: f64,
}

/// Valid nodes with an axis neighbour that is invalid or off the grid.
pub(crate) fn outer_shell(domain: &GridDomain, valid: &[bool]) -> Vec<bool> {
    let dims = domain.dims();
    (0..domain.len())
        .into_par_iter()
        .map(|i| {
            if !valid[i] {
                return false;
            }
            let m = domain.multi_index(i);
            (0..dims).any(|a| {
                let s = domain.stride(a);
                m[a] == 0 || m[a] + 1 == domain.counts()[a] || !valid[i - s] || !valid[i + s]
            })
        })
        .collect()
}

pub(crate) struct Fields {
    pub hu: ComplexHessianField,
    pub hv: ComplexHessianField,
    pub valid: Vec<bool>,
}

pub(crate) fn fields(u: &PshSpec, v: &PshSpec, omega: &GridDomain, opts: &ComparisonOptions) -> Result<Fields> {
    if u.n() != omega.n() || v.n() != omega.n() {
        return Err(LabError::GridMismatch("functions and grid live in different dimensions".into()));
    }
    let hu = spec_hessian(u, omega, opts.smoothing, opts.finite_difference)?;
    let hv = spec_hessian(v, omega, opts.smoothing, opts.finite_difference)?;
    let stencil = omega.stencil_valid_mask();
    let valid: Vec<bool> = (0..omega.len())
        .map(|i| stencil[i] && hu.valid()[i] && hv.valid()[i] && hu.values()[i].is_finite() && hv.values()[i].is_finite())
        .collect();
    if !valid.iter().any(|&b| b) {
        return Err(LabError::InvalidStencil("no node where both functions are valid".into()));
    }
    Ok(Fields { hu, hv, valid })
}

/// Check `∫_{u<v} (dd^c v)^q ∧ T ≤ ∫_{u<v} (dd^c u)^q ∧ T` on the grid.
///
/// The boundary hypothesis is checked on the outermost shell of valid
/// nodes; a violation is refused with `BoundaryViolated`.
pub fn comparison_check(
    u: &PshSpec,
    v: &PshSpec,
    current: &CurrentSpec,
    omega: &GridDomain,
    opts: &ComparisonOptions,
) -> Result<ComparisonReport> {
    current.validate(omega.n())?;
    let f = fields(u, v, omega, opts)?;
    let shift = opts.delta_shift.map(|d| 2.0 * d).unwrap_or(0.0);
    let uu = f.hu.values();
    let vv = f.hv.values();
    let diff = |i: usize| uu[i] + shift - vv[i];

    let shell = outer_shell(omega, &f.valid);
    let shell_nodes = shell.iter().filter(|&&b| b).count();
    let shell_min = (0..omega.len()).filter(|&i| shell[i]).map(diff).fold(f64::INFINITY, f64::min);
    if shell_min < -opts.boundary_tol {
        return Err(LabError::BoundaryViolated { min: shell_min, tolerance: opts.boundary_tol });
    }

    let member: Vec<bool> = (0..omega.len()).map(|i| f.valid[i] && diff(i) < -TIE_TOL).collect();
    let region = RegionMask::new(omega.clone(), member)?;
    let everywhere = RegionMask::new(omega.clone(), f.valid.clone())?;
    let mu_u = wedge_with_current(&f.hu, current)?;
    let mu_v = wedge_with_current(&f.hv, current)?;
    let one = |_: usize| 1.0;
    let lhs = integrate_measure_by_node(&mu_v, &region, one)?;
    let rhs = integrate_measure_by_node(&mu_u, &region, one)?;
    let tolerance = match opts.tolerance {
        Some(t) => t,
        None => {
            let total = integrate_measure_by_node(&mu_u, &everywhere, one)?
                .max(integrate_measure_by_node(&mu_v, &everywhere, one)?);
            10.0 * omega.h() * omega.h() * total
        }
    };
    let slack = rhs - lhs;
    Ok(ComparisonReport {
        lhs,
        rhs,
        slack,
        tolerance,
        holds: slack >= -tolerance,
        region_nodes: region.count(),
        valid_nodes: everywhere.count(),
        shell_min,
        shell_nodes,
        delta_shift: opts.delta_shift,
        h: omega.h(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Exclusion;

    fn ball(h: f64) -> GridDomain {
        GridDomain::cube(1, -1.2, 1.2, h, vec![Exclusion::outside_ball(1.0)]).unwrap()
    }

    #[test]
    fn disc_instance() {
        // n = 1: u = |z|² − 1, v = −1/2; {u < v} is the disc of radius 1/√2, dd^c u = 4
        let u = PshSpec::parse("sum(abs2(z1), -1)").unwrap();
        let v = PshSpec::parse_in("-0.5", 1).unwrap();
        let r = comparison_check(&u, &v, &CurrentSpec::trivial(1), &ball(0.01), &ComparisonOptions::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        let want = 4.0 * std::f64::consts::PI * 0.5;
        assert!((r.rhs - want).abs() < 0.02 * want, "{}", r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn equal_functions_have_empty_region() {
        let u = PshSpec::parse("abs2(z1)").unwrap();
        let r = comparison_check(&u, &u, &CurrentSpec::trivial(1), &ball(0.05), &ComparisonOptions::default()).unwrap();
        assert_eq!(r.region_nodes, 0);
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);
    }

    #[test]
    fn boundary_violation_refused() {
        let u = PshSpec::parse("abs2(z1)").unwrap();
        let v = PshSpec::parse("sum(abs2(z1), 1)").unwrap();
        let r = comparison_check(&u, &v, &CurrentSpec::trivial(1), &ball(0.05), &ComparisonOptions::default());
        assert!(matches!(r, Err(LabError::BoundaryViolated { .. })));
        let shifted = ComparisonOptions { delta_shift: Some(0.5), ..ComparisonOptions::default() };
        assert!(comparison_check(&u, &v, &CurrentSpec::trivial(1), &ball(0.05), &shifted).is_ok());
    }
}
