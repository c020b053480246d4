use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::catalog::{make_sequence, named, SequenceScheme};
use crate::engine::{integrate_measure, ma_density};
use crate::error::{LabError, Result};
use crate::grid::{complex_hessian, sample, GridDomain, Region};

fn check(j: u32, rho: f64) -> Result<()> {
    if j == 0 {
        return Err(LabError::InvalidParameter("j must be at least 1".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(LabError::InvalidParameter(format!("polydisc radius must lie in (0, 1], got {rho}")));
    }
    Ok(())
}

/// Mass of `(dd^c v_j)²` over the polydisc of radius `rho`, where
/// `v_j = log(|z1|² + 1/j) + log(|z2|² + 1/j)`:
/// `2 (4π ρ² / (ρ² + 1/j))²`.
pub fn cegrell_mass(j: u32, rho: f64) -> Result<f64> {
    check(j, rho)?;
    let one = 4.0 * PI * rho * rho / (rho * rho + 1.0 / j as f64);
    Ok(2.0 * one * one)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMassReport {
    pub j: u32,
    pub rho: f64,
    pub h: f64,
    pub nodes: usize,
    pub grid_mass: f64,
    pub radial_mass: f64,
    pub relative_gap: f64,
    pub clipped_nodes: usize,
}

/// Finite-difference estimate of the same mass on a 4-D grid of spacing `h`.
pub fn cegrell_grid_mass(j: u32, rho: f64, h: f64) -> Result<GridMassReport> {
    check(j, rho)?;
    let spec = make_sequence(&named("cegrell").expect("catalog entry"), &SequenceScheme::LogShift, j)?;
    let half = rho + 2.0 * h;
    let domain = GridDomain::cube(2, -half, half, h, vec![])?;
    let hess = complex_hessian(&sample(&spec, &domain)?)?;
    let mu = ma_density(&hess);
    let grid_mass = integrate_measure(&mu, &Region::polydisc(rho).to_mask(&domain), |_| 1.0)?;
    let radial_mass = cegrell_mass(j, rho)?;
    Ok(GridMassReport {
        j,
        rho,
        h,
        nodes: domain.len(),
        grid_mass,
        radial_mass,
        relative_gap: (grid_mass - radial_mass).abs() / radial_mass,
        clipped_nodes: mu.clipped(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_member() {
        assert!((cegrell_mass(1, 1.0).unwrap() - 8.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        assert!(cegrell_mass(0, 1.0).is_err());
        assert!(cegrell_mass(1, 1.5).is_err());
    }

    #[test]
    fn coarse_grid_is_close() {
        let r = cegrell_grid_mass(2, 0.9, 0.1).unwrap();
        assert!(r.relative_gap < 0.1, "{r:?}");
    }
}
