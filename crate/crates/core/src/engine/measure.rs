use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{GridDomain, Provenance, RegionMask};
use crate::sum::pairwise_sum_by;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Real coordinates `(x1, y1, x2, y2)`.
    pub location: [f64; 4],
    pub mass: f64,
}

/// A discrete measure: per-node density (mass per unit real volume) on the
/// valid nodes, plus optional atoms.
#[derive(Debug, Clone)]
pub struct MeasureField {
    domain: GridDomain,
    density: Vec<f64>,
    valid: Vec<bool>,
    atoms: Vec<Atom>,
    provenance: Provenance,
    clipped: usize,
    tolerance: f64,
}

/// JSON summary of a measure field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub total_mass: f64,
    pub atom_mass: f64,
    pub min_density: f64,
    pub max_density: f64,
    pub clipped_nodes: usize,
    pub valid_nodes: usize,
    pub negativity_tolerance: f64,
    pub provenance: Provenance,
    pub convention: String,
}

impl MeasureField {
    pub fn new(domain: GridDomain, density: Vec<f64>, valid: Vec<bool>, provenance: Provenance) -> Result<Self> {
        if density.len() != domain.len() || valid.len() != domain.len() {
            return Err(LabError::GridMismatch("density length differs from node count".into()));
        }
        Ok(MeasureField { domain, density, valid, atoms: Vec::new(), provenance, clipped: 0, tolerance: 0.0 })
    }

    /// The zero measure on the stencil-valid nodes.
    pub fn zero(domain: &GridDomain) -> Self {
        let valid = domain.stencil_valid_mask();
        MeasureField::new(domain.clone(), vec![0.0; domain.len()], valid, Provenance::ClosedForm).unwrap()
    }

    /// Lebesgue measure (unit density) on the stencil-valid nodes.
    pub fn lebesgue(domain: &GridDomain) -> Self {
        let valid = domain.stencil_valid_mask();
        MeasureField::new(domain.clone(), vec![1.0; domain.len()], valid, Provenance::ClosedForm).unwrap()
    }

    pub(crate) fn with_clipping(mut self, clipped: usize, tolerance: f64) -> Self {
        self.clipped = clipped;
        self.tolerance = tolerance;
        self
    }

    /// Atoms may only come from closed-form reductions.
    pub fn with_atoms(mut self, atoms: Vec<Atom>) -> Result<Self> {
        if !atoms.is_empty() && self.provenance != Provenance::ClosedForm {
            return Err(LabError::InvalidParameter("atoms require a closed-form measure".into()));
        }
        self.atoms = atoms;
        Ok(self)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn clipped(&self) -> usize {
        self.clipped
    }

    /// Allowed negativity of the density.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn total_mass(&self) -> f64 {
        let v = self.domain.cell_volume();
        let ac = pairwise_sum_by(self.density.len(), &|i| if self.valid[i] { self.density[i] * v } else { 0.0 });
        ac + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    fn extreme(&self, pick: fn(f64, f64) -> f64, init: f64) -> f64 {
        (0..self.density.len())
            .into_par_iter()
            .filter(|&i| self.valid[i])
            .map(|i| self.density[i])
            .reduce(|| init, pick)
    }

    pub fn min_density(&self) -> f64 {
        self.extreme(f64::min, f64::INFINITY)
    }

    pub fn max_density(&self) -> f64 {
        self.extreme(f64::max, f64::NEG_INFINITY)
    }

    pub fn summary(&self) -> MeasureSummary {
        MeasureSummary {
            total_mass: self.total_mass(),
            atom_mass: self.atoms.iter().map(|a| a.mass).sum(),
            min_density: self.min_density(),
            max_density: self.max_density(),
            clipped_nodes: self.clipped,
            valid_nodes: self.valid.iter().filter(|&&v| v).count(),
            negativity_tolerance: self.tolerance,
            provenance: self.provenance,
            convention: crate::CONVENTION_BANNER.to_string(),
        }
    }

    /// Rows of node coordinates and density for valid nodes, then atoms.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let names = ["x1", "y1", "x2", "y2"];
        let dims = self.domain.dims();
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| LabError::Io(e.to_string());
        let mut header: Vec<&str> = names[..dims].to_vec();
        header.extend(["density", "atom_mass"]);
        out.write_record(&header).map_err(io)?;
        for i in 0..self.density.len() {
            if !self.valid[i] {
                continue;
            }
            let x = self.domain.coords(i);
            let mut rec: Vec<String> = x[..dims].iter().map(|v| v.to_string()).collect();
            rec.push(self.density[i].to_string());
            rec.push("0".into());
            out.write_record(&rec).map_err(io)?;
        }
        for a in &self.atoms {
            let mut rec: Vec<String> = a.location[..dims].iter().map(|v| v.to_string()).collect();
            rec.push("0".into());
            rec.push(a.mass.to_string());
            out.write_record(&rec).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `∫_region weight dμ` with the weight given per node index.
pub fn integrate_measure_by_node<W>(mu: &MeasureField, region: &RegionMask, weight: W) -> Result<f64>
where
    W: Fn(usize) -> f64 + Sync,
{
    if !mu.domain.is_same_shape(region.domain()) {
        return Err(LabError::GridMismatch("region and measure live on different grids".into()));
    }
    let v = mu.domain.cell_volume();
    let bad = (0..mu.density.len()).into_par_iter().find_any(|&i| {
        mu.valid[i] && region.contains(i) && mu.density[i] != 0.0 && !weight(i).is_finite()
    });
    if let Some(i) = bad {
        return Err(LabError::WeightNotEvaluable(format!("node {i} at {:?}", &mu.domain.coords(i)[..mu.domain.dims()])));
    }
    let ac = pairwise_sum_by(mu.density.len(), &|i| {
        if mu.valid[i] && region.contains(i) && mu.density[i] != 0.0 {
            mu.density[i] * weight(i) * v
        } else {
            0.0
        }
    });
    let mut atoms = 0.0;
    for a in &mu.atoms {
        if let Some(i) = mu.domain.nearest_node(&a.location) {
            if region.contains(i) {
                let w = weight(i);
                if !w.is_finite() {
                    return Err(LabError::WeightNotEvaluable(format!("atom at {:?}", a.location)));
                }
                atoms += a.mass * w;
            }
        }
    }
    Ok(ac + atoms)
}

/// `∫_region weight dμ` with the weight given by real coordinates.
pub fn integrate_measure<W>(mu: &MeasureField, region: &RegionMask, weight: W) -> Result<f64>
where
    W: Fn(&[f64; 4]) -> f64 + Sync,
{
    let d = mu.domain.clone();
    integrate_measure_by_node(mu, region, |i| weight(&d.coords(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_volume() {
        let h = 0.01;
        let g = GridDomain::cube(1, 0.0, 1.0, h, vec![]).unwrap();
        let mu = MeasureField::lebesgue(&g);
        let v = integrate_measure(&mu, &RegionMask::full(&g), |_| 1.0).unwrap();
        assert!((v - 1.0).abs() <= 2.0 * h + 1e-12);
    }

    #[test]
    fn weight_must_be_finite_where_mass_sits() {
        let g = GridDomain::cube(1, 0.0, 1.0, 0.1, vec![]).unwrap();
        let mu = MeasureField::lebesgue(&g);
        let r = integrate_measure(&mu, &RegionMask::full(&g), |x| if (x[0] - 0.5).abs() < 0.01 { f64::NAN } else { 1.0 });
        assert!(matches!(r, Err(LabError::WeightNotEvaluable(_))));
    }

    #[test]
    fn atoms_need_closed_form() {
        let g = GridDomain::cube(1, 0.0, 1.0, 0.1, vec![]).unwrap();
        let mu = MeasureField::new(g.clone(), vec![0.0; g.len()], vec![true; g.len()], Provenance::FiniteDifference).unwrap();
        assert!(mu.with_atoms(vec![Atom { location: [0.5, 0.5, 0.0, 0.0], mass: 1.0 }]).is_err());
    }
}
