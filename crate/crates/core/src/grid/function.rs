use num_complex::Complex64;
use rayon::prelude::*;

use super::domain::GridDomain;
use crate::catalog::{JetValue, PshSpec, Signature};
use crate::error::{LabError, Result};

/// Real values on the nodes of a grid.
///
/// Nodes outside the domain or on a singular set hold `NaN`. `valid` marks
/// nodes whose whole 3^{2n} stencil is defined and does not straddle a kink.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: GridDomain,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl GridFunction {
    /// Wrap raw values; validity is the stencil erosion of the finite nodes.
    pub fn from_values(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(LabError::GridMismatch(format!("{} values for {} nodes", values.len(), domain.len())));
        }
        let inside = domain.in_domain_mask();
        let values: Vec<f64> = values
            .into_iter()
            .zip(&inside)
            .map(|(v, &ok)| if ok && v.is_finite() { v } else { f64::NAN })
            .collect();
        let defined: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
        let valid = domain.erode(&defined);
        Ok(GridFunction { domain, values, valid })
    }

    /// Values with an explicit validity mask (used when deserializing).
    pub fn with_mask(domain: GridDomain, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if values.len() != domain.len() || valid.len() != domain.len() {
            return Err(LabError::GridMismatch("value or mask length differs from node count".into()));
        }
        if values.iter().zip(&valid).any(|(v, &ok)| ok && !v.is_finite()) {
            return Err(LabError::InvalidParameter("valid node holds a non-finite value".into()));
        }
        Ok(GridFunction { domain, values, valid })
    }

    /// Sample by a pointwise evaluator returning the value and kink signature;
    /// `None` marks an undefined node.
    pub fn sample_with<F>(domain: &GridDomain, f: F) -> Result<Self>
    where
        F: Fn(&[Complex64; 2]) -> Result<Option<(f64, Signature)>> + Sync,
    {
        let evals: Vec<Option<(f64, Signature)>> = (0..domain.len())
            .into_par_iter()
            .map(|i| if domain.in_domain(i) { f(&domain.point(i)) } else { Ok(None) })
            .collect::<Result<_>>()?;
        let defined: Vec<bool> = evals.iter().map(|e| e.is_some()).collect();
        let mut valid = domain.erode(&defined);
        let first = evals.iter().flatten().next().map(|e| e.1);
        if evals.iter().flatten().any(|e| Some(e.1) != first) {
            let sig: Vec<Signature> = evals.iter().map(|e| e.map(|x| x.1).unwrap_or_default()).collect();
            let offsets = neighbour_offsets(domain);
            valid = (0..domain.len())
                .into_par_iter()
                .map(|i| valid[i] && offsets.iter().all(|&o| sig[(i as isize + o) as usize] == sig[i]))
                .collect();
        }
        let values = evals.iter().map(|e| e.map(|x| x.0).unwrap_or(f64::NAN)).collect();
        Ok(GridFunction { domain: domain.clone(), values, valid })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn is_defined(&self, idx: usize) -> bool {
        self.values[idx].is_finite()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Pointwise map of the values; the mask is recomputed.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Result<Self> {
        let values = self.values.par_iter().map(|&v| if v.is_finite() { f(v) } else { f64::NAN }).collect();
        GridFunction::from_values(self.domain.clone(), values)
    }
}

/// Flat offsets of the 3^{2n} box neighbourhood (excluding the centre).
pub(crate) fn neighbour_offsets(domain: &GridDomain) -> Vec<isize> {
    let dims = domain.dims();
    let mut out = Vec::new();
    for code in 0..3usize.pow(dims as u32) {
        let mut c = code;
        let mut off = 0isize;
        for axis in 0..dims {
            let d = (c % 3) as isize - 1;
            c /= 3;
            off += d * domain.stride(axis) as isize;
        }
        if off != 0 {
            out.push(off);
        }
    }
    out
}

/// The operation `sample`: closed-form values, singular nodes undefined.
pub fn sample(spec: &PshSpec, domain: &GridDomain) -> Result<GridFunction> {
    if spec.n() != domain.n() {
        return Err(LabError::GridMismatch(format!("spec in C^{} on a grid in C^{}", spec.n(), domain.n())));
    }
    GridFunction::sample_with(domain, |z| {
        let mut sig = Signature::default();
        match spec.jet_at(z, &mut sig)? {
            JetValue::Finite(j) if j.value.is_finite() => Ok(Some((j.value, sig))),
            _ => Ok(None),
        }
    })
}
