use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::GridDomain;
use crate::error::{LabError, Result};

/// A set of grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    domain: GridDomain,
    member: Vec<bool>,
}

impl RegionMask {
    pub fn new(domain: GridDomain, member: Vec<bool>) -> Result<Self> {
        if member.len() != domain.len() {
            return Err(LabError::GridMismatch(format!("{} flags for {} nodes", member.len(), domain.len())));
        }
        Ok(RegionMask { domain, member })
    }

    pub fn full(domain: &GridDomain) -> Self {
        RegionMask { domain: domain.clone(), member: vec![true; domain.len()] }
    }

    pub fn from_fn(domain: &GridDomain, f: impl Fn(&[Complex64; 2]) -> bool + Sync) -> Self {
        let member = (0..domain.len()).into_par_iter().map(|i| f(&domain.point(i))).collect();
        RegionMask { domain: domain.clone(), member }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn member(&self) -> &[bool] {
        &self.member
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&m| m)
    }

    fn check(&self, other: &RegionMask) -> Result<()> {
        if !self.domain.is_same_shape(&other.domain) {
            return Err(LabError::GridMismatch("masks live on different grids".into()));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &RegionMask) -> Result<RegionMask> {
        self.check(other)?;
        let member = self.member.iter().zip(&other.member).map(|(a, b)| *a && *b).collect();
        Ok(RegionMask { domain: self.domain.clone(), member })
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask> {
        self.check(other)?;
        let member = self.member.iter().zip(&other.member).map(|(a, b)| *a || *b).collect();
        Ok(RegionMask { domain: self.domain.clone(), member })
    }

    pub fn is_subset(&self, other: &RegionMask) -> bool {
        self.member.iter().zip(&other.member).all(|(a, b)| !*a || *b)
    }
}

/// Geometric regions used to build masks and drive closed-form estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Product of annuli `inner_k ≤ |z_k| < outer_k` (a polydisc when inner = 0).
    Polydisc { inner: [f64; 2], outer: [f64; 2] },
    /// The centered ball `|z| < radius`.
    Ball { radius: f64 },
}

impl Region {
    pub fn polydisc(radius: f64) -> Self {
        Region::Polydisc { inner: [0.0; 2], outer: [radius; 2] }
    }

    pub fn contains(&self, z: &[Complex64; 2], n: usize) -> bool {
        match self {
            Region::Polydisc { inner, outer } => (0..n).all(|k| {
                let r = z[k].norm();
                r >= inner[k] && r < outer[k]
            }),
            Region::Ball { radius } => (0..n).map(|k| z[k].norm_sqr()).sum::<f64>() < radius * radius,
        }
    }

    /// True when the region has no interior in C^n.
    pub fn is_empty(&self, n: usize) -> bool {
        match self {
            Region::Polydisc { inner, outer } => (0..n).any(|k| !(outer[k] > inner[k]) || outer[k] <= 0.0),
            Region::Ball { radius } => !(*radius > 0.0),
        }
    }

    pub fn to_mask(&self, domain: &GridDomain) -> RegionMask {
        let n = domain.n();
        RegionMask::from_fn(domain, |z| self.contains(z, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polydisc_mask() {
        let g = GridDomain::cube(1, -1.0, 1.0, 0.5, vec![]).unwrap();
        let m = Region::polydisc(0.6).to_mask(&g);
        assert_eq!(m.count(), 5);
        assert!(Region::Polydisc { inner: [0.5, 0.0], outer: [0.5, 1.0] }.is_empty(1));
    }

    #[test]
    fn set_algebra() {
        let g = GridDomain::cube(1, -1.0, 1.0, 0.5, vec![]).unwrap();
        let a = Region::polydisc(0.6).to_mask(&g);
        let b = Region::Ball { radius: 2.0 }.to_mask(&g);
        assert!(a.is_subset(&b));
        assert_eq!(a.intersect(&b).unwrap(), a);
        assert_eq!(a.union(&b).unwrap(), b);
    }
}
