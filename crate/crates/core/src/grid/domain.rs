use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Minimum number of nodes per axis (a centered stencil plus margin).
pub const MIN_NODES: usize = 5;

/// A region removed from the grid box.
///
/// Centers are given in real coordinates `(x1, y1, x2, y2)`; only the first
/// `2n` entries are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Exclusion {
    /// Removes the open ball `|x − center| < radius`.
    Ball { center: [f64; 4], radius: f64 },
    /// Removes everything outside the open ball, i.e. keeps `|x − center| < radius`.
    Exterior { center: [f64; 4], radius: f64 },
    /// Removes the neighbourhood `|z_var| < radius` of a coordinate hyperplane.
    CoordinateAxis { var: usize, radius: f64 },
}

impl Exclusion {
    pub fn ball(radius: f64) -> Self {
        Exclusion::Ball { center: [0.0; 4], radius }
    }

    /// Keep only the centered ball of the given radius.
    pub fn outside_ball(radius: f64) -> Self {
        Exclusion::Exterior { center: [0.0; 4], radius }
    }

    fn removes(&self, x: &[f64; 4], dims: usize) -> bool {
        match self {
            Exclusion::Ball { center, radius } => dist2(x, center, dims) < radius * radius,
            Exclusion::Exterior { center, radius } => dist2(x, center, dims) >= radius * radius,
            Exclusion::CoordinateAxis { var, radius } => {
                let (a, b) = (x[2 * var], x[2 * var + 1]);
                a * a + b * b < radius * radius
            }
        }
    }
}

fn dist2(x: &[f64; 4], c: &[f64; 4], dims: usize) -> f64 {
    (0..dims).map(|k| (x[k] - c[k]).powi(2)).sum()
}

/// A uniform rectangular lattice over a box in C¹ (R²) or C² (R⁴).
///
/// Real axes are ordered `(x1, y1, x2, y2)`; node storage is row-major with
/// the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    n: usize,
    lo: [f64; 4],
    hi: [f64; 4],
    h: f64,
    counts: [usize; 4],
    strides: [usize; 4],
    excluded: Vec<Exclusion>,
}

impl GridDomain {
    /// Build a grid; `bounds` holds one `[lo, hi]` pair per real axis (2n pairs).
    pub fn new(n: usize, bounds: &[[f64; 2]], h: f64, excluded: Vec<Exclusion>) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(LabError::UnsupportedDimension(n));
        }
        let dims = 2 * n;
        if bounds.len() != dims {
            return Err(LabError::InvalidParameter(format!(
                "expected {dims} axis bounds for n = {n}, got {}",
                bounds.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::InvalidSpacing(h));
        }
        let mut lo = [0.0; 4];
        let mut hi = [0.0; 4];
        let mut counts = [1usize; 4];
        for (axis, b) in bounds.iter().enumerate() {
            if !(b[1] > b[0]) || !b[0].is_finite() || !b[1].is_finite() {
                return Err(LabError::DegenerateBox { axis, lo: b[0], hi: b[1] });
            }
            lo[axis] = b[0];
            hi[axis] = b[1];
            let nodes = ((b[1] - b[0]) / h + 1e-9).floor() as usize + 1;
            if nodes < MIN_NODES {
                return Err(LabError::TooCoarse { axis, nodes });
            }
            counts[axis] = nodes;
        }
        for ex in &excluded {
            let inside = match ex {
                Exclusion::Ball { center, .. } | Exclusion::Exterior { center, .. } => {
                    (0..dims).all(|k| center[k] >= lo[k] && center[k] <= hi[k])
                }
                Exclusion::CoordinateAxis { var, radius } => *var < n && *radius > 0.0,
            };
            if !inside {
                return Err(LabError::InvalidParameter(format!("exclusion {ex:?} does not lie inside the box")));
            }
        }
        let mut strides = [0usize; 4];
        let mut s = 1;
        for axis in (0..dims).rev() {
            strides[axis] = s;
            s *= counts[axis];
        }
        Ok(GridDomain { n, lo, hi, h, counts, strides, excluded })
    }

    /// The cube `[lo, hi]^{2n}`.
    pub fn cube(n: usize, lo: f64, hi: f64, h: f64, excluded: Vec<Exclusion>) -> Result<Self> {
        GridDomain::new(n, &vec![[lo, hi]; 2 * n], h, excluded)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of real axes, `2n`.
    pub fn dims(&self) -> usize {
        2 * self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dims()]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dims()]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dims()]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn excluded(&self) -> &[Exclusion] {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Real volume of one cell, `h^{2n}`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dims() as i32)
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 4] {
        let mut m = [0usize; 4];
        for axis in 0..self.dims() {
            m[axis] = idx / self.strides[axis];
            idx %= self.strides[axis];
        }
        m
    }

    pub fn index(&self, m: &[usize]) -> usize {
        m.iter().zip(self.strides.iter()).map(|(a, s)| a * s).sum()
    }

    pub fn coords(&self, idx: usize) -> [f64; 4] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 4];
        for axis in 0..self.dims() {
            x[axis] = self.lo[axis] + self.h * m[axis] as f64;
        }
        x
    }

    pub fn point(&self, idx: usize) -> [Complex64; 2] {
        to_point(&self.coords(idx))
    }

    /// Nearest node to real coordinates, if inside the lattice.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let mut m = [0usize; 4];
        for axis in 0..self.dims() {
            let k = ((x[axis] - self.lo[axis]) / self.h).round();
            if k < 0.0 || k as usize >= self.counts[axis] {
                return None;
            }
            m[axis] = k as usize;
        }
        Some(self.index(&m[..self.dims()]))
    }

    pub fn contains_coords(&self, x: &[f64; 4]) -> bool {
        !self.excluded.iter().any(|e| e.removes(x, self.dims()))
    }

    /// Whether the node survives every exclusion.
    pub fn in_domain(&self, idx: usize) -> bool {
        self.contains_coords(&self.coords(idx))
    }

    pub fn in_domain_mask(&self) -> Vec<bool> {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().map(|i| self.in_domain(i)).collect()
    }

    /// Nodes whose full 3^{2n} neighbourhood lies in the box and the domain.
    pub fn stencil_valid_mask(&self) -> Vec<bool> {
        self.erode(&self.in_domain_mask())
    }

    /// Box erosion by one node along every axis; nodes on the box boundary
    /// are always eroded.
    pub fn erode(&self, mask: &[bool]) -> Vec<bool> {
        use rayon::prelude::*;
        let mut cur = mask.to_vec();
        for axis in 0..self.dims() {
            let s = self.strides[axis];
            let last = self.counts[axis] - 1;
            let prev = cur;
            cur = (0..self.len())
                .into_par_iter()
                .map(|i| {
                    let k = (i / s) % self.counts[axis];
                    k > 0 && k < last && prev[i] && prev[i - s] && prev[i + s]
                })
                .collect();
        }
        cur
    }

    /// Same lattice (dimension, origin, spacing, counts); exclusions may differ.
    pub fn is_same_shape(&self, other: &GridDomain) -> bool {
        self.n == other.n && self.counts == other.counts && self.h == other.h && self.lo == other.lo
    }

    /// The complex line `{z_fixed = c}` as a grid over the free variable.
    /// Ball exclusions restrict to their discs; axis exclusions on the free
    /// variable carry over.
    pub fn slice(&self, fixed: usize, c: Complex64) -> Result<GridDomain> {
        if self.n != 2 || fixed > 1 {
            return Err(LabError::UnsupportedDimension(self.n));
        }
        let free = 1 - fixed;
        let bounds = [
            [self.lo[2 * free], self.hi[2 * free]],
            [self.lo[2 * free + 1], self.hi[2 * free + 1]],
        ];
        let mut excluded = Vec::new();
        let mut emptied = false;
        for ex in &self.excluded {
            match ex {
                Exclusion::Ball { center, radius } | Exclusion::Exterior { center, radius } => {
                    let d2 = (c.re - center[2 * fixed]).powi(2) + (c.im - center[2 * fixed + 1]).powi(2);
                    let r2 = radius * radius - d2;
                    let cc = [center[2 * free], center[2 * free + 1], 0.0, 0.0];
                    let is_ball = matches!(ex, Exclusion::Ball { .. });
                    if r2 > 0.0 {
                        let r = r2.sqrt();
                        let inside_box = cc[0] >= bounds[0][0] && cc[0] <= bounds[0][1] && cc[1] >= bounds[1][0] && cc[1] <= bounds[1][1];
                        if inside_box {
                            excluded.push(if is_ball {
                                Exclusion::Ball { center: cc, radius: r }
                            } else {
                                Exclusion::Exterior { center: cc, radius: r }
                            });
                        } else if !is_ball {
                            emptied = true;
                        }
                    } else if !is_ball {
                        emptied = true;
                    }
                }
                Exclusion::CoordinateAxis { var, radius } => {
                    if *var == free {
                        excluded.push(Exclusion::CoordinateAxis { var: 0, radius: *radius });
                    } else if c.norm() < *radius {
                        emptied = true;
                    }
                }
            }
        }
        if emptied {
            // Whole leaf removed: exclude everything.
            excluded.push(Exclusion::Exterior { center: [bounds[0][0], bounds[1][0], 0.0, 0.0], radius: 0.0 });
        }
        GridDomain::new(1, &bounds, self.h, excluded)
    }

    /// The 2-D lattice of the fixed variable's plane, as an n = 1 grid.
    pub fn base_plane(&self, fixed: usize) -> Result<GridDomain> {
        if self.n != 2 || fixed > 1 {
            return Err(LabError::UnsupportedDimension(self.n));
        }
        let bounds = [
            [self.lo[2 * fixed], self.hi[2 * fixed]],
            [self.lo[2 * fixed + 1], self.hi[2 * fixed + 1]],
        ];
        GridDomain::new(1, &bounds, self.h, Vec::new())
    }
}

pub fn to_point(x: &[f64; 4]) -> [Complex64; 2] {
    [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])]
}

/// The operation `build_grid`.
pub fn build_grid(n: usize, bounds: &[[f64; 2]], h: f64, excluded: Vec<Exclusion>) -> Result<GridDomain> {
    GridDomain::new(n, bounds, h, excluded)
}
