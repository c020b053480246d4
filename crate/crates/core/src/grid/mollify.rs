use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::GridFunction;
use crate::error::{LabError, Result};

/// Convolution with the bump `exp(1/(|x/ε|² − 1))`, normalized so that its
/// discrete weights sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub epsilon: f64,
}

impl MollifierSpec {
    pub fn new(epsilon: f64) -> Self {
        MollifierSpec { epsilon }
    }

    /// Flat offsets (per unit stride) and normalized weights on a grid.
    fn stencil(&self, dims: usize, h: f64, strides: &[usize]) -> (Vec<isize>, Vec<f64>) {
        let r = (self.epsilon / h).ceil() as isize;
        let side = (2 * r + 1) as usize;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for code in 0..side.pow(dims as u32) {
            let mut c = code;
            let mut off = 0isize;
            let mut d2 = 0.0;
            for &stride in strides.iter().take(dims) {
                let k = (c % side) as isize - r;
                c /= side;
                off += k * stride as isize;
                d2 += (k as f64 * h).powi(2);
            }
            let rho2 = d2 / (self.epsilon * self.epsilon);
            if rho2 < 1.0 {
                offsets.push(off);
                weights.push((1.0 / (rho2 - 1.0)).exp());
            }
        }
        let total: f64 = crate::sum::pairwise_sum(&weights);
        for w in &mut weights {
            *w /= total;
        }
        (offsets, weights)
    }
}

/// Discrete convolution; the output is defined only where every node of
/// the ε-ball is defined.
pub fn mollify(f: &GridFunction, m: &MollifierSpec) -> Result<GridFunction> {
    let d = f.domain();
    let floor = 3.0 * d.h();
    if !(m.epsilon >= floor * (1.0 - 1e-12)) {
        return Err(LabError::ResolutionFloor { epsilon: m.epsilon, floor });
    }
    let dims = d.dims();
    let strides: Vec<usize> = (0..dims).map(|a| d.stride(a)).collect();
    let (offsets, weights) = m.stencil(dims, d.h(), &strides);
    let r = (m.epsilon / d.h()).ceil() as usize;
    let counts = d.counts().to_vec();
    let values = f.values();
    let out: Vec<f64> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            let mi = d.multi_index(i);
            if (0..dims).any(|a| mi[a] < r || mi[a] + r >= counts[a]) {
                return f64::NAN;
            }
            let mut acc = 0.0;
            for (o, w) in offsets.iter().zip(&weights) {
                let v = values[(i as isize + o) as usize];
                if !v.is_finite() {
                    return f64::NAN;
                }
                acc += w * v;
            }
            acc
        })
        .collect();
    GridFunction::from_values(d.clone(), out)
}
