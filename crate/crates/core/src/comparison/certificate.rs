use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{PshSpec, SequenceScheme};
use crate::engine::SliceFamily;
use crate::error::{LabError, Result};
use crate::grid::GridDomain;
use crate::lab::{decide, member_hessian, Verdict, VerdictRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafReport {
    pub base_point: [f64; 2],
    /// `∫ T_c ∧ dd^c u_j` per index, leaf nodes inside the valid set only.
    pub masses: Vec<f64>,
    /// `∫ T_c ∧ ω` over the same nodes.
    pub omega_mass: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub spec: String,
    pub scheme: String,
    pub j: Vec<u32>,
    pub leaves: Vec<LeafReport>,
    /// Leaves that miss the valid set entirely.
    pub empty_leaves: usize,
    /// Every nonempty leaf carries positive `ω` mass.
    pub positivity: bool,
    /// Every leaf mass sequence tends to zero.
    pub satisfied: bool,
    pub rule: VerdictRule,
}

/// Base-plane nodes under the domain that no leaf cell covers. Each base
/// point covers the `s × s` block of lattice nodes starting at it, where
/// `s h = √leaf_weight`.
pub fn leaf_gaps(family: &SliceFamily, omega: &GridDomain) -> Result<usize> {
    let base = omega.base_plane(family.fixed)?;
    let h = omega.h();
    let s = (family.leaf_weight.sqrt() / h).round().max(1.0) as usize;
    let mut covered = vec![false; base.len()];
    let c = base.counts();
    for idx in family.base_nodes(omega)? {
        let m = base.multi_index(idx);
        for a in m[0]..(m[0] + s).min(c[0]) {
            for b in m[1]..(m[1] + s).min(c[1]) {
                covered[base.index(&[a, b])] = true;
            }
        }
    }
    let f = family.fixed;
    let mut under = vec![false; base.len()];
    for i in 0..omega.len() {
        if omega.in_domain(i) {
            let m = omega.multi_index(i);
            under[base.index(&[m[2 * f], m[2 * f + 1]])] = true;
        }
    }
    Ok((0..base.len()).filter(|&b| under[b] && !covered[b]).count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub rule: VerdictRule,
    pub finite_difference: bool,
    pub smoothing: Option<f64>,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions { rule: VerdictRule::default(), finite_difference: true, smoothing: None }
    }
}

/// Per-leaf Laplacian masses of `u_j` along a coordinate slice family.
pub fn maximality_certificate(
    u: &PshSpec,
    scheme: &SequenceScheme,
    family: &SliceFamily,
    omega: &GridDomain,
    js: &[u32],
    opts: &CertificateOptions,
) -> Result<CertificateReport> {
    if omega.n() != 2 || u.n() != 2 {
        return Err(LabError::UnsupportedCurrent("slice certificates need n = 2".into()));
    }
    if family.fixed > 1 || !(family.leaf_weight > 0.0) {
        return Err(LabError::UnsupportedCurrent(format!("slice family fixing z{}", family.fixed + 1)));
    }
    if js.is_empty() || js.contains(&0) {
        return Err(LabError::InvalidParameter("index range must be nonempty with j >= 1".into()));
    }
    let missing = leaf_gaps(family, omega)?;
    if missing > 0 {
        return Err(LabError::LeafGaps { missing });
    }
    let base = omega.base_plane(family.fixed)?;
    let nodes = family.base_nodes(omega)?;
    let f = family.fixed;
    let mut leaf_of = vec![usize::MAX; base.len()];
    for (k, &b) in nodes.iter().enumerate() {
        leaf_of[b] = k;
    }
    let area = omega.h() * omega.h();
    let fields = js
        .par_iter()
        .map(|&j| member_hessian(u, scheme, j, omega, opts.smoothing, opts.finite_difference))
        .collect::<Result<Vec<_>>>()?;

    // Mass per leaf and per j; ω restricted to a leaf is 4 dA.
    let mut masses = vec![vec![0.0; js.len()]; nodes.len()];
    let mut omega_mass = vec![0.0; nodes.len()];
    for (jk, h) in fields.iter().enumerate() {
        for i in 0..omega.len() {
            if !h.valid()[i] {
                continue;
            }
            let m = omega.multi_index(i);
            let k = leaf_of[base.index(&[m[2 * f], m[2 * f + 1]])];
            if k == usize::MAX {
                continue;
            }
            let free = if f == 0 { h.hess(i).a22 } else { h.hess(i).a11 };
            masses[k][jk] += 4.0 * free * area;
            if jk == 0 {
                omega_mass[k] += 4.0 * area;
            }
        }
    }
    let mut leaves = Vec::with_capacity(nodes.len());
    let mut empty_leaves = 0;
    for k in 0..nodes.len() {
        if omega_mass[k] == 0.0 {
            empty_leaves += 1;
            continue;
        }
        let (verdict, _) = decide(&masses[k], &opts.rule)?;
        let c = family.base_points[k];
        leaves.push(LeafReport { base_point: [c.re, c.im], masses: masses[k].clone(), omega_mass: omega_mass[k], verdict });
    }
    let positivity = !leaves.is_empty() && leaves.iter().all(|l| l.omega_mass > 0.0);
    let satisfied = positivity && leaves.iter().all(|l| l.verdict == Verdict::TendsToZero);
    Ok(CertificateReport {
        spec: u.to_string(),
        scheme: scheme.to_string(),
        j: js.to_vec(),
        leaves,
        empty_leaves,
        positivity,
        satisfied,
        rule: opts.rule,
    })
}
