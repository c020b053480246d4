use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check::{comparison_check, outer_shell, ComparisonOptions, ComparisonReport};
use crate::catalog::{Expr, PshSpec};
use crate::engine::CurrentSpec;
use crate::error::{LabError, Result};
use crate::grid::GridDomain;

/// Shell margin `min (u − v)` that sampled pairs are shifted to.
pub const MARGIN: f64 = 0.05;

/// Minimum share of valid nodes that `{u < v}` must cover.
pub const MIN_REGION_SHARE: f64 = 0.01;

const MAX_ATTEMPTS: usize = 200;

/// A random smooth plurisubharmonic sum of catalog atoms.
pub fn random_smooth_psh<R: Rng>(rng: &mut R, n: usize) -> Result<PshSpec> {
    let terms = rng.gen_range(1..=3);
    let mut parts = Vec::with_capacity(terms + 1);
    for _ in 0..terms {
        let var = rng.gen_range(0..n);
        let c: f64 = rng.gen_range(0.2..2.0);
        let atom = match rng.gen_range(0..3) {
            0 => Expr::ModSq(var),
            1 => Expr::LogModSq { var, shift: rng.gen_range(0.1..1.0) },
            _ => Expr::RePart { var, coeff: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) },
        };
        parts.push(Expr::scale(c, atom));
    }
    parts.push(Expr::Const(rng.gen_range(-1.0..1.0)));
    PshSpec::new(n, Expr::sum(parts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomCase {
    pub u: String,
    pub v: String,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub cases: Vec<RandomCase>,
    /// Pairs discarded because `{u < v}` was too small.
    pub rejected: usize,
    pub all_hold: bool,
}

fn add_const(spec: &PshSpec, c: f64) -> Result<PshSpec> {
    PshSpec::new(spec.n(), Expr::sum(vec![spec.expr().clone(), Expr::Const(c)]))
}

/// Draw a pair with `min (u − v) = MARGIN` on the outer shell and a
/// nonnegligible set `{u < v}`.
pub fn sample_pair<R: Rng>(rng: &mut R, omega: &GridDomain) -> Result<(PshSpec, PshSpec, usize)> {
    let n = omega.n();
    let valid = omega.stencil_valid_mask();
    let shell = outer_shell(omega, &valid);
    let inside: Vec<usize> = (0..omega.len()).filter(|&i| valid[i]).collect();
    let ring: Vec<usize> = (0..omega.len()).filter(|&i| shell[i]).collect();
    if inside.is_empty() {
        return Err(LabError::InvalidStencil("domain has no valid nodes".into()));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let u = random_smooth_psh(rng, n)?;
        let w = random_smooth_psh(rng, n)?;
        let gap = |i: usize| -> Result<f64> {
            let p = omega.point(i);
            Ok(u.eval(&p[..n])? - w.eval(&p[..n])?)
        };
        let shell_gaps = ring.par_iter().map(|&i| gap(i)).collect::<Result<Vec<f64>>>()?;
        let c = shell_gaps.iter().copied().fold(f64::INFINITY, f64::min) - MARGIN;
        let v = add_const(&w, c)?;
        let below = inside.par_iter().map(|&i| gap(i).map(|g| g - c < 0.0)).collect::<Result<Vec<bool>>>()?;
        let share = below.iter().filter(|&&b| b).count() as f64 / inside.len() as f64;
        if share >= MIN_REGION_SHARE {
            return Ok((u, v, attempt));
        }
    }
    Err(LabError::InvalidParameter("could not sample a pair with a nonempty comparison region".into()))
}

/// Run `cases` randomized comparison checks from a fixed seed.
pub fn randomized_suite(
    seed: u64,
    cases: usize,
    omega: &GridDomain,
    current: &CurrentSpec,
    opts: &ComparisonOptions,
) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(cases);
    let mut rejected = 0;
    for _ in 0..cases {
        let (u, v, r) = sample_pair(&mut rng, omega)?;
        rejected += r;
        pairs.push((u, v));
    }
    let out = pairs
        .par_iter()
        .map(|(u, v)| {
            comparison_check(u, v, current, omega, opts).map(|report| RandomCase { u: u.to_string(), v: v.to_string(), report })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_hold = out.iter().all(|c| c.report.holds);
    Ok(SuiteReport { seed, cases: out, rejected, all_hold })
}
