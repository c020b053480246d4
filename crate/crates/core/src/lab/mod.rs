//! Convergence experiments: weighted Monge-Ampère scans, truncated energy
//! scans, weak-convergence verdicts and the closed-form Blocki and Cegrell
//! quantities.

mod blocki;
mod cegrell;
mod reduce;
mod scan;
mod verdict;
mod weak;

pub use blocki::{blocki_integral, BlockiReport};
pub use cegrell::{cegrell_grid_mass, cegrell_mass, GridMassReport};
pub(crate) use scan::{member_hessian, spec_hessian};
pub use scan::{m1_truncated_scan, weighted_ma_scan, Estimator, Quantity, ScanOptions, ScanReport, WeightKind};
pub use verdict::{decide, Verdict, VerdictRule, VerdictStats};
pub use weak::{weak_convergence_verdict, BumpShape, BumpTest, WeakVerdict};
