//! Numerical laboratory for maximal plurisubharmonic functions.
//!
//! The crate samples closed-form plurisubharmonic (PSH) functions on grids
//! over domains in C¹ and C², evaluates complex Monge-Ampère densities and
//! mixed wedge densities, integrates them against weights and currents, and
//! runs the convergence and comparison experiments built on those measures.
//!
//! All normalizations follow `d^c = i(∂̄ − ∂)`, so `dd^c = 2i∂∂̄` and for a
//! smooth function on Cⁿ
//!
//! ```text
//! (dd^c u)^n = 4^n · n! · det(∂²u/∂z_j∂z̄_k) · dV_{2n}
//! ```
//!
//! Module map:
//!
//! * [`grid`]: grids, sampled functions, finite-difference complex Hessians,
//!   mollification, masks and serialization.
//! * [`catalog`]: the PSH expression grammar with analytic derivatives,
//!   convex reparametrizations and approximating sequences.
//! * [`engine`]: Monge-Ampère, mixed and current-weighted densities as
//!   measure fields, plus radial reductions and closed forms.
//! * [`lab`]: weighted scans, truncated scans, weak-convergence verdicts,
//!   the Blocki integral and the Cegrell mass.
//! * [`comparison`]: comparison-principle checks, capacity lower bounds and
//!   slice-current maximality certificates.

pub mod catalog;
pub mod comparison;
pub mod engine;
pub mod error;
pub mod grid;
pub mod lab;
pub mod quad;
pub mod sum;

pub use error::{LabError, Result};

/// Banner embedded in every exported artifact.
pub const CONVENTION_BANNER: &str = "d^c = i(∂̄−∂), dd^c = 2i∂∂̄";
