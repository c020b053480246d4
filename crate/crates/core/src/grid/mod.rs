//! Rectangular grids over domains in C¹ and C², sampled functions, finite
//! differences, mollification and region masks.

mod domain;
mod function;
mod hessian;
pub mod io;
mod mask;
mod mollify;

pub use domain::{build_grid, to_point, Exclusion, GridDomain, MIN_NODES};
pub use function::{sample, GridFunction};
pub use hessian::{analytic_hessian, complex_hessian, ComplexHessianField, Provenance, HERMITIAN_TOL};
pub use mask::{Region, RegionMask};
pub use mollify::{mollify, MollifierSpec};
