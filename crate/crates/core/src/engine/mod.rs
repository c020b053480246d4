//! Monge-Ampère, mixed and current-weighted densities as measure fields.

mod closed;
pub(crate) mod density;
mod measure;
pub mod radial;

pub use closed::{closed_form_blocki_density, closed_form_blocki_mixed};
pub use density::{
    chi_pushforward_density, gradient_pairing_density, ma_constant, ma_density, ma_density_with, mixed_density,
    wedge_with_current, CurrentKind, CurrentSpec, DensityOptions, SliceFamily,
};
pub use measure::{integrate_measure, integrate_measure_by_node, Atom, MeasureField, MeasureSummary};
pub use radial::{separable_cell_measure, RadialMeasure, RadialTerm};
