//! Comparison principle checks against closed positive currents, capacity
//! lower bounds and slice-family maximality certificates.

mod capacity;
mod certificate;
mod check;
mod random;

pub use capacity::{
    capacity_estimate, default_candidates, log_envelope, CandidateMass, CapacityOptions, CapacityReport, RANGE_TOL,
};
pub use certificate::{
    leaf_gaps, maximality_certificate, CertificateOptions, CertificateReport, LeafReport,
};
pub use check::{comparison_check, ComparisonOptions, ComparisonReport, TIE_TOL};
pub use random::{randomized_suite, random_smooth_psh, sample_pair, RandomCase, SuiteReport, MARGIN, MIN_REGION_SHARE};
