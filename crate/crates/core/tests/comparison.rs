use std::f64::consts::PI;

use approx::assert_relative_eq;
use maxpsh::catalog::{PshSpec, SequenceScheme};
use maxpsh::comparison::{
    capacity_estimate, comparison_check, default_candidates, leaf_gaps, maximality_certificate, CapacityOptions,
    CertificateOptions, ComparisonOptions,
};
use maxpsh::engine::{CurrentSpec, SliceFamily};
use maxpsh::error::LabError;
use maxpsh::grid::{Exclusion, GridDomain, Region, RegionMask};

fn unit_ball(h: f64) -> GridDomain {
    GridDomain::cube(2, -1.1, 1.1, h, vec![Exclusion::outside_ball(1.0)]).unwrap()
}

#[test]
fn ball_instance() {
    let g = unit_ball(0.1);
    let u = PshSpec::parse("sum(abs2(z1), abs2(z2), -1)").unwrap();
    let v = PshSpec::parse_in("-0.5", 2).unwrap();
    let r = comparison_check(&u, &v, &CurrentSpec::trivial(2), &g, &ComparisonOptions::default()).unwrap();
    assert_eq!(r.lhs, 0.0);
    assert_relative_eq!(r.rhs, 4.0 * PI * PI, max_relative = 0.05);
    assert!(r.holds);
}

#[test]
fn equal_functions_have_empty_region() {
    let g = unit_ball(0.2);
    let u = PshSpec::parse("abs2-sum").unwrap();
    let r = comparison_check(&u, &u, &CurrentSpec::omega(1), &g, &ComparisonOptions::default()).unwrap();
    assert_eq!(r.region_nodes, 0);
    assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    assert!(r.holds);
}

#[test]
fn delta_shift_shrinks_region() {
    let g = unit_ball(0.1);
    let u = PshSpec::parse("sum(abs2(z1), abs2(z2), -1)").unwrap();
    let v = PshSpec::parse_in("-0.5", 2).unwrap();
    let plain = comparison_check(&u, &v, &CurrentSpec::trivial(2), &g, &ComparisonOptions::default()).unwrap();
    let opts = ComparisonOptions { delta_shift: Some(0.1), ..ComparisonOptions::default() };
    let shifted = comparison_check(&u, &v, &CurrentSpec::trivial(2), &g, &opts).unwrap();
    assert!(shifted.region_nodes < plain.region_nodes);
    assert_eq!(shifted.delta_shift, Some(0.1));
    assert!(shifted.holds);
}

#[test]
fn boundary_violation_is_refused() {
    let g = unit_ball(0.2);
    let u = PshSpec::parse("sum(abs2(z1), abs2(z2), -1)").unwrap();
    let v = PshSpec::parse_in("0.5", 2).unwrap();
    let r = comparison_check(&u, &v, &CurrentSpec::trivial(2), &g, &ComparisonOptions::default());
    assert!(matches!(r, Err(LabError::BoundaryViolated { .. })));
}

#[test]
fn capacity_bounds() {
    let g = GridDomain::cube(1, -2.2, 2.2, 0.02, vec![Exclusion::outside_ball(2.0)]).unwrap();
    let t = CurrentSpec::trivial(1);
    let opts = CapacityOptions::default();
    let cands = default_candidates(1, 2.0, &[0.5, 1.0], 0.05).unwrap();
    let empty = RegionMask::new(g.clone(), vec![false; g.len()]).unwrap();
    assert_eq!(capacity_estimate(&empty, &g, &t, &cands, &opts).unwrap().best, 0.0);

    let small = capacity_estimate(&Region::Ball { radius: 0.5 }.to_mask(&g), &g, &t, &cands, &opts).unwrap();
    let big = capacity_estimate(&Region::Ball { radius: 1.5 }.to_mask(&g), &g, &t, &cands, &opts).unwrap();
    assert!(small.best > 0.0);
    assert!(big.best >= small.best);
    // K contains the kink circle of the r = 1 envelope, whose mass is 2π / log 2
    assert!(big.best > 0.9 * 2.0 * PI / 2f64.ln(), "{}", big.best);

    let out = vec![PshSpec::parse("abs2(z1)").unwrap()];
    let r = capacity_estimate(&Region::Ball { radius: 1.0 }.to_mask(&g), &g, &t, &out, &opts);
    assert!(matches!(r, Err(LabError::CandidateOutOfRange { index: 0, .. })));
}

fn square() -> GridDomain {
    GridDomain::cube(2, -1.0, 1.0, 0.2, vec![]).unwrap()
}

#[test]
fn certificates() {
    let g = square();
    let opts = CertificateOptions::default();
    let js = [1, 2, 3];
    let fam = SliceFamily::lattice(&g, 0, 1).unwrap();
    let log = PshSpec::parse_in("log(z1)", 2).unwrap();
    let r = maximality_certificate(&log, &SequenceScheme::MaxCutoff { smoothing: None }, &fam, &g, &js, &opts).unwrap();
    assert!(r.satisfied && r.positivity);

    // leaves {z2 = c} for Re z2: pluriharmonic, so every leaf mass is zero
    let fam2 = SliceFamily::lattice(&g, 1, 1).unwrap();
    let re = PshSpec::parse_in("re(z2, 1, 0)", 2).unwrap();
    let r = maximality_certificate(&re, &SequenceScheme::Stationary, &fam2, &g, &js, &opts).unwrap();
    assert!(r.satisfied);
    assert!(r.leaves.iter().all(|l| l.masses.iter().all(|m| m.abs() < 1e-9)));

    let abs2 = PshSpec::parse("abs2-sum").unwrap();
    let r = maximality_certificate(&abs2, &SequenceScheme::Stationary, &fam, &g, &js, &opts).unwrap();
    assert!(!r.satisfied);

    let mut sparse = SliceFamily::lattice(&g, 0, 1).unwrap();
    sparse.base_points.truncate(sparse.base_points.len() / 2);
    assert!(leaf_gaps(&sparse, &g).unwrap() > 0);
    let r = maximality_certificate(&abs2, &SequenceScheme::Stationary, &sparse, &g, &js, &opts);
    assert!(matches!(r, Err(LabError::LeafGaps { .. })));
    assert!(maximality_certificate(&abs2, &SequenceScheme::Stationary, &fam, &g, &[], &opts).is_err());
}
