use std::f64::consts::E;

use approx::assert_relative_eq;
use maxpsh::catalog::PshSpec;
use maxpsh::grid::io::{read_binary, write_binary};
use maxpsh::grid::{analytic_hessian, complex_hessian, mollify, sample, Exclusion, GridDomain, GridFunction, MollifierSpec};
use num_complex::Complex64;

fn max_hessian_error(spec: &PshSpec, h: f64) -> f64 {
    let g = GridDomain::cube(1, -1.0, 1.0, h, vec![]).unwrap();
    let fd = complex_hessian(&sample(spec, &g).unwrap()).unwrap();
    let exact = analytic_hessian(spec, &g).unwrap();
    (0..g.len()).filter(|&i| fd.valid()[i]).map(|i| (fd.hess(i).a11 - exact.hess(i).a11).abs()).fold(0.0, f64::max)
}

#[test]
fn hessian_converges_at_second_order() {
    let spec = PshSpec::parse("logsq(z1, 1.0)").unwrap();
    let ratio = max_hessian_error(&spec, 0.1) / max_hessian_error(&spec, 0.05);
    assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
}

#[test]
fn blocki_factor_laplacian_at_inverse_e() {
    // f = -sqrt(-log|z|): f_zzbar = 1 / (16 |z|^2 (-log|z|)^{3/2})
    let spec = PshSpec::parse("negsqrtlog(z1)").unwrap();
    let r = (-1.0f64).exp();
    let h = 1e-3;
    let g = GridDomain::new(1, &[[r - 2.0 * h, r + 2.0 * h], [-2.0 * h, 2.0 * h]], h, vec![]).unwrap();
    let field = complex_hessian(&sample(&spec, &g).unwrap()).unwrap();
    let c = g.index(&[2, 2]);
    assert_relative_eq!(field.hess(c).a11, E * E / 16.0, max_relative = 1e-5);
}

#[test]
fn pluriharmonic_in_c2_has_zero_hessian() {
    let spec = PshSpec::parse("re-z1").unwrap();
    let spec = PshSpec::new(2, spec.expr().clone()).unwrap();
    let g = GridDomain::cube(2, -1.0, 1.0, 0.25, vec![]).unwrap();
    assert!(complex_hessian(&sample(&spec, &g).unwrap()).unwrap().max_abs() < 1e-12);
}

#[test]
fn excluded_ball_invalidates_a_stencil_ring() {
    let g = GridDomain::cube(2, -1.0, 1.0, 0.1, vec![Exclusion::ball(0.05)]).unwrap();
    let valid = g.stencil_valid_mask();
    let origin = g.nearest_node(&[0.0; 4]).unwrap();
    assert!(!g.in_domain(origin));
    assert!(!valid[origin]);
    let next = g.nearest_node(&[0.1, 0.0, 0.0, 0.0]).unwrap();
    assert!(g.in_domain(next) && !valid[next]);
    let far = g.nearest_node(&[0.5, 0.5, 0.0, 0.0]).unwrap();
    assert!(valid[far]);
}

#[test]
fn mollify_keeps_affine_functions() {
    let spec = PshSpec::parse("re(z1, 1.0, 0.0)").unwrap();
    let g = GridDomain::cube(1, -1.0, 1.0, 0.05, vec![]).unwrap();
    let f = sample(&spec, &g).unwrap();
    let m = mollify(&f, &MollifierSpec::new(0.2)).unwrap();
    let mut checked = 0;
    for i in 0..g.len() {
        if m.is_defined(i) {
            assert!((m.value(i) - f.value(i)).abs() < 1e-10);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn mollified_cutoff_dominates_the_cutoff() {
    let spec = PshSpec::parse("max(log(z1), -2)").unwrap();
    let g = GridDomain::cube(1, -0.5, 0.5, 0.01, vec![]).unwrap();
    // every node defined, kinks included, so the convolution sees the raw cutoff
    let values = (0..g.len()).map(|i| spec.eval(&g.point(i)[..1]).unwrap()).collect();
    let f = GridFunction::from_values(g.clone(), values).unwrap();
    let m = mollify(&f, &MollifierSpec::new(0.05)).unwrap();
    // where log|z| is harmonic the lattice mean matches it only to O(h^2)
    let mut checked = 0;
    for i in 0..g.len() {
        if m.is_defined(i) {
            assert!(m.value(i) >= f.value(i) - 1e-5, "node {i}: {} < {}", m.value(i), f.value(i));
            checked += 1;
        }
    }
    assert!(checked > 1000);
    // strictly above on the kink circle |z| = e^-2
    let k = g.nearest_node(&[(-2.0f64).exp(), 0.0]).unwrap();
    assert!(m.value(k) > f.value(k) + 1e-3);
    // direct convolution at the kink node
    let (eps, h) = (0.05, g.h());
    let r = (eps / h).ceil() as isize;
    let m0 = g.multi_index(k);
    let (mut num, mut den) = (0.0, 0.0);
    for a in -r..=r {
        for b in -r..=r {
            let rho2 = ((a * a + b * b) as f64) * h * h / (eps * eps);
            if rho2 < 1.0 {
                let w = (1.0 / (rho2 - 1.0)).exp();
                let idx = g.index(&[(m0[0] as isize + a) as usize, (m0[1] as isize + b) as usize]);
                num += w * f.value(idx);
                den += w;
            }
        }
    }
    assert_relative_eq!(m.value(k), num / den, max_relative = 1e-12);
}

#[test]
fn binary_format_round_trips_through_a_file() {
    let spec = PshSpec::parse("cegrell").unwrap();
    let g = GridDomain::cube(2, -0.5, 0.5, 0.25, vec![]).unwrap();
    let f = sample(&spec, &g).unwrap();
    let mut file = tempfile::tempfile().unwrap();
    write_binary(&f, &mut file).unwrap();
    use std::io::Seek;
    file.rewind().unwrap();
    let back = read_binary(&file).unwrap();
    assert_eq!(back.valid(), f.valid());
    for i in 0..g.len() {
        if f.is_defined(i) {
            assert_eq!(back.value(i).to_bits(), f.value(i).to_bits());
        }
    }
}

#[test]
fn sample_matches_pointwise_evaluation() {
    let spec = PshSpec::parse("blocki").unwrap();
    let z = [Complex64::new((-1.0f64).exp(), 0.0), Complex64::new(0.0, (-1.0f64).exp())];
    assert_relative_eq!(spec.eval(&z).unwrap(), -1.0, max_relative = 1e-14);
}
