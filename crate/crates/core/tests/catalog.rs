use std::f64::consts::E;

use approx::assert_relative_eq;
use maxpsh::catalog::{make_sequence, parse_chi, sum_product, ChiFamily, ChiWeight, PshSpec, SequenceScheme};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn named_values() {
    assert_eq!(PshSpec::parse("cegrell").unwrap().eval(&[c(1.0), c(1.0)]).unwrap(), 0.0);
    let b = PshSpec::parse("blocki").unwrap();
    assert_relative_eq!(b.eval(&[c((-4.0f64).exp()), c(1.0 / E)]).unwrap(), -2.0, max_relative = 1e-14);
    let v = PshSpec::parse("barrier-v").unwrap();
    // |z1|² + x2 + y2 − 6 at (1, 1 + i)
    assert_relative_eq!(v.eval(&[c(1.0), Complex64::new(1.0, 1.0)]).unwrap(), -3.0, max_relative = 1e-14);
}

#[test]
fn blocki_factor_gradient() {
    let f = PshSpec::parse("negsqrtlog(z1)").unwrap();
    let j = f.eval_complex_derivs(&[c(1.0 / E)]).unwrap();
    assert_relative_eq!(j.grad[0].re, E / 4.0, max_relative = 1e-13);
    assert!(j.grad[0].im.abs() < 1e-15);
}

#[test]
fn abs2_derivatives() {
    let f = PshSpec::parse("abs2(z1)").unwrap();
    let z = Complex64::new(0.3, -0.7);
    let j = f.eval_complex_derivs(&[z]).unwrap();
    assert!((j.grad[0] - z.conj()).norm() < 1e-15);
    assert_eq!(j.hess.a11, 1.0);
}

#[test]
fn blocki_factor_identity_at_random_points() {
    let f = PshSpec::parse("negsqrtlog(z1)").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let z = Complex64::from_polar(rng.gen_range(0.05..0.9), rng.gen_range(0.0..std::f64::consts::TAU));
        let j = f.eval_complex_derivs(&[z]).unwrap();
        let lhs = j.value * j.hess.a11;
        let rhs = -j.grad[0].norm_sqr();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }
}

#[test]
fn sequence_examples() {
    let log = PshSpec::parse("log(z1)").unwrap();
    let u2 = make_sequence(&log, &SequenceScheme::MaxCutoff { smoothing: None }, 2).unwrap();
    assert_eq!(u2.eval(&[c((-5.0f64).exp())]).unwrap(), -2.0);

    let ceg = PshSpec::parse("cegrell").unwrap();
    let v1 = make_sequence(&ceg, &SequenceScheme::LogShift, 1).unwrap();
    assert_eq!(v1.eval(&[c(0.0), c(0.0)]).unwrap(), 0.0);
    let v4 = make_sequence(&ceg, &SequenceScheme::LogShift, 4).unwrap();
    assert_relative_eq!(v4.eval(&[c(0.0), c(0.0)]).unwrap(), 2.0 * 0.25f64.ln(), max_relative = 1e-14);

    let b = PshSpec::parse("blocki").unwrap();
    let b1 = make_sequence(&b, &SequenceScheme::ChiCompose(ChiFamily::Exp), 1).unwrap();
    assert_relative_eq!(b1.eval(&[c(1.0 / E), c(1.0 / E)]).unwrap(), -(1.0 - 1.0 / E), max_relative = 1e-14);
}

#[test]
fn sum_product_of_logs() {
    let u = PshSpec::parse("log(z1)").unwrap();
    let s = sum_product(&u, &u).unwrap();
    assert_eq!(s.n(), 2);
    assert_relative_eq!(s.eval(&[c(1.0 / E), c((-2.0f64).exp())]).unwrap(), -3.0, max_relative = 1e-14);
    let j = s.eval_complex_derivs(&[Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.5)]).unwrap();
    assert_eq!(j.hess.a12, Complex64::new(0.0, 0.0));
    assert!(sum_product(&s, &u).is_err());
}

#[test]
fn log_shift_needs_log_atoms() {
    let u = PshSpec::parse("abs2-sum").unwrap();
    assert!(make_sequence(&u, &SequenceScheme::LogShift, 1).is_err());
}

#[test]
fn weights_parse_and_evaluate() {
    let phi = parse_chi("phi(0.5)").unwrap();
    assert_eq!(phi, ChiWeight::PhiAlpha(0.5));
    let e = phi.eval(-4.0).unwrap();
    assert_relative_eq!(e.value, -2.0, max_relative = 1e-14);
    // χ' = α(−t)^{α−1} = 0.25
    assert_relative_eq!(e.d1, 0.25, max_relative = 1e-14);
    assert!(phi.eval(1.0).is_err());
    let m = ChiWeight::ExpFamily(3.0);
    assert_eq!(m.lower_bound(), Some(-3.0));
}

#[test]
fn singular_sets_are_reported() {
    let u = PshSpec::parse("blocki").unwrap();
    let s = u.singular_set();
    assert_eq!(s, ["hyperplane z1 = 0", "hyperplane z2 = 0", "outside |z1| < 1", "outside |z2| < 1"]);
    assert!(matches!(u.eval(&[c(0.0), c(0.5)]), Err(maxpsh::LabError::SingularPoint(_))));
}
