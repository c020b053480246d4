//! Property suites shared by the `properties` and `acceptance` targets.
//! Every suite runs at least `CASES` generated cases from a fixed seed.

#![allow(dead_code)]

use std::f64::consts::PI;

use maxpsh::catalog::{make_sequence, ChiFamily, ChiWeight, Expr, JetValue, PshSpec, SequenceScheme, Signature};
use maxpsh::comparison::{
    capacity_estimate, comparison_check, default_candidates, maximality_certificate, sample_pair, CapacityOptions,
    CertificateOptions, ComparisonOptions,
};
use maxpsh::engine::{
    gradient_pairing_density, integrate_measure, ma_density, mixed_density, wedge_with_current, CurrentSpec, MeasureField,
    SliceFamily,
};
use maxpsh::grid::{
    analytic_hessian, complex_hessian, mollify, sample, Exclusion, GridDomain, GridFunction, MollifierSpec, Region,
    RegionMask,
};
use maxpsh::lab::{BumpTest, Verdict};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 100;

pub struct Outcome {
    pub name: &'static str,
    pub cases: u32,
    pub result: Result<(), String>,
}

fn seed_for(name: &str) -> [u8; 32] {
    let mut s = [0u8; 32];
    for (i, b) in name.bytes().enumerate() {
        s[i % 32] = s[i % 32].wrapping_mul(31).wrapping_add(b);
    }
    s
}

fn run<S, F>(name: &'static str, strategy: S, test: F) -> Outcome
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config { cases: CASES, failure_persistence: None, rng_algorithm: RngAlgorithm::ChaCha, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &seed_for(name)));
    let result = runner.run(&strategy, test).map_err(|e| e.to_string());
    Outcome { name, cases: CASES, result }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn lift<T>(r: maxpsh::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn c64() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Random smooth psh sums of catalog atoms in C².
fn smooth_psh() -> impl Strategy<Value = PshSpec> {
    let atom = prop_oneof![
        (0..2usize, 0.2..2.0f64).prop_map(|(k, c)| Expr::scale(c, Expr::ModSq(k))),
        (0..2usize, 0.2..2.0f64, 0.2..1.0f64).prop_map(|(k, c, s)| Expr::scale(c, Expr::LogModSq { var: k, shift: s })),
        (0..2usize, c64()).prop_map(|(k, a)| Expr::RePart { var: k, coeff: a }),
    ];
    (prop::collection::vec(atom, 1..4), -1.0..1.0f64).prop_map(|(mut v, c)| {
        v.push(Expr::Const(c));
        PshSpec::new(2, Expr::sum(v)).unwrap()
    })
}

// ---------------------------------------------------------------- grid

pub fn grid_pluriharmonic_hessian() -> Outcome {
    // log|a z1 + b z2 + c| with the zero of the linear form far from the box
    let s = (c64(), c64(), 0.0..2.0 * PI, 0.05..0.2f64);
    run("grid: pluriharmonic hessian vanishes", s, |(a, b, arg, h)| {
        let reach = 1.5 * (a.norm() + b.norm()) + 0.5;
        let c = Complex64::from_polar(reach, arg);
        let spec = PshSpec::new(2, Expr::LogAbsLinear { coeffs: [a, b], offset: c }).unwrap();
        let g = lift(GridDomain::cube(2, -1.0, 1.0, h, vec![]))?;
        let field = lift(complex_hessian(&lift(sample(&spec, &g))?))?;
        // fourth derivatives of log|L| are bounded by 6 (|a|+|b|)^4 / min|L|^4
        let lmin = reach - (a.norm() + b.norm()) * 2f64.sqrt();
        let scale = 6.0 * ((a.norm() + b.norm()) / lmin).powi(4);
        let m = field.max_abs();
        check(m <= 10.0 * h * h * scale + 1e-12, || format!("max |H| = {m:e}, bound {:e}", 10.0 * h * h * scale))
    })
}

fn random_grid_function(vals: &[f64]) -> GridFunction {
    let g = GridDomain::cube(1, -1.0, 1.0, 0.1, vec![]).unwrap();
    GridFunction::from_values(g, vals.to_vec()).unwrap()
}

pub fn grid_mollify_monotone() -> Outcome {
    let s = (prop::collection::vec(-5.0..5.0f64, 441), prop::collection::vec(0.0..2.0f64, 441), 0.3..0.6f64);
    run("grid: mollify is monotone", s, |(f, d, eps)| {
        let g: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + b).collect();
        let mf = lift(mollify(&random_grid_function(&f), &MollifierSpec::new(eps)))?;
        let mg = lift(mollify(&random_grid_function(&g), &MollifierSpec::new(eps)))?;
        for i in 0..mf.values().len() {
            if mf.is_defined(i) {
                check(mf.value(i) <= mg.value(i) + 1e-12, || format!("node {i}: {} > {}", mf.value(i), mg.value(i)))?;
            }
        }
        Ok(())
    })
}

pub fn grid_mollify_constants() -> Outcome {
    let s = (prop::collection::vec(-5.0..5.0f64, 441), -10.0..10.0f64, 0.3..0.6f64);
    run("grid: mollify commutes with constants", s, |(f, c, eps)| {
        let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
        let m = MollifierSpec::new(eps);
        let a = lift(mollify(&random_grid_function(&f), &m))?;
        let b = lift(mollify(&random_grid_function(&shifted), &m))?;
        for i in 0..a.values().len() {
            if a.is_defined(i) {
                let gap = (b.value(i) - a.value(i) - c).abs();
                check(gap <= 1e-12 * (c.abs() + 5.0), || format!("node {i}: gap {gap:e}"))?;
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- catalog

fn at(spec: &PshSpec, z: [Complex64; 2]) -> Result<f64, TestCaseError> {
    lift(spec.eval(&z[..spec.n()]))
}

pub fn catalog_sequence_monotone() -> Outcome {
    let schemes = prop_oneof![
        Just(("log-sum", SequenceScheme::MaxCutoff { smoothing: None })),
        Just(("log-sum", SequenceScheme::MaxCutoff { smoothing: Some(0.3) })),
        Just(("cegrell", SequenceScheme::MaxCutoff { smoothing: None })),
        Just(("cegrell", SequenceScheme::LogShift)),
        Just(("log-sum", SequenceScheme::LogShift)),
        Just(("blocki", SequenceScheme::MaxCutoff { smoothing: Some(0.2) })),
        Just(("blocki", SequenceScheme::ChiCompose(ChiFamily::Exp))),
        Just(("log-sum", SequenceScheme::ChiCompose(ChiFamily::Exp))),
        Just(("blocki", SequenceScheme::ChiCompose(ChiFamily::Cutoff { smoothing: 0.1 }))),
    ];
    let point = (0.01..0.99f64, 0.01..0.99f64, 0.0..2.0 * PI, 0.0..2.0 * PI);
    run("catalog: sequences decrease to the base", (schemes, point, 1..30u32), |((name, scheme), (r, s, a, b), j)| {
        let base = PshSpec::parse(name).unwrap();
        let z = [Complex64::from_polar(r, a), Complex64::from_polar(s, b)];
        let u = at(&base, z)?;
        let uj = at(&lift(make_sequence(&base, &scheme, j))?, z)?;
        let uk = at(&lift(make_sequence(&base, &scheme, j + 1))?, z)?;
        let tol = 1e-12 * (1.0 + u.abs());
        check(uk <= uj + tol, || format!("{scheme} j = {j}: {uk} > {uj}"))?;
        check(uj >= u - tol, || format!("{scheme} j = {j}: {uj} < base {u}"))
    })
}

fn chi_weight() -> impl Strategy<Value = ChiWeight> {
    prop_oneof![
        Just(ChiWeight::Identity),
        (0.5..50.0f64).prop_map(ChiWeight::ExpFamily),
        (0.05..0.95f64).prop_map(ChiWeight::PhiAlpha),
        (0.5..20.0f64, 0.01..1.0f64).prop_map(|(level, smoothing)| ChiWeight::Cutoff { level, smoothing }),
    ]
}

pub fn catalog_chi_convexity() -> Outcome {
    run("catalog: chi weights are convex and nondecreasing", (chi_weight(), -6.0..6.0f64), |(chi, e)| {
        let t = -(10f64.powf(e));
        let v = lift(chi.eval(t))?;
        check(v.d1 >= -1e-12, || format!("{chi}: chi' = {} at {t}", v.d1))?;
        let d2 = v.d2.unwrap_or(0.0);
        check(d2 >= -1e-12, || format!("{chi}: chi'' = {d2} at {t}"))
    })
}

pub fn catalog_exp_family_limit() -> Outcome {
    run("catalog: exp family converges to the identity", (1.0..200.0f64, -10.0..-1e-9f64), |(m, t)| {
        let v = lift(ChiWeight::ExpFamily(m).eval(t))?.value;
        let bound = t * t / (2.0 * m);
        check((v - t).abs() <= bound * (1.0 + 1e-12), || format!("m = {m}, t = {t}: {} > {bound}", (v - t).abs()))
    })
}

fn local_fd(spec: &PshSpec, z: [Complex64; 2], h: f64) -> Result<maxpsh::catalog::Herm2, TestCaseError> {
    let x = [z[0].re, z[0].im, z[1].re, z[1].im];
    let bounds: Vec<[f64; 2]> = x.iter().map(|&c| [c - 2.0 * h, c + 2.0 * h]).collect();
    let g = lift(GridDomain::new(2, &bounds, h, vec![]))?;
    let field = lift(complex_hessian(&lift(sample(spec, &g))?))?;
    let centre = g.index(&[2, 2, 2, 2]);
    Ok(*field.hess(centre))
}

pub fn catalog_fd_order() -> Outcome {
    run("catalog: finite differences agree at order h^2", (smooth_psh(), c64(), c64()), |(spec, a, b)| {
        let z = [a * 0.7, b * 0.7];
        let exact = match lift(spec.jet_at(&z, &mut Signature::default()))? {
            JetValue::Finite(j) => j.hess,
            JetValue::NegInf => return Ok(()),
        };
        let err = |h: f64| -> Result<f64, TestCaseError> {
            let fd = local_fd(&spec, z, h)?;
            Ok((fd.a11 - exact.a11).abs().max((fd.a22 - exact.a22).abs()).max((fd.a12 - exact.a12).norm()))
        };
        let (e1, e2) = (err(0.02)?, err(0.01)?);
        check(e1 < 1e-8 || e2 <= e1 / 4.0 * 1.3 + 1e-9, || format!("errors {e1:e} then {e2:e}"))
    })
}

// ---------------------------------------------------------------- engine

pub fn engine_calibration() -> Outcome {
    run("engine: calibration constants", (0.1..3.0f64, 0.1..0.3f64), |(c, h)| {
        let spec = PshSpec::new(2, Expr::scale(c, Expr::sum(vec![Expr::ModSq(0), Expr::ModSq(1)]))).unwrap();
        let g = lift(GridDomain::cube(2, -1.0, 1.0, h, vec![]))?;
        let field = lift(analytic_hessian(&spec, &g))?;
        let ma = ma_density(&field);
        let om = lift(wedge_with_current(&field, &CurrentSpec::omega(1)))?;
        for i in 0..g.len() {
            if field.valid()[i] {
                check((ma.density()[i] - 32.0 * c * c).abs() <= 1e-10 * c * c, || format!("MA {}", ma.density()[i]))?;
                check((om.density()[i] - 32.0 * c).abs() <= 1e-10 * c, || format!("omega {}", om.density()[i]))?;
            }
        }
        Ok(())
    })
}

pub fn engine_blocki_identity() -> Outcome {
    run("engine: f f_zzbar + |f_z|^2 = 0", (0.01..0.99f64, 0.0..2.0 * PI), |(r, a)| {
        let z = [Complex64::from_polar(r, a), Complex64::new(0.0, 0.0)];
        let JetValue::Finite(j) = lift(Expr::NegSqrtNegLog(0).jet(&z, &mut Signature::default()))? else {
            return Err(TestCaseError::fail("pole"));
        };
        let lhs = j.value * j.hess.a11;
        let rhs = -j.grad[0].norm_sqr();
        check((lhs - rhs).abs() <= 1e-12 * rhs.abs(), || format!("{lhs} vs {rhs}"))
    })
}

pub fn engine_cauchy_schwarz() -> Outcome {
    run("engine: Cauchy-Schwarz for gradient pairings", (smooth_psh(), smooth_psh()), |(u, v)| {
        let g = lift(GridDomain::cube(2, -1.0, 1.0, 0.25, vec![]))?;
        let hu = lift(complex_hessian(&lift(sample(&u, &g))?))?;
        let hv = lift(complex_hessian(&lift(sample(&v, &g))?))?;
        let full = RegionMask::full(&g);
        let pair = |a, b| -> Result<f64, TestCaseError> {
            let mu: MeasureField = lift(gradient_pairing_density(a, b))?;
            lift(integrate_measure(&mu, &full, |_| 1.0))
        };
        let uv = pair(&hu, &hv)?;
        let uu = pair(&hu, &hu)?;
        let vv = pair(&hv, &hv)?;
        check(uv * uv <= uu * vv * (1.0 + 1e-10) + 1e-12, || format!("{uv}^2 > {uu} * {vv}"))
    })
}

pub fn engine_weak_convergence() -> Outcome {
    run("engine: MA of decreasing smooth sequences converges weakly", smooth_psh(), |u| {
        let g = lift(GridDomain::cube(2, -1.0, 1.0, 0.2, vec![]))?;
        let tests = [
            BumpTest::ball([0.0; 4], 0.7),
            BumpTest::product([0.2, 0.0, -0.2, 0.1], 0.5),
            BumpTest::ball([0.3, 0.3, 0.0, 0.0], 0.5),
        ];
        let full = RegionMask::full(&g);
        let pairing = |spec: &PshSpec, phi: &BumpTest| -> Result<f64, TestCaseError> {
            let mu = ma_density(&lift(analytic_hessian(spec, &g))?);
            lift(integrate_measure(&mu, &full, |x| phi.eval(x, 4)))
        };
        for phi in &tests {
            let limit = pairing(&u, phi)?;
            let mut seq = Vec::new();
            for k in 0..=10 {
                let eps = 0.5f64.powi(k);
                let uj = PshSpec::new(2, Expr::sum(vec![u.expr().clone(), Expr::scale(eps, Expr::ModSq(0)), Expr::scale(eps, Expr::ModSq(1))]))
                    .unwrap();
                seq.push(pairing(&uj, phi)?);
            }
            let mono = seq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            check(mono, || format!("pairings not monotone: {seq:?}"))?;
            let gap = (seq.last().unwrap() - limit).abs();
            check(gap <= 0.01 * seq[0].abs().max(limit.abs()) + 1e-12, || format!("final gap {gap} from limit {limit}"))?;
        }
        Ok(())
    })
}

pub fn engine_nonnegativity() -> Outcome {
    run("engine: measure densities are nonnegative", (smooth_psh(), -1.0..1.0f64), |(u, _)| {
        let g = lift(GridDomain::cube(2, -1.0, 1.0, 0.25, vec![]))?;
        let field = lift(complex_hessian(&lift(sample(&u, &g))?))?;
        for mu in [ma_density(&field), mixed_density(&field), lift(wedge_with_current(&field, &CurrentSpec::omega(1)))?] {
            let m = mu.min_density();
            check(m >= -mu.tolerance(), || format!("density {m} below -{}", mu.tolerance()))?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- comparison

fn comparison_grid() -> GridDomain {
    GridDomain::cube(2, -1.2, 1.2, 0.15, vec![Exclusion::outside_ball(1.0)]).unwrap()
}

pub fn comparison_random_holds() -> Outcome {
    let omega = comparison_grid();
    run("comparison: randomized instances hold", any::<u64>(), move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v, _) = lift(sample_pair(&mut rng, &omega))?;
        let r = lift(comparison_check(&u, &v, &CurrentSpec::omega(1), &omega, &ComparisonOptions::default()))?;
        check(r.holds, || format!("u = {u}, v = {v}: slack {} below -{}", r.slack, r.tolerance))
    })
}

pub fn comparison_shift_slack() -> Outcome {
    let omega = comparison_grid();
    run("comparison: lowering v never decreases slack", (any::<u64>(), 0.01..0.5f64), move |(seed, c)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v, _) = lift(sample_pair(&mut rng, &omega))?;
        let lowered = PshSpec::new(2, Expr::sum(vec![v.expr().clone(), Expr::Const(-c)])).unwrap();
        let t = CurrentSpec::omega(1);
        let a = lift(comparison_check(&u, &v, &t, &omega, &ComparisonOptions::default()))?;
        let b = lift(comparison_check(&u, &lowered, &t, &omega, &ComparisonOptions::default()))?;
        check(b.slack >= a.slack - 1e-12 * a.slack.abs(), || {
            format!("u = {u}, v = {v}, c = {c}: slack {} -> {}", a.slack, b.slack)
        })
    })
}

pub fn comparison_shift_region() -> Outcome {
    let omega = comparison_grid();
    run("comparison: lowering v shrinks the region and keeps holds", (any::<u64>(), 0.01..0.5f64), move |(seed, c)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v, _) = lift(sample_pair(&mut rng, &omega))?;
        let lowered = PshSpec::new(2, Expr::sum(vec![v.expr().clone(), Expr::Const(-c)])).unwrap();
        let t = CurrentSpec::omega(1);
        let a = lift(comparison_check(&u, &v, &t, &omega, &ComparisonOptions::default()))?;
        let b = lift(comparison_check(&u, &lowered, &t, &omega, &ComparisonOptions::default()))?;
        check(b.region_nodes <= a.region_nodes && b.holds, || format!("regions {} -> {}", a.region_nodes, b.region_nodes))
    })
}

pub fn comparison_capacity_monotone() -> Outcome {
    let omega = GridDomain::cube(1, -2.2, 2.2, 0.05, vec![Exclusion::outside_ball(2.0)]).unwrap();
    let candidates = default_candidates(1, 2.0, &[0.5, 1.0, 1.5], 0.1).unwrap();
    run("comparison: capacity is monotone in K", (0.05..1.9f64, 0.0..1.0f64), move |(r1, t)| {
        let r2 = r1 + t * (1.95 - r1);
        let k1 = Region::Ball { radius: r1 }.to_mask(&omega);
        let k2 = Region::Ball { radius: r2 }.to_mask(&omega);
        let est = |k: &RegionMask| lift(capacity_estimate(k, &omega, &CurrentSpec::trivial(1), &candidates, &CapacityOptions::default()));
        let (a, b) = (est(&k1)?, est(&k2)?);
        check(a.best <= b.best * (1.0 + 1e-12), || format!("r {r1} -> {r2}: {} > {}", a.best, b.best))
    })
}

pub fn comparison_certificates() -> Outcome {
    let kinds = prop_oneof![Just(0u8), Just(1u8), Just(2u8)];
    run("comparison: certificates on the catalog", (kinds, 0.2..3.0f64, c64(), 1..3usize), |(kind, c, a, stride)| {
        let g = lift(GridDomain::cube(2, -1.0, 1.0, 0.25, vec![]))?;
        let (expr, fixed, want) = match kind {
            0 => (Expr::scale(c, Expr::LogMod(0)), 0, true),
            1 => (Expr::RePart { var: 1, coeff: a * c }, 1, true),
            _ => (Expr::scale(c, Expr::sum(vec![Expr::ModSq(0), Expr::ModSq(1)])), 0, false),
        };
        let u = PshSpec::new(2, expr).unwrap();
        let fam = lift(SliceFamily::lattice(&g, fixed, stride))?;
        let r = lift(maximality_certificate(
            &u,
            &SequenceScheme::MaxCutoff { smoothing: None },
            &fam,
            &g,
            &[1, 2, 3, 4],
            &CertificateOptions::default(),
        ))?;
        check(r.positivity, || "positivity hypothesis failed".into())?;
        check(r.satisfied == want, || format!("{u}: satisfied = {}", r.satisfied))?;
        if !want {
            check(r.leaves.iter().all(|l| l.verdict != Verdict::TendsToZero), || "a leaf tends to zero".into())?;
        }
        Ok(())
    })
}

/// Every suite, in reporting order.
pub fn all() -> Vec<fn() -> Outcome> {
    vec![
        grid_pluriharmonic_hessian,
        grid_mollify_monotone,
        grid_mollify_constants,
        catalog_sequence_monotone,
        catalog_chi_convexity,
        catalog_exp_family_limit,
        catalog_fd_order,
        engine_calibration,
        engine_blocki_identity,
        engine_cauchy_schwarz,
        engine_weak_convergence,
        engine_nonnegativity,
        comparison_random_holds,
        comparison_shift_slack,
        comparison_shift_region,
        comparison_capacity_monotone,
        comparison_certificates,
    ]
}
