//! Adaptive Gauss–Kronrod quadrature in one and two dimensions.
//!
//! The 1-D driver is the classic global-adaptive G10/K21 scheme: the panel
//! with the largest error estimate is bisected until the summed estimate
//! meets the tolerance. Panel selection is deterministic (ties broken by
//! position), so repeated runs produce identical bits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use serde::{Deserialize, Serialize};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_223_048,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_panels: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error / self.value.abs()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_k = fc.abs() * WGK[10];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        abs_k += w * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    let res_abs = abs_k * half.abs();
    // QUADPACK's sharpening of the raw |K - G| estimate.
    if error > 0.0 && res_abs > 0.0 {
        let ratio = (200.0 * error / res_abs).powf(1.5);
        if ratio < 1.0 {
            error = res_abs * ratio;
        }
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    integrate_with_breaks(&mut f, &[a, b], opts)
}

/// Integrate over the consecutive intervals of `points` (sorted ascending),
/// treating each point as a known discontinuity or kink.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    f: &mut F,
    points: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(f, w[0], w[1]));
            evaluations += 21;
        }
    }
    if heap.is_empty() {
        return QuadResult { value: 0.0, error: 0.0, evaluations: 0, converged: true };
    }
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target || heap.len() >= opts.max_panels {
            return QuadResult { value: ordered_total(&heap), error: err, evaluations, converged: err <= target };
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point.
            heap.push(Panel { error: 0.0, ..worst });
            let err: f64 = heap.iter().map(|p| p.error).sum();
            if err <= target {
                return QuadResult { value: ordered_total(&heap), error: err, evaluations, converged: true };
            }
            continue;
        }
        heap.push(gk21(f, worst.a, mid));
        heap.push(gk21(f, mid, worst.b));
        evaluations += 42;
    }
}

fn ordered_total(heap: &BinaryHeap<Panel>) -> f64 {
    let mut panels: Vec<Panel> = heap.iter().copied().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels.iter().map(|p| p.value).sum()
}

/// Locate the points in `(lo, hi)` where the piecewise-constant `label`
/// changes value. The interval is scanned at `samples` uniform points and
/// each change is refined by bisection to `rel_tol · (hi − lo)`.
pub fn find_breakpoints<L, T>(label: L, lo: f64, hi: f64, samples: usize) -> Vec<f64>
where
    L: Fn(f64) -> T,
    T: PartialEq,
{
    let samples = samples.max(2);
    let step = (hi - lo) / samples as f64;
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev = label(lo);
    for i in 1..=samples {
        let x = if i == samples { hi } else { lo + step * i as f64 };
        let cur = label(x);
        if cur != prev {
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if !(m > a && m < b) {
                    break;
                }
                if label(m) == prev {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = cur;
        prev_x = x;
    }
    out
}

/// Nested 2-D integration of `f(x, y)` over `x ∈ [a, b]`,
/// `y ∈ [lo(x), hi(x)]`. `inner_breaks(x)` may return interior breakpoints
/// of the inner integrand.
pub fn integrate_2d<F, Lo, Hi, B>(
    f: F,
    a: f64,
    b: f64,
    lo: Lo,
    hi: Hi,
    inner_breaks: B,
    opts: &QuadOptions,
) -> QuadResult
where
    F: Fn(f64, f64) -> f64,
    Lo: Fn(f64) -> f64,
    Hi: Fn(f64) -> f64,
    B: Fn(f64) -> Vec<f64>,
{
    let inner_opts = QuadOptions { rel_tol: opts.rel_tol * 0.1, abs_tol: opts.abs_tol * 0.1, ..*opts };
    let mut inner_err_sum = 0.0;
    let mut inner_samples = 0usize;
    let mut evals = 0usize;
    let mut all_converged = true;
    let outer = integrate(
        |x| {
            let (y0, y1) = (lo(x), hi(x));
            if !(y1 > y0) {
                return 0.0;
            }
            let mut pts = vec![y0];
            let mut br: Vec<f64> = inner_breaks(x).into_iter().filter(|&y| y > y0 && y < y1).collect();
            br.sort_by(f64::total_cmp);
            pts.extend(br);
            pts.push(y1);
            let r = integrate_with_breaks(&mut |y| f(x, y), &pts, &inner_opts);
            inner_err_sum += r.error;
            inner_samples += 1;
            evals += r.evaluations;
            all_converged &= r.converged;
            r.value
        },
        a,
        b,
        opts,
    );
    let mean_inner = if inner_samples > 0 { inner_err_sum / inner_samples as f64 } else { 0.0 };
    QuadResult {
        value: outer.value,
        error: outer.error + mean_inner * (b - a).abs(),
        evaluations: evals,
        converged: outer.converged && all_converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn high_degree_polynomial() {
        let r = integrate(|x| x.powi(30), -1.0, 1.0, &QuadOptions::default());
        assert_relative_eq!(r.value, 2.0 / 31.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_weights_integrate_polynomials() {
        // The embedded 10-point Gauss rule is exact to degree 19.
        let half = 1.0;
        let mut g = 0.0;
        for i in 0..5 {
            let x = XGK[2 * i + 1];
            g += WG[i] * (x.powi(18) + x.powi(18));
        }
        assert_relative_eq!(g * half, 2.0 / 19.0, max_relative = 1e-13);
        let wsum: f64 = WGK[..10].iter().sum::<f64>() * 2.0 + WGK[10];
        assert_relative_eq!(wsum, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adapts_to_endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &QuadOptions::default());
        assert!(r.converged);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn breakpoints_handle_steps() {
        let pts = find_breakpoints(|x: f64| x > 0.3, 0.0, 1.0, 64);
        assert_eq!(pts.len(), 1);
        assert!((pts[0] - 0.3).abs() < 1e-12);
        let r = integrate_with_breaks(&mut |x| if x > 0.3 { 1.0 } else { 0.0 }, &[0.0, pts[0], 1.0], &QuadOptions::default());
        assert_relative_eq!(r.value, 0.7, max_relative = 1e-10);
    }

    #[test]
    fn disc_area_in_polar_coordinates() {
        let r = integrate_2d(|rho, _t| rho, 0.0, 1.0, |_| 0.0, |_| 2.0 * PI, |_| vec![], &QuadOptions::default());
        assert_relative_eq!(r.value, PI, max_relative = 1e-12);
    }
}
