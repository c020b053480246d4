//! Deterministic pairwise summation.
//!
//! Splits are fixed by index, never by thread scheduling, so the result is
//! bit-identical for any rayon pool size.

const BLOCK: usize = 128;
const PAR_THRESHOLD: usize = 1 << 15;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    let (lo, hi) = xs.split_at(mid);
    if xs.len() >= PAR_THRESHOLD {
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        a + b
    } else {
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Pairwise sum of `f(i)` for `i in 0..n` without materializing the terms.
pub fn pairwise_sum_by<F>(n: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    fn go<F: Fn(usize) -> f64 + Sync>(lo: usize, hi: usize, f: &F) -> f64 {
        let len = hi - lo;
        if len <= BLOCK {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + len / 2;
        if len >= PAR_THRESHOLD {
            let (a, b) = rayon::join(|| go(lo, mid, f), || go(mid, hi, f));
            a + b
        } else {
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4950.0);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let xs: Vec<f64> = (0..200_000).map(|i| ((i as f64) * 0.37).sin() * 1e-3).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| pairwise_sum(&xs));
        let b = four.install(|| pairwise_sum(&xs));
        assert_eq!(a.to_bits(), b.to_bits());
        let c = four.install(|| pairwise_sum_by(xs.len(), &|i| xs[i]));
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn compensates_better_than_left_fold() {
        let xs = vec![0.1f64; 1_000_000];
        let exact = 100_000.0;
        assert!((pairwise_sum(&xs) - exact).abs() < 1e-8);
    }
}
