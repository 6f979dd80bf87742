//! Log-space helpers shared by the likelihoods and the sampler.

use statrs::function::gamma::ln_gamma;

/// `ln C(n, k)`, or `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `count * ln(p)` with `0 * ln 0 = 0`.
pub fn count_ln(count: f64, p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * p.ln()
    }
}

/// `count * ln(1 - p)` with `0 * ln 0 = 0`, accurate for small `p`.
pub fn count_ln_1m(count: f64, p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * (-p).ln_1p()
    }
}

/// Pairs among `n` items, `C(n, 2)`.
pub fn pairs_within(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// `ln(sum(exp(xs)))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
