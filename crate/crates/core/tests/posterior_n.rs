//! Population-size draws against a directly enumerated posterior.

use snowball_core::augmentation::sample_population_size;
use snowball_core::rng::rng_from_seed;
use statrs::function::gamma::ln_gamma;

fn ln_binom(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `P(N) ∝ C(N - n0, n1) (1 - p)^(N - n0 - n1)` on `n0 + n1 ..= cap`.
fn enumerate(n0: u64, n1: u64, q: f64, cap: u64) -> Vec<f64> {
    let logw: Vec<f64> = (n0 + n1..=cap)
        .map(|n| ln_binom(n - n0, n1) + (n - n0 - n1) as f64 * q.ln())
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn empirical(n0: u64, n1: u64, q: f64, cap: u64, draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut hist = vec![0u64; (cap - n0 - n1 + 1) as usize];
    for _ in 0..draws {
        let d = sample_population_size(n0, n1, q, Some(cap), &mut rng).unwrap();
        hist[(d.n - n0 - n1) as usize] += 1;
    }
    hist.into_iter().map(|c| c as f64 / draws as f64).collect()
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[test]
fn small_sample_matches_enumeration() {
    let (n0, n1, q, cap) = (5, 3, 0.4, 200);
    let exact = enumerate(n0, n1, q, cap);
    let got = empirical(n0, n1, q, cap, 200_000, 11);
    let tv = total_variation(&exact, &got);
    assert!(tv < 0.01, "TV {tv}");
}

#[test]
fn heavy_truncation_matches_enumeration() {
    // Cap far inside the bulk: most proposals exceed it.
    let (n0, n1, q, cap) = (10, 20, 0.8, 60);
    let exact = enumerate(n0, n1, q, cap);
    let got = empirical(n0, n1, q, cap, 100_000, 12);
    let tv = total_variation(&exact, &got);
    assert!(tv < 0.01, "TV {tv}");
}

#[test]
fn mean_matches_negative_binomial_identity() {
    let (n0, n1, q) = (50u64, 30u64, 0.5);
    let expected = (n0 + n1) as f64 + (n1 + 1) as f64 * q / (1.0 - q);
    let cap = 100 * (n0 + n1);
    let tail: f64 = enumerate(n0, n1, q, cap + 200)[(cap - n0 - n1 + 1) as usize..]
        .iter()
        .sum();
    assert!(tail < 1e-6);
    let mut rng = rng_from_seed(13);
    let draws = 200_000;
    let mean = (0..draws)
        .map(|_| {
            sample_population_size(n0, n1, q, Some(cap), &mut rng)
                .unwrap()
                .n as f64
        })
        .sum::<f64>()
        / draws as f64;
    assert!(
        (mean - expected).abs() < 0.01 * expected,
        "{mean} vs {expected}"
    );
}

#[test]
fn enumerated_mean_agrees_with_identity() {
    let (n0, n1, q) = (7u64, 4u64, 0.3);
    let cap = 400;
    let pmf = enumerate(n0, n1, q, cap);
    let mean: f64 = pmf
        .iter()
        .enumerate()
        .map(|(i, w)| (n0 + n1 + i as u64) as f64 * w)
        .sum();
    let expected = (n0 + n1) as f64 + (n1 + 1) as f64 * q / (1.0 - q);
    assert!((mean - expected).abs() < 1e-9, "{mean} vs {expected}");
}
