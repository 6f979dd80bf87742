//! Observed and label-ignoring likelihoods of a one-wave snowball sample,
//! and the probabilities that drive them. Everything is on the log scale.

use crate::error::{Error, Result};
use crate::math::{count_ln, count_ln_1m, ln_choose, log_sum_exp};
use crate::sbm::SbmParams;
use crate::snowball::{IgnoredData, ObservedCounts};

/// Chance that a unit outside `S0` has no link to any member of `S0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeProbability {
    pub one_minus_p: f64,
}

impl EscapeProbability {
    /// Probability of at least one link into `S0`.
    pub fn p(&self) -> f64 {
        1.0 - self.one_minus_p
    }
}

/// `ln(lambda_k) + sum_{i in S0} ln(1 - beta[c_i][k])` for every stratum `k`,
/// from the per-stratum sizes of `S0`.
pub fn log_escape_weights(s0_counts: &[u64], params: &SbmParams) -> Vec<f64> {
    let g = params.strata();
    (0..g)
        .map(|k| {
            let lambda = params.lambda()[k];
            if lambda == 0.0 {
                return f64::NEG_INFINITY;
            }
            lambda.ln()
                + s0_counts
                    .iter()
                    .enumerate()
                    .map(|(l, &n)| count_ln_1m(n as f64, params.beta_at(l, k)))
                    .sum::<f64>()
        })
        .collect()
}

fn tally(strata: &[u16], g: usize) -> Vec<u64> {
    let mut counts = vec![0u64; g];
    for &c in strata {
        counts[usize::from(c)] += 1;
    }
    counts
}

/// `1 - p = sum_k lambda_k prod_{i in S0} (1 - beta[c_i][k])` for 0-based
/// strata of the initial sample.
pub fn escape_probability(strata_s0: &[u16], params: &SbmParams) -> EscapeProbability {
    escape_probability_from_counts(&tally(strata_s0, params.strata()), params)
}

pub fn escape_probability_from_counts(s0_counts: &[u64], params: &SbmParams) -> EscapeProbability {
    let one_minus_p = log_sum_exp(&log_escape_weights(s0_counts, params)).exp();
    EscapeProbability {
        one_minus_p: one_minus_p.clamp(0.0, 1.0),
    }
}

/// `p' = sum_k lambda_k (1 - prod_l (1 - beta[k][l])^{n0_l})`: the chance a
/// unit outside `S0` joins the first wave, so `n1 | S0 ~ Binomial(N - n0, p')`.
pub fn wave_inclusion_probability(s0_counts: &[u64], params: &SbmParams) -> f64 {
    (0..params.strata())
        .map(|k| {
            let log_miss: f64 = s0_counts
                .iter()
                .enumerate()
                .map(|(l, &n)| count_ln_1m(n as f64, params.beta_at(k, l)))
                .sum();
            params.lambda()[k] * -log_miss.exp_m1()
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Strata of `S`, links within `S0`, and links between `S0` and `S1`: the
/// factors the observed and ignored likelihoods share.
pub fn sample_log_terms(counts: &ObservedCounts, params: &SbmParams) -> f64 {
    let strata: f64 = counts
        .s0_counts
        .iter()
        .zip(&counts.s1_counts)
        .zip(params.lambda())
        .map(|((&a, &b), &l)| count_ln((a + b) as f64, l))
        .sum();
    let links: f64 = counts
        .link_counts
        .iter_upper()
        .map(|(k, l, m)| {
            let b = params.beta_at(k, l);
            let absent = counts.pair_totals.get(k, l) - m;
            count_ln(m as f64, b) + count_ln_1m(absent as f64, b)
        })
        .sum();
    strata + links
}

fn check(data: &IgnoredData, n: u64, params: &SbmParams) -> Result<()> {
    if params.strata() != data.strata_count() {
        return Err(Error::InvalidParams(format!(
            "params have G={} but the sample has G={}",
            params.strata(),
            data.strata_count()
        )));
    }
    let observed = data.sample_size() as u64;
    if n < observed {
        return Err(Error::SupportViolation { n, observed });
    }
    Ok(())
}

fn unsampled_term(data: &IgnoredData, counts: &ObservedCounts, n: u64, params: &SbmParams) -> f64 {
    let escape = escape_probability_from_counts(&counts.s0_counts, params);
    count_ln((n - data.sample_size() as u64) as f64, escape.one_minus_p)
}

/// Log of the observed likelihood given `|S0|`: the design term
/// `-ln C(N, n0)`, the shared sample terms, and `(N - n) ln(1 - p)`.
pub fn observed_log_likelihood(data: &IgnoredData, n: u64, params: &SbmParams) -> Result<f64> {
    check(data, n, params)?;
    let counts = data.observed_counts();
    Ok(-ln_choose(n, data.n0() as u64)
        + sample_log_terms(&counts, params)
        + unsampled_term(data, &counts, n, params))
}

/// Log of the likelihood with unit labels ignored: `ln C(N - n0, n1)`, the
/// shared sample terms, and `(N - n) ln(1 - p)`.
pub fn ignored_log_likelihood(data: &IgnoredData, n: u64, params: &SbmParams) -> Result<f64> {
    check(data, n, params)?;
    let counts = data.observed_counts();
    Ok(ln_choose(n - data.n0() as u64, data.n1() as u64)
        + sample_log_terms(&counts, params)
        + unsampled_term(data, &counts, n, params))
}

/// One row of a likelihood profile over `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub n: u64,
    pub observed: f64,
    pub ignored: f64,
}

/// Both log-likelihoods at each `N` in `grid`. Every grid point must be at
/// least the final sample size.
pub fn likelihood_profile(
    data: &IgnoredData,
    params: &SbmParams,
    grid: impl IntoIterator<Item = u64>,
) -> Result<Vec<ProfileRow>> {
    grid.into_iter()
        .map(|n| {
            Ok(ProfileRow {
                n,
                observed: observed_log_likelihood(data, n, params)?,
                ignored: ignored_log_likelihood(data, n, params)?,
            })
        })
        .collect()
}
