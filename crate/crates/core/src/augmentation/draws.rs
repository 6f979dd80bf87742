//! Conditional draws used by one Gibbs sweep.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::graph::{pair_totals, SufficientCounts};
use crate::likelihood::log_escape_weights;
use crate::math::log_sum_exp;
use crate::sbm::{SbmParams, SymMatrix};
use crate::snowball::IgnoredData;

/// Negative-binomial proposals tried before falling back to inversion on
/// the truncated support.
const MAX_CAP_REJECTIONS: u32 = 8;

/// Above this Poisson rate a draw is treated as exceeding any cap.
const POISSON_RATE_LIMIT: f64 = 1e15;

/// Result of one draw of the population size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PopulationDraw {
    pub n: u64,
    /// Proposals rejected for landing above the cap.
    pub cap_rejections: u32,
    /// True when the draw came from inversion on the truncated support.
    pub inverted: bool,
}

/// Unnormalized log posterior of `M = N - n0 - n1`:
/// `ln C(M + n1, n1) + M ln(1 - p)`, for `M = 0..=max_extra`.
pub fn population_log_weights(n1: u64, one_minus_p: f64, max_extra: u64) -> Vec<f64> {
    let log_q = if one_minus_p == 1.0 {
        0.0
    } else {
        one_minus_p.ln()
    };
    let mut w = Vec::with_capacity(max_extra as usize + 1);
    let mut current = 0.0;
    w.push(current);
    for m in 0..max_extra {
        current += ((n1 + m + 1) as f64 / (m + 1) as f64).ln() + log_q;
        w.push(current);
    }
    w
}

fn invert_truncated(n1: u64, one_minus_p: f64, max_extra: u64, rng: &mut impl Rng) -> u64 {
    let w = population_log_weights(n1, one_minus_p, max_extra);
    let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cumulative: Vec<f64> = w
        .iter()
        .scan(0.0, |acc, x| {
            *acc += (x - top).exp();
            Some(*acc)
        })
        .collect();
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(w.len() - 1) as u64
}

/// Draws `N` from `P(N | d) ∝ C(N - n0, n1) (1 - p)^(N - n0 - n1)` on
/// `n0 + n1 ..= cap`.
///
/// The untruncated law of `N - n0 - n1` is negative binomial (`n1 + 1`
/// successes, success probability `p`); it is sampled as a gamma-Poisson
/// mixture and rejected above the cap. After repeated rejections the draw
/// falls back to exact inversion on the truncated support.
///
/// With `p = 0` the posterior is proper only under a cap.
pub fn sample_population_size(
    n0: u64,
    n1: u64,
    one_minus_p: f64,
    cap: Option<u64>,
    rng: &mut impl Rng,
) -> Result<PopulationDraw> {
    let n = n0 + n1;
    let max_extra = match cap {
        Some(c) if c < n => return Err(Error::SupportViolation { n: c, observed: n }),
        Some(c) => Some(c - n),
        None => None,
    };
    let fixed = |extra: u64| PopulationDraw {
        n: n + extra,
        cap_rejections: 0,
        inverted: false,
    };
    if one_minus_p <= 0.0 || max_extra == Some(0) {
        return Ok(fixed(0));
    }
    if one_minus_p >= 1.0 {
        let max_extra = max_extra.ok_or(Error::ImproperPosterior)?;
        return Ok(PopulationDraw {
            n: n + invert_truncated(n1, 1.0, max_extra, rng),
            cap_rejections: 0,
            inverted: true,
        });
    }
    let p = 1.0 - one_minus_p;
    let scale = one_minus_p / p;
    let rate_dist = Gamma::new((n1 + 1) as f64, scale)
        .map_err(|e| Error::InvalidConfig(format!("gamma({}, {scale}): {e}", n1 + 1)))?;
    let mut rejections = 0;
    loop {
        let rate: f64 = rate_dist.sample(rng);
        let extra = if rate <= 0.0 {
            Some(0)
        } else if rate < POISSON_RATE_LIMIT {
            let poisson = Poisson::new(rate)
                .map_err(|e| Error::InvalidConfig(format!("poisson({rate}): {e}")))?;
            Some(poisson.sample(rng) as u64)
        } else if max_extra.is_none() {
            // sd/mean below 1e-7 here; rounding the rate is exact to print precision
            Some(rate.round() as u64)
        } else {
            None
        };
        match (extra, max_extra) {
            (Some(m), None) => return Ok(fixed(m)),
            (Some(m), Some(limit)) if m <= limit => {
                return Ok(PopulationDraw {
                    n: n + m,
                    cap_rejections: rejections,
                    inverted: false,
                })
            }
            _ => rejections += 1,
        }
        if rejections >= MAX_CAP_REJECTIONS {
            let limit = max_extra.expect("rejections only happen under a cap");
            return Ok(PopulationDraw {
                n: n + invert_truncated(n1, one_minus_p, limit, rng),
                cap_rejections: rejections,
                inverted: true,
            });
        }
    }
}

/// Draws `N` for `data` under `params`, escape probability from the
/// strata of the initial sample.
pub fn draw_population_size(
    data: &IgnoredData,
    params: &SbmParams,
    cap: Option<u64>,
    rng: &mut impl Rng,
) -> Result<PopulationDraw> {
    let counts = data.observed_counts();
    let one_minus_p = log_sum_exp(&log_escape_weights(&counts.s0_counts, params)).exp();
    sample_population_size(data.n0() as u64, data.n1() as u64, one_minus_p, cap, rng)
}

/// Stratum probabilities for a unit outside the final sample:
/// `lambda_k prod_{j in S0}(1 - beta[c_j][k])`, normalized.
pub fn unsampled_stratum_probabilities(s0_counts: &[u64], params: &SbmParams) -> Result<Vec<f64>> {
    let w = log_escape_weights(s0_counts, params);
    let total = log_sum_exp(&w);
    if total == f64::NEG_INFINITY {
        return Err(Error::ZeroEscapeWeight);
    }
    Ok(w.iter().map(|x| (x - total).exp()).collect())
}

/// One multinomial draw of `trials` units over `probs`, by sequential
/// conditional binomials.
pub fn multinomial(trials: u64, probs: &[f64], rng: &mut impl Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = trials;
    let mut mass_left: f64 = probs.iter().sum();
    for (k, &pk) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() || mass_left <= pk {
            counts[k] = remaining;
            break;
        }
        let ratio = (pk / mass_left).clamp(0.0, 1.0);
        let draw = binomial(remaining, ratio, rng);
        counts[k] = draw;
        remaining -= draw;
        mass_left -= pk;
    }
    counts
}

pub(crate) fn binomial(trials: u64, p: f64, rng: &mut impl Rng) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("probability checked to lie in (0, 1)")
        .sample(rng)
}

/// Strata of the `n - n0 - n1` units outside the sample, as counts.
pub fn impute_strata_counts(
    s0_counts: &[u64],
    unsampled: u64,
    params: &SbmParams,
    rng: &mut impl Rng,
) -> Result<Vec<u64>> {
    if unsampled == 0 {
        return Ok(vec![0; params.strata()]);
    }
    let probs = unsampled_stratum_probabilities(s0_counts, params)?;
    Ok(multinomial(unsampled, &probs, rng))
}

/// Imputes strata for the unsampled units of a population of size `n`.
pub fn impute_strata(
    data: &IgnoredData,
    n: u64,
    params: &SbmParams,
    rng: &mut impl Rng,
) -> Result<Vec<u64>> {
    let observed = data.sample_size() as u64;
    if n < observed {
        return Err(Error::SupportViolation { n, observed });
    }
    let counts = data.observed_counts();
    impute_strata_counts(&counts.s0_counts, n - observed, params, rng)
}

/// Link counts among the units not in `S0` (first wave and unsampled),
/// given their per-stratum sizes. Pairs touching `S0` are fully observed.
pub fn impute_link_counts(
    outside_s0_counts: &[u64],
    params: &SbmParams,
    rng: &mut impl Rng,
) -> SymMatrix<u64> {
    let totals = pair_totals(outside_s0_counts);
    SymMatrix::from_fn(outside_s0_counts.len(), |k, l| {
        binomial(totals.get(k, l), params.beta_at(k, l), rng)
    })
}

/// Dirichlet parameters `N_k + alpha_k`.
pub fn lambda_posterior_params(strata_counts: &[u64], alpha: &[f64]) -> Vec<f64> {
    strata_counts
        .iter()
        .zip(alpha)
        .map(|(&n, &a)| n as f64 + a)
        .collect()
}

/// Beta parameters `(M + gamma_1, T - M + gamma_2)` per stratum pair.
pub fn beta_posterior_params(
    counts: &SufficientCounts,
    gamma: (f64, f64),
) -> SymMatrix<(f64, f64)> {
    SymMatrix::from_fn(counts.strata_counts.len(), |k, l| {
        let m = counts.link_counts.get(k, l);
        let t = counts.pair_totals.get(k, l);
        (m as f64 + gamma.0, (t - m) as f64 + gamma.1)
    })
}

/// `lambda ~ Dirichlet(N + alpha)` via normalized gamma draws.
pub fn draw_lambda(strata_counts: &[u64], alpha: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    if strata_counts.len() == 1 {
        return vec![1.0];
    }
    let shapes = lambda_posterior_params(strata_counts, alpha);
    loop {
        let draws: Vec<f64> = shapes
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
            .collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.into_iter().map(|x| x / total).collect();
        }
    }
}

/// `beta_kl ~ Beta(M_kl + gamma_1, T_kl - M_kl + gamma_2)` independently.
pub fn draw_beta(
    counts: &SufficientCounts,
    gamma: (f64, f64),
    rng: &mut impl Rng,
) -> SymMatrix<f64> {
    beta_posterior_params(counts, gamma)
        .map(|(a, b)| Beta::new(a, b).expect("positive shapes").sample(rng))
}
