//! Data-augmentation Gibbs sampler for the population size and the block
//! model parameters.
//!
//! Each sweep draws, in order: `N` given the label-free data and current
//! `(lambda, beta)`; strata of the unsampled units; link counts among the
//! units outside `S0`; `lambda` from its Dirichlet posterior; `beta` from its
//! Beta posteriors. Unsampled strata and imputed links are kept as counts
//! since the parameter posteriors depend on nothing else.

pub mod draws;
mod trace;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SufficientCounts;
use crate::likelihood::log_escape_weights;
use crate::math::log_sum_exp;
use crate::rng::rng_from_seed;
use crate::sbm::{SbmParams, SymMatrix};
use crate::snowball::{IgnoredData, ObservedCounts};

pub use draws::{
    beta_posterior_params, draw_beta, draw_lambda, draw_population_size, impute_link_counts,
    impute_strata, impute_strata_counts, lambda_posterior_params, multinomial,
    population_log_weights, sample_population_size, unsampled_stratum_probabilities,
    PopulationDraw,
};
pub use trace::{BayesEstimates, ChainDiagnostics, ChainSummary, ChainTrace, TraceRow};

/// Default truncation of the population-size posterior, as a multiple of
/// the final sample size.
pub const DEFAULT_CAP_MULTIPLIER: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub chain_length: usize,
    pub burn_in_fraction: f64,
    /// Absolute upper bound on `N`; overrides `cap_multiplier` when set.
    pub n_max_cap: Option<u64>,
    /// Upper bound on `N` as a multiple of `n0 + n1`.
    pub cap_multiplier: f64,
    /// Dirichlet prior on `lambda`; empty means all ones.
    pub prior_alpha: Vec<f64>,
    /// Beta prior on every `beta_kl`.
    pub prior_gamma: (f64, f64),
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chain_length: 1000,
            burn_in_fraction: 0.1,
            n_max_cap: None,
            cap_multiplier: DEFAULT_CAP_MULTIPLIER,
            prior_alpha: Vec::new(),
            prior_gamma: (1.0, 1.0),
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chain_length == 0 {
            return Err(Error::InvalidConfig(
                "chain length must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::InvalidConfig(format!(
                "burn-in fraction {} outside [0, 1)",
                self.burn_in_fraction
            )));
        }
        if !(self.cap_multiplier >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cap multiplier {} below 1",
                self.cap_multiplier
            )));
        }
        if self.prior_alpha.iter().any(|&a| !(a > 0.0))
            || !(self.prior_gamma.0 > 0.0 && self.prior_gamma.1 > 0.0)
        {
            return Err(Error::InvalidConfig(
                "prior parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of leading iterations discarded.
    pub fn burn_in(&self) -> usize {
        (self.burn_in_fraction * self.chain_length as f64).floor() as usize
    }

    /// The cap on `N` for a sample of final size `sample_size`.
    pub fn cap_for(&self, sample_size: u64) -> Result<u64> {
        let cap = match self.n_max_cap {
            Some(c) => c,
            None => (self.cap_multiplier * sample_size as f64).ceil() as u64,
        };
        if cap < sample_size {
            return Err(Error::InvalidConfig(format!(
                "cap {cap} below the final sample size {sample_size}"
            )));
        }
        Ok(cap)
    }

    fn alpha_for(&self, strata: usize) -> Result<Vec<f64>> {
        if self.prior_alpha.is_empty() {
            return Ok(vec![1.0; strata]);
        }
        if self.prior_alpha.len() != strata {
            return Err(Error::InvalidConfig(format!(
                "prior_alpha has {} entries for G={strata}",
                self.prior_alpha.len()
            )));
        }
        Ok(self.prior_alpha.clone())
    }
}

/// One state of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub n: u64,
    /// Per-stratum counts of the `N - n0 - n1` units outside the sample.
    pub strata_unsampled: Vec<u64>,
    /// Imputed link counts among the units outside `S0`.
    pub imputed_link_counts: SymMatrix<u64>,
    pub params: SbmParams,
}

/// A chain bound to one data set, with everything that does not change
/// across sweeps precomputed.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    data: &'a IgnoredData,
    observed: ObservedCounts,
    cap: u64,
    alpha: Vec<f64>,
    gamma: (f64, f64),
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub cap_rejections: u32,
    pub inverted: bool,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(data: &'a IgnoredData, cfg: &McmcConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            data,
            observed: data.observed_counts(),
            cap: cfg.cap_for(data.sample_size() as u64)?,
            alpha: cfg.alpha_for(data.strata_count())?,
            gamma: cfg.prior_gamma,
        })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn observed(&self) -> &ObservedCounts {
        &self.observed
    }

    /// Starting state: `lambda` from smoothed sample proportions, `beta`
    /// from smoothed observed link fractions, `N = 2 (n0 + n1)` (within the
    /// cap), and missing strata and links imputed under those values.
    pub fn initial_state(&self, rng: &mut impl Rng) -> Result<AugmentedState> {
        let g = self.data.strata_count();
        let n = self.data.sample_size() as u64;
        let lambda: Vec<f64> = (0..g)
            .map(|k| {
                (self.observed.s0_counts[k] + self.observed.s1_counts[k] + 1) as f64
                    / (n + g as u64) as f64
            })
            .collect();
        let beta = SymMatrix::from_fn(g, |k, l| {
            (self.observed.link_counts.get(k, l) + 1) as f64
                / (self.observed.pair_totals.get(k, l) + 2) as f64
        });
        let params = SbmParams::new(normalize(lambda), beta)?;
        let n_start = (2 * n).min(self.cap);
        self.impute_given(n_start, params, rng)
    }

    fn impute_given(
        &self,
        n: u64,
        params: SbmParams,
        rng: &mut impl Rng,
    ) -> Result<AugmentedState> {
        let unsampled = n - self.data.sample_size() as u64;
        let strata_unsampled =
            draws::impute_strata_counts(&self.observed.s0_counts, unsampled, &params, rng)?;
        let outside = self.outside_s0(&strata_unsampled);
        let imputed_link_counts = draws::impute_link_counts(&outside, &params, rng);
        Ok(AugmentedState {
            n,
            strata_unsampled,
            imputed_link_counts,
            params,
        })
    }

    fn outside_s0(&self, strata_unsampled: &[u64]) -> Vec<u64> {
        self.observed
            .s1_counts
            .iter()
            .zip(strata_unsampled)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Counts of the completed population implied by `state`.
    pub fn completed_counts(&self, state: &AugmentedState) -> SufficientCounts {
        let strata: Vec<u64> = self
            .outside_s0(&state.strata_unsampled)
            .iter()
            .zip(&self.observed.s0_counts)
            .map(|(a, b)| a + b)
            .collect();
        let links = SymMatrix::from_fn(strata.len(), |k, l| {
            self.observed.link_counts.get(k, l) + state.imputed_link_counts.get(k, l)
        });
        SufficientCounts::from_parts(strata, links)
    }

    /// One full sweep starting from `state`.
    pub fn sweep(
        &self,
        state: &AugmentedState,
        rng: &mut impl Rng,
    ) -> Result<(AugmentedState, SweepStats)> {
        let weights = log_escape_weights(&self.observed.s0_counts, &state.params);
        let one_minus_p = log_sum_exp(&weights).exp().clamp(0.0, 1.0);
        let draw = draws::sample_population_size(
            self.data.n0() as u64,
            self.data.n1() as u64,
            one_minus_p,
            Some(self.cap),
            rng,
        )?;
        let imputed = self.impute_given(draw.n, state.params.clone(), rng)?;
        let counts = self.completed_counts(&imputed);
        let lambda = draws::draw_lambda(&counts.strata_counts, &self.alpha, rng);
        let beta = draws::draw_beta(&counts, self.gamma, rng);
        let params = SbmParams::new(lambda, beta)?;
        Ok((
            AugmentedState { params, ..imputed },
            SweepStats {
                cap_rejections: draw.cap_rejections,
                inverted: draw.inverted,
            },
        ))
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// One sweep from `state`.
pub fn gibbs_sweep(
    state: &AugmentedState,
    data: &IgnoredData,
    cfg: &McmcConfig,
    rng: &mut impl Rng,
) -> Result<AugmentedState> {
    Ok(GibbsSampler::new(data, cfg)?.sweep(state, rng)?.0)
}

/// Runs a full chain and summarizes it. Deterministic given `cfg.seed`.
pub fn run_chain(data: &IgnoredData, cfg: &McmcConfig) -> Result<ChainTrace> {
    let sampler = GibbsSampler::new(data, cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut state = sampler.initial_state(&mut rng)?;
    let mut rows = Vec::with_capacity(cfg.chain_length);
    let mut diagnostics = ChainDiagnostics {
        cap: sampler.cap(),
        ..ChainDiagnostics::default()
    };
    for iter in 1..=cfg.chain_length {
        let (next, stats) = sampler.sweep(&state, &mut rng)?;
        diagnostics.record(&stats);
        rows.push(TraceRow::from_state(iter, &next));
        state = next;
    }
    log::debug!(
        "chain done: {} sweeps, {} cap hits",
        cfg.chain_length,
        diagnostics.cap_hits
    );
    Ok(ChainTrace::new(
        data.strata_count(),
        rows,
        cfg.burn_in(),
        diagnostics,
        cfg.seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_population;
    use crate::snowball::{
        draw_initial, to_ignored_data, trace_one_wave, DesignConfig, InitialDesign,
    };

    fn synthetic(seed: u64, n: usize, n0: usize) -> IgnoredData {
        let p = SbmParams::from_upper(vec![0.4, 0.6], vec![0.05, 0.02, 0.04]).unwrap();
        let g = generate_population(&p, n, seed).unwrap();
        let s0 = draw_initial(
            &g,
            &DesignConfig {
                initial: InitialDesign::FixedSize { n0 },
                seed,
            },
        )
        .unwrap();
        to_ignored_data(&trace_one_wave(&g, &s0).unwrap()).unwrap()
    }

    fn cfg(chain_length: usize, burn_in_fraction: f64, seed: u64) -> McmcConfig {
        McmcConfig {
            chain_length,
            burn_in_fraction,
            seed,
            ..McmcConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0, 0.1, 1).validate().is_err());
        assert!(cfg(10, 1.0, 1).validate().is_err());
        assert!(McmcConfig {
            cap_multiplier: 0.5,
            ..cfg(10, 0.1, 1)
        }
        .validate()
        .is_err());
        assert!(McmcConfig {
            prior_gamma: (0.0, 1.0),
            ..cfg(10, 0.1, 1)
        }
        .validate()
        .is_err());
        let c = McmcConfig {
            n_max_cap: Some(5),
            ..cfg(10, 0.1, 1)
        };
        assert!(c.cap_for(6).is_err());
        assert_eq!(c.cap_for(5).unwrap(), 5);
        assert_eq!(cfg(10, 0.1, 1).cap_for(30).unwrap(), 3000);
        assert_eq!(cfg(1000, 0.1, 1).burn_in(), 100);
    }

    #[test]
    fn sweeps_preserve_state_invariants() {
        let data = synthetic(3, 150, 25);
        let c = cfg(50, 0.1, 9);
        let sampler = GibbsSampler::new(&data, &c).unwrap();
        let mut rng = rng_from_seed(1);
        let mut state = sampler.initial_state(&mut rng).unwrap();
        let n = data.sample_size() as u64;
        for _ in 0..200 {
            state = sampler.sweep(&state, &mut rng).unwrap().0;
            assert!(state.n >= n && state.n <= sampler.cap());
            assert_eq!(state.strata_unsampled.iter().sum::<u64>(), state.n - n);
            let counts = sampler.completed_counts(&state);
            assert_eq!(counts.population(), state.n);
            for (k, l, m) in counts.link_counts.iter_upper() {
                assert!(m <= counts.pair_totals.get(k, l));
            }
            state.params.validate().unwrap();
        }
    }

    #[test]
    fn no_links_with_tight_cap_is_a_fixed_point() {
        let data = IgnoredData::new(2, vec![0, 1, 1], vec![], vec![]).unwrap();
        let c = McmcConfig {
            n_max_cap: Some(3),
            ..cfg(20, 0.0, 4)
        };
        let sampler = GibbsSampler::new(&data, &c).unwrap();
        let mut rng = rng_from_seed(4);
        let zero_beta = SbmParams::from_upper(vec![0.5, 0.5], vec![0.0, 0.0, 0.0]).unwrap();
        let mut state = AugmentedState {
            n: 3,
            strata_unsampled: vec![0, 0],
            imputed_link_counts: SymMatrix::filled(2, 0),
            params: zero_beta.clone(),
        };
        for _ in 0..20 {
            state = sampler.sweep(&state, &mut rng).unwrap().0;
            assert_eq!(state.n, 3);
            state.params = zero_beta.clone();
        }
    }

    #[test]
    fn sweep_is_deterministic_given_seed() {
        let data = synthetic(5, 120, 20);
        let c = cfg(10, 0.1, 5);
        let sampler = GibbsSampler::new(&data, &c).unwrap();
        let start = sampler.initial_state(&mut rng_from_seed(0)).unwrap();
        let a = gibbs_sweep(&start, &data, &c, &mut rng_from_seed(77)).unwrap();
        let b = gibbs_sweep(&start, &data, &c, &mut rng_from_seed(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_iteration_chain() {
        let data = synthetic(6, 100, 15);
        let trace = run_chain(&data, &cfg(1, 0.0, 3)).unwrap();
        assert_eq!(trace.rows().len(), 1);
        let row = &trace.rows()[0];
        let est = trace.estimates();
        assert_eq!(est.n_mean, row.n as f64);
        assert_eq!(est.lambda_mean, row.lambda);
        assert_eq!(est.beta_mean, row.beta);
    }

    #[test]
    fn chain_is_reproducible() {
        let data = synthetic(8, 100, 15);
        let a = run_chain(&data, &cfg(60, 0.1, 12)).unwrap();
        let b = run_chain(&data, &cfg(60, 0.1, 12)).unwrap();
        assert_eq!(a, b);
        let c = run_chain(&data, &cfg(60, 0.1, 13)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fully_observed_population_reduces_to_conjugate_posteriors() {
        // every unit in S0, so there is nothing to impute
        let data =
            IgnoredData::new(2, vec![0, 0, 1, 1, 1], vec![], vec![(0, 1), (1, 2), (3, 4)]).unwrap();
        let c = McmcConfig {
            n_max_cap: Some(5),
            ..cfg(1, 0.0, 1)
        };
        let sampler = GibbsSampler::new(&data, &c).unwrap();
        let mut rng = rng_from_seed(2);
        let state = sampler.initial_state(&mut rng).unwrap();
        let (next, _) = sampler.sweep(&state, &mut rng).unwrap();
        assert_eq!(next.n, 5);
        let counts = sampler.completed_counts(&next);
        assert_eq!(counts.strata_counts, vec![2, 3]);
        assert_eq!(counts.link_counts.upper(), &[1, 1, 1]);
        assert_eq!(counts.pair_totals.upper(), &[1, 6, 3]);
        assert_eq!(
            lambda_posterior_params(&counts.strata_counts, &[1.0, 1.0]),
            vec![3.0, 4.0]
        );
        assert_eq!(
            beta_posterior_params(&counts, (1.0, 1.0)).upper(),
            &[(2.0, 1.0), (2.0, 6.0), (2.0, 3.0)]
        );
    }
}
