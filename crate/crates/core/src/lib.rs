//! Size and structure estimation for hidden networked populations from a
//! one-wave snowball sample under a stochastic block model.
//!
//! The pipeline is: [`graph::generate_population`] (or load a graph with
//! [`io`]), [`snowball::draw_initial`] and [`snowball::trace_one_wave`],
//! [`snowball::to_ignored_data`], then [`augmentation::run_chain`] for
//! Bayes estimates of `N`, `lambda` and `beta`. [`harness`] repeats that
//! over many samples of one population.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augmentation;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod likelihood;
pub mod math;
pub mod rng;
pub mod sbm;
pub mod snowball;

pub use augmentation::{run_chain, AugmentedState, ChainTrace, McmcConfig};
pub use error::{Error, Result};
pub use graph::{
    full_log_likelihood, generate_population, mle_from_full_graph, sufficient_counts, FullGraphMle,
    NodeId, PopulationGraph, SufficientCounts,
};
pub use likelihood::{
    escape_probability, ignored_log_likelihood, likelihood_profile, observed_log_likelihood,
    wave_inclusion_probability, EscapeProbability, ProfileRow,
};
pub use sbm::{SbmParams, SymMatrix};
pub use snowball::{
    draw_initial, to_ignored_data, trace_one_wave, DesignConfig, IgnoredData, InitialDesign,
    SnowballSample,
};
