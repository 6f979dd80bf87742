//! Repeated-sampling study: draw many one-wave samples from one fixed
//! population, estimate on each, and compare the Bayes estimates with the
//! full-graph maximum-likelihood targets.

use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augmentation::{run_chain, McmcConfig};
use crate::error::{Error, Result};
use crate::graph::{
    draw_edges, draw_strata, generate_population, mle_from_full_graph, FullGraphMle, NodeId,
    PopulationGraph,
};
use crate::io;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sbm::SbmParams;
use crate::snowball::{draw_initial, to_ignored_data, trace_one_wave, DesignConfig, InitialDesign};

pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_BINS: usize = 30;

/// Dense groups planted on top of a block model population.
///
/// `clique_count` seed nodes are chosen at random; each seed and
/// `clique_size - 1` other nodes of its stratum form a group whose pairs
/// link with probability `within_prob`. All other pairs link with
/// `background_scale * beta`.
///
/// When most nodes sit in a group (see [`ClusterSpec::saturated`]) degrees
/// are far more regular than under the block model, and replicate estimates
/// of `N` come out too high on average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub clique_count: usize,
    pub clique_size: usize,
    pub within_prob: f64,
    pub background_scale: f64,
}

impl ClusterSpec {
    /// `n / clique_size` complete cliques over a thinned block-model
    /// background. Seeds that an earlier group already absorbed are skipped,
    /// so roughly two thirds of the nodes end up in a full clique.
    pub fn saturated(n: usize, clique_size: usize, background_scale: f64) -> Self {
        Self {
            clique_count: n / clique_size.max(1),
            clique_size,
            within_prob: 1.0,
            background_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PopulationSource {
    File {
        edges: PathBuf,
        strata: PathBuf,
        #[serde(default, rename = "G")]
        strata_count: Option<usize>,
    },
    Generate {
        params: SbmParams,
        n: usize,
        #[serde(default)]
        clustered: Option<ClusterSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub population: PopulationSource,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub design: InitialDesign,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Worker threads; `None` uses available parallelism.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::InvalidConfig(
                "histogram bins must be at least 1".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        self.design.validate()?;
        self.mcmc.validate()
    }
}

/// Seed of the generated population for a study.
pub fn population_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, 0)
}

/// Seeds of replicate `index` (0-based): one for the sample design, one for
/// the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSeeds {
    pub design: u64,
    pub chain: u64,
}

pub fn replicate_seeds(master_seed: u64, index: usize) -> ReplicateSeeds {
    let base = derive_seed(master_seed, index as u64 + 1);
    ReplicateSeeds {
        design: derive_seed(base, 0),
        chain: derive_seed(base, 1),
    }
}

/// Block model population with planted dense groups.
pub fn generate_clustered_population(
    params: &SbmParams,
    n: usize,
    spec: &ClusterSpec,
    seed: u64,
) -> Result<PopulationGraph> {
    params.validate()?;
    if !(0.0..=1.0).contains(&spec.within_prob) || !(spec.background_scale >= 0.0) {
        return Err(Error::InvalidConfig(
            "cluster probabilities out of range".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let strata = draw_strata(params.lambda(), n, &mut rng);
    let mut group = vec![usize::MAX; n];
    let seeds = index::sample(&mut rng, n, spec.clique_count.min(n));
    for (gid, s) in seeds.into_iter().enumerate() {
        if group[s] != usize::MAX {
            continue;
        }
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&v| v != s && strata[v] == strata[s] && group[v] == usize::MAX)
            .collect();
        group[s] = gid;
        let take = spec.clique_size.saturating_sub(1).min(candidates.len());
        for _ in 0..take {
            let pick = rng.random_range(0..candidates.len());
            group[candidates.swap_remove(pick)] = gid;
        }
    }
    let background = |k: usize, l: usize| (params.beta_at(k, l) * spec.background_scale).min(1.0);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for (u, v) in draw_edges(&strata, background, &mut rng) {
        let same = group[u as usize] != usize::MAX && group[u as usize] == group[v as usize];
        if !same {
            edges.push((u, v));
        }
    }
    for u in 0..n {
        if group[u] == usize::MAX {
            continue;
        }
        for v in (u + 1)..n {
            if group[v] == group[u] && rng.random::<f64>() < spec.within_prob {
                edges.push((u as NodeId, v as NodeId));
            }
        }
    }
    PopulationGraph::from_edges(params.strata(), strata, edges)
}

pub fn load_population(source: &PopulationSource, master_seed: u64) -> Result<PopulationGraph> {
    match source {
        PopulationSource::File {
            edges,
            strata,
            strata_count,
        } => io::read_graph(edges, strata, *strata_count),
        PopulationSource::Generate {
            params,
            n,
            clustered: None,
        } => generate_population(params, *n, population_seed(master_seed)),
        PopulationSource::Generate {
            params,
            n,
            clustered: Some(spec),
        } => generate_clustered_population(params, *n, spec, population_seed(master_seed)),
    }
}

/// Outcome of one replicate. Failed replicates carry `error` and no
/// estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seeds: ReplicateSeeds,
    pub n0: usize,
    pub n1: usize,
    pub n_hat: f64,
    pub lambda_hat: Vec<f64>,
    pub beta_hat: Vec<f64>,
    pub cap_hits: u64,
    pub error: Option<String>,
}

impl ReplicateRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs one replicate against a fixed population.
pub fn run_replicate(
    graph: &PopulationGraph,
    design: InitialDesign,
    mcmc: &McmcConfig,
    master_seed: u64,
    replicate: usize,
) -> ReplicateRecord {
    let seeds = replicate_seeds(master_seed, replicate);
    let mut record = ReplicateRecord {
        replicate,
        seeds,
        n0: 0,
        n1: 0,
        n_hat: f64::NAN,
        lambda_hat: Vec::new(),
        beta_hat: Vec::new(),
        cap_hits: 0,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let s0 = draw_initial(
            graph,
            &DesignConfig {
                initial: design,
                seed: seeds.design,
            },
        )?;
        let data = to_ignored_data(&trace_one_wave(graph, &s0)?)?;
        record.n0 = data.n0();
        record.n1 = data.n1();
        let cfg = McmcConfig {
            seed: seeds.chain,
            ..mcmc.clone()
        };
        let trace = run_chain(&data, &cfg)?;
        let est = trace.estimates();
        record.n_hat = est.n_mean;
        record.lambda_hat = est.lambda_mean.clone();
        record.beta_hat = est.beta_mean.clone();
        record.cap_hits = trace.diagnostics().cap_hits;
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("replicate {replicate} failed: {e}");
        record.error = Some(e.to_string());
    }
    record
}

/// Equal-width bins over `[min, max]` of a set of estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// `bins` equal-width bins spanning the data; the maximum falls in the last
/// bin. Constant data gives one bin holding everything.
pub fn summarize_histograms(values: &[f64], bins: usize) -> Histogram {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Histogram {
            edges: Vec::new(),
            counts: Vec::new(),
        };
    }
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max || bins <= 1 {
        return Histogram {
            edges: vec![min, max],
            counts: vec![finite.len() as u64],
        };
    }
    let width = (max - min) / bins as f64;
    let edges = (0..=bins)
        .map(|i| {
            if i == bins {
                max
            } else {
                min + width * i as f64
            }
        })
        .collect();
    let mut counts = vec![0u64; bins];
    for v in finite {
        let i = (((v - min) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    Histogram { edges, counts }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimandSummary {
    pub name: String,
    pub target: Option<f64>,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub histogram: Histogram,
}

fn describe(name: String, target: Option<f64>, values: &[f64], bins: usize) -> EstimandSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    EstimandSummary {
        name,
        target,
        mean,
        median: median(values),
        sd,
        histogram: summarize_histograms(values, bins),
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        (sorted[m - 1] + sorted[m]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub master_seed: u64,
    pub design: InitialDesign,
    /// The estimator assumes a Bernoulli or fixed-size initial sample.
    pub design_misspecified: bool,
    pub population_size: u64,
    pub targets: FullGraphMle,
    pub replicates: usize,
    pub succeeded: usize,
    pub failures: Vec<(usize, String)>,
    pub mean_initial_fraction: f64,
    pub mean_final_fraction: f64,
    pub estimands: Vec<EstimandSummary>,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
}

impl StudySummary {
    pub fn estimand(&self, name: &str) -> Option<&EstimandSummary> {
        self.estimands.iter().find(|e| e.name == name)
    }

    /// Successful per-replicate values of one estimand.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let g = self.targets.lambda.len();
        let names = estimand_names(g);
        let Some(pos) = names.iter().position(|n| n == name) else {
            return Vec::new();
        };
        self.records
            .iter()
            .filter(|r| r.succeeded())
            .map(|r| match pos {
                0 => r.n_hat,
                p if p <= g => r.lambda_hat[p - 1],
                p => r.beta_hat[p - 1 - g],
            })
            .collect()
    }

    /// Writes `estimates.csv`, `summary.json` and `hist_<estimand>.csv`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let g = self.targets.lambda.len();
        let names = estimand_names(g);

        let path = dir.join("estimates.csv");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| Error::parse(&path, e.to_string());
        let mut header: Vec<String> = ["replicate", "design_seed", "chain_seed", "n0", "n1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(names.iter().map(|n| format!("{n}_hat")));
        header.extend(["cap_hits".to_string(), "error".to_string()]);
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.replicate.to_string(),
                r.seeds.design.to_string(),
                r.seeds.chain.to_string(),
                r.n0.to_string(),
                r.n1.to_string(),
            ];
            if r.succeeded() {
                row.push(r.n_hat.to_string());
                row.extend(r.lambda_hat.iter().chain(&r.beta_hat).map(f64::to_string));
            } else {
                row.extend(std::iter::repeat_n(String::new(), names.len()));
            }
            row.push(r.cap_hits.to_string());
            row.push(r.error.clone().unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        io::write_json(self, &dir.join("summary.json"))?;

        for est in &self.estimands {
            let path = dir.join(format!("hist_{}.csv", est.name));
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = csv::Writer::from_writer(file);
            let csv_err = |e: csv::Error| Error::parse(&path, e.to_string());
            w.write_record(["bin", "lower", "upper", "count"])
                .map_err(csv_err)?;
            for (i, c) in est.histogram.counts.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    est.histogram.edges[i].to_string(),
                    est.histogram.edges[i + 1].to_string(),
                    c.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// `N`, `lambda_1..lambda_G`, `beta_1_1, beta_1_2, ..`.
pub fn estimand_names(strata_count: usize) -> Vec<String> {
    let mut names = vec!["N".to_string()];
    names.extend((1..=strata_count).map(|k| format!("lambda_{k}")));
    for k in 1..=strata_count {
        for l in k..=strata_count {
            names.push(format!("beta_{k}_{l}"));
        }
    }
    names
}

/// Runs the full study. Replicates run in parallel; results are ordered by
/// replicate index, so output is identical for any thread count.
pub fn run_study(cfg: &StudyConfig) -> Result<StudySummary> {
    cfg.validate()?;
    let graph = load_population(&cfg.population, cfg.master_seed)?;
    run_study_on(&graph, cfg)
}

/// Runs the study against an already loaded population.
pub fn run_study_on(graph: &PopulationGraph, cfg: &StudyConfig) -> Result<StudySummary> {
    cfg.validate()?;
    let targets = mle_from_full_graph(graph)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let records: Vec<ReplicateRecord> = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|i| run_replicate(graph, cfg.design, &cfg.mcmc, cfg.master_seed, i))
            .collect()
    });
    Ok(summarize(graph, cfg, targets, records))
}

fn summarize(
    graph: &PopulationGraph,
    cfg: &StudyConfig,
    targets: FullGraphMle,
    records: Vec<ReplicateRecord>,
) -> StudySummary {
    let g = graph.strata_count();
    let n = graph.node_count() as f64;
    let ok: Vec<&ReplicateRecord> = records.iter().filter(|r| r.succeeded()).collect();
    let failures = records
        .iter()
        .filter_map(|r| r.error.clone().map(|e| (r.replicate, e)))
        .collect();
    let frac = |f: fn(&ReplicateRecord) -> usize| {
        records.iter().map(|r| f(r) as f64 / n).sum::<f64>() / records.len() as f64
    };
    let mean_initial_fraction = frac(|r| r.n0);
    let mean_final_fraction = frac(|r| r.n0 + r.n1);

    let names = estimand_names(g);
    let mut target_values = vec![Some(targets.population as f64)];
    target_values.extend(targets.lambda.iter().map(|&l| Some(l)));
    target_values.extend(targets.beta.upper().iter().copied());
    let estimands = if ok.is_empty() {
        Vec::new()
    } else {
        names
            .into_iter()
            .enumerate()
            .map(|(pos, name)| {
                let values: Vec<f64> = ok
                    .iter()
                    .map(|r| match pos {
                        0 => r.n_hat,
                        p if p <= g => r.lambda_hat[p - 1],
                        p => r.beta_hat[p - 1 - g],
                    })
                    .collect();
                describe(name, target_values[pos], &values, cfg.histogram_bins)
            })
            .collect()
    };
    StudySummary {
        master_seed: cfg.master_seed,
        design: cfg.design,
        design_misspecified: cfg.design.is_misspecified(),
        population_size: targets.population,
        targets,
        replicates: records.len(),
        succeeded: ok.len(),
        failures,
        mean_initial_fraction,
        mean_final_fraction,
        estimands,
        records,
    }
}
