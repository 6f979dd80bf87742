use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use serde::Serialize;
use snowball_core::harness::{run_study, PopulationSource, StudyConfig};
use snowball_core::io::{
    read_graph, read_json, read_params, read_sample, write_graph, write_json, write_profile,
};
use snowball_core::{
    draw_initial, full_log_likelihood, generate_population, likelihood_profile,
    mle_from_full_graph, run_chain, to_ignored_data, trace_one_wave, ChainTrace, DesignConfig,
    IgnoredData, McmcConfig, PopulationGraph, SbmParams, SymMatrix,
};

use crate::{
    require_file, resolve_seed, EstimateArgs, GenerateArgs, GraphArgs, MleArgs, NGrid, ProfileArgs,
    SampleArgs, SimulateArgs, UsageError,
};

pub const EDGES_FILE: &str = "edges.tsv";
pub const STRATA_FILE: &str = "strata.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PROFILE_FILE: &str = "profile.csv";
pub const MLE_FILE: &str = "mle.json";

fn load_graph(args: &GraphArgs) -> anyhow::Result<PopulationGraph> {
    require_file(&args.edges)?;
    require_file(&args.strata)?;
    Ok(read_graph(&args.edges, &args.strata, args.strata_count)?)
}

fn check_grid(data: &IgnoredData, grid: &NGrid) -> Result<(), UsageError> {
    let n = data.sample_size() as u64;
    if grid.start < n {
        return Err(UsageError(format!(
            "grid starts at {} but the sample already has {n} units",
            grid.start
        )));
    }
    Ok(())
}

fn profile_to(
    data: &IgnoredData,
    params: &SbmParams,
    grid: &NGrid,
    path: &Path,
) -> anyhow::Result<()> {
    check_grid(data, grid)?;
    let rows = likelihood_profile(data, params, grid.values())?;
    write_profile(&rows, path)?;
    info!("wrote {} profile rows to {}", rows.len(), path.display());
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<()> {
    require_file(&args.params)?;
    let params = read_params(&args.params)?;
    let seed = resolve_seed(args.seed);
    let graph = generate_population(&params, args.size, seed)?;
    write_graph(
        &graph,
        &args.out.join(EDGES_FILE),
        &args.out.join(STRATA_FILE),
    )?;
    info!(
        "generated {} nodes and {} edges with seed {seed}",
        graph.node_count(),
        graph.edge_count()
    );
    Ok(())
}

pub fn cmd_sample(args: &SampleArgs) -> anyhow::Result<()> {
    let graph = load_graph(&args.graph)?;
    let seed = resolve_seed(args.seed);
    let s0 = draw_initial(
        &graph,
        &DesignConfig {
            initial: args.design,
            seed,
        },
    )?;
    let sample = trace_one_wave(&graph, &s0)?;
    let data = to_ignored_data(&sample)?;
    write_json(&data, &args.out)?;
    info!(
        "sampled n0 = {}, n1 = {} with seed {seed}",
        data.n0(),
        data.n1()
    );
    Ok(())
}

pub fn cmd_estimate(args: &EstimateArgs) -> anyhow::Result<()> {
    require_file(&args.sample)?;
    let data = read_sample(&args.sample)?;
    if let Some(grid) = &args.grid {
        check_grid(&data, grid)?;
    }
    let cfg = McmcConfig {
        chain_length: args.mcmc.chain_length,
        burn_in_fraction: args.mcmc.burn_in,
        n_max_cap: args.mcmc.cap,
        cap_multiplier: args.mcmc.cap_multiplier,
        seed: resolve_seed(args.seed),
        ..McmcConfig::default()
    };
    let trace = run_chain(&data, &cfg)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let trace_path = args.out.join(TRACE_FILE);
    let file =
        File::create(&trace_path).with_context(|| format!("creating {}", trace_path.display()))?;
    let mut w = BufWriter::new(file);
    trace.write_csv(&mut w)?;
    w.flush()?;
    write_json(&trace.summary(), &args.out.join(SUMMARY_FILE))?;
    if let Some(grid) = &args.grid {
        profile_to(
            &data,
            &posterior_mean_params(&trace)?,
            grid,
            &args.out.join(PROFILE_FILE),
        )?;
    }
    let d = trace.diagnostics();
    info!(
        "N posterior mean {:.1}; {} cap hits at cap {}",
        trace.estimates().n_mean,
        d.cap_hits,
        d.cap
    );
    Ok(())
}

fn posterior_mean_params(trace: &ChainTrace) -> anyhow::Result<SbmParams> {
    let est = trace.estimates();
    let total: f64 = est.lambda_mean.iter().sum();
    let lambda = est.lambda_mean.iter().map(|l| l / total).collect();
    let beta = SymMatrix::from_upper(est.lambda_mean.len(), est.beta_mean.clone())
        .context("trace has inconsistent dimensions")?;
    Ok(SbmParams::new(lambda, beta)?)
}

/// Contents of `mle.json`. Undefined link probabilities are `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleReport {
    #[serde(rename = "N")]
    pub population: u64,
    #[serde(rename = "G")]
    pub strata_count: usize,
    pub edges: usize,
    pub lambda: Vec<f64>,
    pub beta: Vec<Option<f64>>,
    pub log_likelihood: f64,
}

pub fn cmd_mle(args: &MleArgs) -> anyhow::Result<()> {
    let graph = load_graph(&args.graph)?;
    let profile_data = match (&args.profile, &args.grid) {
        (Some(p), Some(grid)) => {
            require_file(p)?;
            let data = read_sample(p)?.with_strata_count(graph.strata_count())?;
            check_grid(&data, grid)?;
            Some((data, grid))
        }
        _ => None,
    };
    let mle = mle_from_full_graph(&graph)?;
    let params = mle.to_params(0.0)?;
    let report = MleReport {
        population: mle.population,
        strata_count: graph.strata_count(),
        edges: graph.edge_count(),
        lambda: mle.lambda.clone(),
        beta: mle.beta.upper().to_vec(),
        log_likelihood: full_log_likelihood(&graph, &params)?,
    };
    write_json(&report, &args.out.join(MLE_FILE))?;
    if let Some((data, grid)) = profile_data {
        profile_to(&data, &params, grid, &args.out.join(PROFILE_FILE))?;
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    require_file(&args.config)?;
    let raw: serde_json::Value = read_json(&args.config)?;
    let seed_in_config = raw.get("master_seed").is_some();
    let mut cfg: StudyConfig = serde_json::from_value(raw)
        .map_err(|e| snowball_core::Error::InvalidConfig(e.to_string()))?;
    if let PopulationSource::File { edges, strata, .. } = &mut cfg.population {
        let base = args.config.parent().unwrap_or(Path::new(""));
        for p in [edges, strata] {
            *p = rebase(base, p);
            require_file(p)?;
        }
    }
    cfg.master_seed = match args.seed {
        Some(s) => s,
        None if seed_in_config => cfg.master_seed,
        None => resolve_seed(None),
    };
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    if let Some(c) = args.chain_length {
        cfg.mcmc.chain_length = c;
    }
    if let Some(b) = args.burn_in {
        cfg.mcmc.burn_in_fraction = b;
    }
    if let Some(m) = args.cap_multiplier {
        cfg.mcmc.cap_multiplier = m;
    }
    if let Some(d) = args.design {
        cfg.design = d;
    }
    let summary = run_study(&cfg)?;
    summary.write_outputs(&args.out)?;
    info!(
        "{} of {} replicates succeeded; master seed {}",
        summary.succeeded, summary.replicates, summary.master_seed
    );
    Ok(())
}

fn rebase(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn cmd_profile(args: &ProfileArgs) -> anyhow::Result<()> {
    require_file(&args.sample)?;
    require_file(&args.params)?;
    let params = read_params(&args.params)?;
    let data = read_sample(&args.sample)?.with_strata_count(params.strata())?;
    profile_to(&data, &params, &args.grid, &args.out)
}
