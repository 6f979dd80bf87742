use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use snowball_core::augmentation::{sample_population_size, GibbsSampler};
use snowball_core::harness::{run_study, PopulationSource, StudyConfig};
use snowball_core::rng::rng_from_seed;
use snowball_core::{
    draw_initial, generate_population, run_chain, to_ignored_data, trace_one_wave, DesignConfig,
    IgnoredData, InitialDesign, McmcConfig, SbmParams,
};

fn surrogate() -> SbmParams {
    SbmParams::from_upper(vec![0.425, 0.575], vec![0.0046, 0.0014, 0.0058]).unwrap()
}

fn field_sample() -> IgnoredData {
    let graph = generate_population(&surrogate(), 595, 1).unwrap();
    let s0 = draw_initial(
        &graph,
        &DesignConfig {
            initial: InitialDesign::FixedSize { n0: 89 },
            seed: 2,
        },
    )
    .unwrap();
    to_ignored_data(&trace_one_wave(&graph, &s0).unwrap()).unwrap()
}

fn population(c: &mut Criterion) {
    let params = surrogate();
    let mut group = c.benchmark_group("generate_population");
    for n in [595usize, 10_000] {
        group.bench_function(n.to_string(), |b| {
            b.iter(|| generate_population(&params, black_box(n), 7).unwrap())
        });
    }
    group.finish();
}

fn population_size(c: &mut Criterion) {
    let mut rng = rng_from_seed(3);
    c.bench_function("sample_population_size/uncapped", |b| {
        b.iter(|| sample_population_size(89, 120, black_box(0.6), None, &mut rng).unwrap())
    });
    c.bench_function("sample_population_size/tight_cap", |b| {
        b.iter(|| sample_population_size(89, 120, black_box(0.6), Some(215), &mut rng).unwrap())
    });
}

fn chain(c: &mut Criterion) {
    let data = field_sample();
    let cfg = McmcConfig::default();
    let sampler = GibbsSampler::new(&data, &cfg).unwrap();
    let mut rng = rng_from_seed(4);
    let start = sampler.initial_state(&mut rng).unwrap();
    c.bench_function("gibbs_sweep", |b| {
        b.iter_batched(
            || start.clone(),
            |state| sampler.sweep(&state, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("run_chain/1000", |b| {
        b.iter(|| run_chain(&data, &cfg).unwrap())
    });
}

fn study(c: &mut Criterion) {
    let cfg = StudyConfig {
        population: PopulationSource::Generate {
            params: surrogate(),
            n: 595,
            clustered: None,
        },
        replicates: 20,
        design: InitialDesign::FixedSize { n0: 89 },
        mcmc: McmcConfig::default(),
        master_seed: 5,
        histogram_bins: 30,
        threads: None,
    };
    let mut group = c.benchmark_group("run_study");
    group.sample_size(10);
    group.bench_function("20_replicates", |b| b.iter(|| run_study(&cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, population, population_size, chain, study);
criterion_main!(benches);
