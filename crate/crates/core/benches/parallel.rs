use cantordiff::dgc::{search_witnesses, SearchOptions};
use cantordiff::experiment::{run_monte_carlo, DistributionSpec, ExperimentConfig, RunOptions};
use cantordiff::rational::rat;
use cantordiff::spectra::{lower_spectral_radius, SpectralOptions};
use cantordiff::{Execution, JointSurvivalDistribution, MarginalVector};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let cfg = ExperimentConfig::new(
        DistributionSpec::Spec("correlated:7,9,7/9".into()),
        None,
        4,
        32,
        1,
    );
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = RunOptions {
            exec,
            ..RunOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, o| {
            b.iter(|| run_monte_carlo(black_box(&cfg), None, o).unwrap())
        });
    }
    g.finish();
}

fn spectral(c: &mut Criterion) {
    let mu = JointSurvivalDistribution::make_independent(
        MarginalVector::new(vec![rat(4, 5), rat(3, 5), rat(7, 10), rat(1, 2)]).unwrap(),
    );
    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SpectralOptions {
            exec,
            ..SpectralOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, o| {
            b.iter(|| lower_spectral_radius(&mu, &mu, 7, o).unwrap())
        });
    }
    g.finish();
}

fn witness_search(c: &mut Criterion) {
    let mu = JointSurvivalDistribution::from_member_lists(
        8,
        &[
            (vec![0, 1, 2, 4, 6], rat(1, 3)),
            (vec![1, 3, 5, 6, 7], rat(1, 3)),
            (vec![0, 2, 3, 5, 7], rat(1, 3)),
        ],
    )
    .unwrap();
    let mut g = c.benchmark_group("witness_search");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SearchOptions {
            exec,
            ..SearchOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, o| {
            b.iter(|| search_witnesses(&mu, &mu, o).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, spectral, witness_search);
criterion_main!(benches);
