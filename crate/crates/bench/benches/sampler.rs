use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cgbayes::bayes::sample_beta_with;
use cgbayes::{PosteriorPreconditioner, RngStream, SolveConfig};
use cgbayes_bench::shrinkage_posterior;

fn bench_sample_beta(c: &mut Criterion) {
    let post = shrinkage_posterior(500, 200, 0.1, 1);
    let cfg = SolveConfig::default();
    let mut group = c.benchmark_group("sample_beta");
    group.sample_size(20);
    for kind in PosteriorPreconditioner::ALL {
        let mut rng = RngStream::new(7);
        group.bench_function(BenchmarkId::from_parameter(kind.as_str()), |b| {
            b.iter(|| sample_beta_with(&post, &mut rng, &cfg, kind).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sample_beta);
criterion_main!(benches);
