use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use subcurv_core::gallery;
use subcurv_core::identities::{run_suite, ExampleSource, Family, SuiteConfig};
use subcurv_core::manifold::curvature;
use subcurv_core::LocalGeometry;

fn geometry(c: &mut Criterion) {
    let hopf = gallery::build_example("hopf").unwrap().spec;
    let x = [1.1, 0.7, 2.3];
    c.bench_function("curvature/hopf_total", |b| {
        b.iter(|| curvature(hopf.total(), black_box(&x)).unwrap())
    });
    c.bench_function("local_geometry/hopf", |b| {
        b.iter(|| LocalGeometry::new(&hopf, black_box(&x)).unwrap())
    });
    let warped = gallery::build_example("warped_interval_s1").unwrap().spec;
    let y = [0.4, 1.0];
    c.bench_function("local_geometry/warped", |b| {
        b.iter(|| LocalGeometry::new(&warped, black_box(&y)).unwrap())
    });
}

fn suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    for family in Family::ALL {
        let config = SuiteConfig {
            examples: vec![ExampleSource::Gallery("hopf".into())],
            points: 10,
            families: vec![family],
            ..SuiteConfig::default()
        };
        group.bench_function(family.as_str(), |b| b.iter(|| run_suite(&config).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, geometry, suite);
criterion_main!(benches);
