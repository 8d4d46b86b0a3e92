use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shadowkit::bridge::{ContinuousOperator, QuadratureScheme};
use shadowkit::shadow::DiscreteOperator;
use shadowkit::system::{gallery, GalleryProblem, Params};
use shadowkit::{Exec, Samples};

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn modes() -> [(&'static str, Exec); 2] {
    [
        ("sequential", Exec::Sequential),
        ("parallel", Exec::Parallel),
    ]
}

fn discrete_apply(c: &mut Criterion) {
    let GalleryProblem::Discrete(p) =
        gallery("disc-forced", &params(&[("lo", -1000.0), ("hi", 1000.0)])).unwrap()
    else {
        unreachable!()
    };
    let mut g = c.benchmark_group("discrete apply (2001 indices)");
    for (name, exec) in modes() {
        let op = DiscreteOperator::discrete(&p.system, &p.orbit, exec).unwrap();
        let z = Samples::from_fn(op.dim(), op.len(), |i, k| 0.01 * ((i + k) as f64).sin());
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| op.apply(&z).unwrap())
        });
    }
    g.finish();
}

fn continuous_apply(c: &mut Criterion) {
    let GalleryProblem::Continuous(p) = gallery("cont-rho", &params(&[])).unwrap() else {
        unreachable!()
    };
    let mut g = c.benchmark_group("continuous apply (cont-rho)");
    for (name, exec) in modes() {
        let op =
            ContinuousOperator::continuous(&p.system, &p.orbit, &QuadratureScheme::default(), exec)
                .unwrap();
        let z = Samples::from_fn(1, op.len(), |_, k| 0.01 * (k as f64 * 0.05).cos());
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| op.apply(&z).unwrap())
        });
    }
    g.finish();
}

fn continuous_build(c: &mut Criterion) {
    let GalleryProblem::Continuous(p) = gallery("cont-sin", &params(&[])).unwrap() else {
        unreachable!()
    };
    let mut g = c.benchmark_group("continuous operator build (cont-sin)");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                ContinuousOperator::continuous(
                    &p.system,
                    &p.orbit,
                    &QuadratureScheme::default(),
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, discrete_apply, continuous_apply, continuous_build);
criterion_main!(benches);
