use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use swe_radar::baselines::{MusicParams, MusicSolver};
use swe_radar::methods::{Method, MethodSuite};
use swe_radar::metrics::{monte_carlo, BenchmarkSpec, Executor};
use swe_radar::synth::synthesize_wideband;
use swe_radar::{RadarConfig, Signature, Target};

fn executors(c: &mut Criterion) {
    let spec = BenchmarkSpec {
        snr_db: vec![10.0],
        trials: 8,
        methods: vec![Method::Proposed],
        ..BenchmarkSpec::reference()
    };
    let suite = MethodSuite::for_config(&spec.cfg).unwrap();
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for (name, exec) in [("sequential", Executor::Sequential), ("parallel", Executor::Parallel)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| monte_carlo(&spec, &suite, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn methods(c: &mut Criterion) {
    let cfg = RadarConfig::reference();
    let truth = Signature::from_targets(
        &[Target::unit(2.02, 30.0), Target::unit(0.97, -45.0), Target::unit(1.5, 10.0)],
        &cfg,
    )
    .unwrap();
    let y = synthesize_wideband(&truth, &cfg, 0.1, 5);
    let suite = MethodSuite::for_config(&cfg).unwrap().with_music_params(MusicParams {
        solver: MusicSolver::subspace(),
        ..MusicParams::for_config(&cfg)
    });
    let mut g = c.benchmark_group("estimate");
    g.sample_size(10);
    for m in Method::ALL {
        g.bench_with_input(BenchmarkId::from_parameter(m.name()), &m, |b, &m| {
            b.iter(|| suite.run(m, &y, Some(3)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, executors, methods);
criterion_main!(benches);
