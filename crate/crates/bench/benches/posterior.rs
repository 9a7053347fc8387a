use std::hint::black_box;

use arise_core::{
    run, Algorithm, AlgorithmKind, Game, GameSpec, KernelFamily, KernelParams, SolverConfig, SolverState,
    SurrogateModel,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn saddle() -> Game {
    Game::new(GameSpec::saddle()).unwrap()
}

/// Deterministic spread of observed candidates.
fn observed(len: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| (k * 97 + 13) % len).collect()
}

fn posterior_batch(c: &mut Criterion) {
    let game = saddle();
    let space = game.space();
    let mut group = c.benchmark_group("posterior_batch");
    for count in [10, 50, 110] {
        let params = KernelParams::isotropic(KernelFamily::SquaredExponential, 0.3, 1.0, 0.01);
        let mut model = SurrogateModel::new(params, space.dim(), true).unwrap();
        for id in observed(space.len(), count) {
            model.update(space.coords(id), game.exact_utilities(id)[0]).unwrap();
        }
        group.bench_with_input(BenchmarkId::from_parameter(count), &model, |b, m| {
            b.iter(|| m.posterior_batch(black_box(space.all_coords())))
        });
    }
    group.finish();
}

fn bounds_round(c: &mut Criterion) {
    let game = saddle();
    let space = game.space();
    let config = SolverConfig::default();
    let mut state = SolverState::new(&config, Algorithm::new(AlgorithmKind::Arise), &game).unwrap();
    for id in observed(space.len(), 40) {
        state.observe(space, id, &game.exact_utilities(id)).unwrap();
    }
    c.bench_function("bounds_round/saddle_40obs", |b| {
        b.iter(|| {
            let mut s = state.clone();
            s.refresh(space, 1).unwrap();
            black_box(s.roi.active.len())
        })
    });
}

fn short_run(c: &mut Criterion) {
    let game = saddle();
    game.loss_table();
    let config = SolverConfig {
        horizon: 20,
        ..SolverConfig::default()
    };
    let mut group = c.benchmark_group("run_20_rounds");
    group.sample_size(10);
    for kind in [AlgorithmKind::Arise, AlgorithmKind::SurLite] {
        group.bench_function(kind.name(), |b| {
            b.iter(|| run(&config, Algorithm::new(kind), &game, 0).unwrap().report)
        });
    }
    group.finish();
}

criterion_group!(benches, posterior_batch, bounds_round, short_run);
criterion_main!(benches);
