use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use arise_core::{run, Algorithm, Game, SolverConfig, TraceRecord};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// One (algorithm, trial) run and how it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Result<RunResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<TraceRecord>,
    pub init_ids: Vec<usize>,
    pub report: usize,
    pub report_coords: Vec<f64>,
    pub report_loss: f64,
}

impl RunRecord {
    pub fn result(&self) -> Option<&RunResult> {
        self.outcome.as_ref().ok()
    }
}

/// Every run of an experiment in canonical order: algorithm order, then trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub config: ExperimentConfig,
    pub beta: f64,
    pub agents: usize,
    pub noise_variance: f64,
    pub space_size: usize,
    pub dim: usize,
    pub runs: Vec<RunRecord>,
}

impl TraceSet {
    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.outcome.is_err())
    }

    /// Successful runs of `algorithm`, in trial order.
    pub fn runs_of<'a>(&'a self, algorithm: &'a Algorithm) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.algorithm == *algorithm && r.outcome.is_ok())
    }
}

/// Runs every (algorithm, trial) pair with seed `base_seed + trial`.
///
/// A failing run is recorded and the others continue.
pub fn run_experiment(config: &ExperimentConfig) -> Result<TraceSet, HarnessError> {
    config.validate()?;
    let game = Game::new(config.game.clone())?;
    game.loss_table();
    let beta = config.beta.resolve(&game, config.solver.horizon)?;
    let solver = SolverConfig {
        beta,
        ..config.solver.clone()
    };

    let jobs: Vec<(Algorithm, usize)> = config
        .algorithms
        .iter()
        .flat_map(|&a| (0..config.trials).map(move |t| (a, t)))
        .collect();
    let workers = match config.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    }
    .min(jobs.len())
    .max(1);

    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(algorithm, trial)) = jobs.get(k) else {
            break;
        };
        let seed = config.base_seed + trial as u64;
        let record = run_one(&solver, algorithm, &game, trial, seed);
        slots.lock().expect("no worker panicked")[k] = Some(record);
    };
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }

    let runs = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect();
    Ok(TraceSet {
        config: config.clone(),
        beta,
        agents: game.agents(),
        noise_variance: game.spec().noise_variance,
        space_size: game.space().len(),
        dim: game.space().dim(),
        runs,
    })
}

fn run_one(solver: &SolverConfig, algorithm: Algorithm, game: &Game, trial: usize, seed: u64) -> RunRecord {
    let outcome = run(solver, algorithm, game, seed)
        .map(|out| {
            log::info!(
                "{} trial {trial}: reported loss {:.4}",
                algorithm.kind,
                out.report_loss
            );
            RunResult {
                report_coords: game.space().coords(out.report).to_vec(),
                report: out.report,
                report_loss: out.report_loss,
                init_ids: out.init_ids,
                trace: out.trace,
            }
        })
        .map_err(|e| {
            log::error!("{} trial {trial} failed: {e}", algorithm.kind);
            e.to_string()
        });
    RunRecord {
        algorithm,
        trial,
        seed,
        outcome,
    }
}
