//! Experiment configuration files.
//!
//! A config is a TOML document with four optional tables:
//!
//! ```toml
//! [game]
//! kind = "saddle"          # saddle | rps | hotelling | budget-allocation | matrix
//! agents = 2
//! noise_variance = 0.01
//!
//! [solver]
//! horizon = 100
//! init_count = 10
//!
//! [beta]
//! mode = "practical"       # or "theoretical"
//!
//! [experiment]
//! algorithms = ["arise", { kind = "epsilon-greedy", epsilon = 0.1 }]
//! trials = 10
//! ```
//!
//! Every key has a default; see [`ExperimentConfig::from_toml`].

use std::fmt;
use std::path::{Path, PathBuf};

use arise_core::solver::theoretical_beta;
use arise_core::{
    Algorithm, AlgorithmKind, BudgetParams, Game, GameKind, GameSpec, KernelFamily, MatrixPayoffs,
    RefitSchedule, SolverConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "ARISE_OUTPUT_DIR";

/// How the confidence scaling is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMode {
    /// A fixed value: 1 for Hotelling and 2 otherwise unless given.
    Practical,
    /// `2 ln(n |D| T / delta)`.
    Theoretical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSetting {
    pub mode: BetaMode,
    /// Explicit practical value; `None` picks the per-game default.
    pub value: Option<f64>,
    pub delta: f64,
}

impl Default for BetaSetting {
    fn default() -> Self {
        Self {
            mode: BetaMode::Practical,
            value: None,
            delta: 0.05,
        }
    }
}

impl BetaSetting {
    /// The scaling used for `game` over `horizon` rounds.
    pub fn resolve(&self, game: &Game, horizon: usize) -> arise_core::Result<f64> {
        match self.mode {
            BetaMode::Practical => Ok(self.value.unwrap_or(default_beta(game.spec().kind))),
            BetaMode::Theoretical => {
                theoretical_beta(game.agents(), game.space().len(), horizon, self.delta)
            }
        }
    }
}

pub fn default_beta(kind: GameKind) -> f64 {
    if kind == GameKind::Hotelling {
        1.0
    } else {
        2.0
    }
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    /// Per-run settings; its `beta` is replaced by the resolved [`BetaSetting`] at run time.
    pub solver: SolverConfig,
    pub beta: BetaSetting,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub base_seed: u64,
    /// Concurrent runs; 0 uses every available core.
    pub workers: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for `game` with every algorithm.
    pub fn for_game(game: GameSpec) -> Self {
        let output_dir = PathBuf::from("runs").join(game.kind.name());
        Self {
            game,
            solver: SolverConfig::default(),
            beta: BetaSetting::default(),
            algorithms: AlgorithmKind::ALL.iter().map(|&k| Algorithm::new(k)).collect(),
            trials: 10,
            base_seed: 0,
            workers: 1,
            output_dir,
        }
    }

    /// Parses and validates a config document.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        let mut violations = Vec::new();
        let config = raw.resolve(&mut violations);
        violations.extend(config.violations());
        if violations.is_empty() {
            Ok(config)
        } else {
            Err(HarnessError::Invalid(violations))
        }
    }

    /// All violated constraints.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.game.violations();
        if self.trials == 0 {
            v.push("experiment.trials must be >= 1".into());
        }
        if self.solver.horizon == 0 {
            v.push("solver.horizon must be >= 1".into());
        }
        if self.solver.init_count == 0 {
            v.push("solver.init_count must be >= 1".into());
        }
        if !(self.solver.initial_lengthscale > 0.0 && self.solver.initial_lengthscale.is_finite()) {
            v.push("solver.lengthscale must be > 0".into());
        }
        if !(self.solver.initial_signal_variance > 0.0
            && self.solver.initial_signal_variance.is_finite())
        {
            v.push("solver.signal_variance must be > 0".into());
        }
        if let Some(noise) = self.solver.gp_noise_variance {
            if !(noise >= 0.0 && noise.is_finite()) {
                v.push("solver.gp_noise_variance must be >= 0".into());
            }
        }
        if self.algorithms.is_empty() {
            v.push("experiment.algorithms must name at least one algorithm".into());
        }
        for a in &self.algorithms {
            if !(0.0..=1.0).contains(&a.epsilon) {
                v.push(format!("{}: epsilon must lie in [0, 1], got {}", a.kind, a.epsilon));
            }
            if !a.tau.is_finite() {
                v.push(format!("{}: tau must be finite", a.kind));
            }
        }
        match self.beta.mode {
            BetaMode::Theoretical => {
                if !(self.beta.delta > 0.0 && self.beta.delta < 1.0) {
                    v.push(format!(
                        "beta.delta must lie in (0, 1) in theoretical mode, got {}",
                        self.beta.delta
                    ));
                }
            }
            BetaMode::Practical => {
                if let Some(b) = self.beta.value {
                    if !(b >= 0.0 && b.is_finite()) {
                        v.push(format!("beta.value must be >= 0, got {b}"));
                    }
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invalid(v))
        }
    }

    /// Output directory after the environment override.
    pub fn effective_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        HarnessError::Parse(msg) => HarnessError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    game: RawGame,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    beta: RawBeta,
    #[serde(default)]
    experiment: RawExperiment,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    kind: Option<String>,
    agents: Option<usize>,
    noise_variance: Option<f64>,
    resolution: Option<usize>,
    lattice: Option<usize>,
    integration: Option<usize>,
    space_cap: Option<usize>,
    budget: Option<BudgetParams>,
    matrix: Option<MatrixPayoffs>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    horizon: Option<usize>,
    init_count: Option<usize>,
    envelopes: Option<bool>,
    reset_envelope_on_refit: Option<bool>,
    kernel: Option<KernelFamily>,
    lengthscale: Option<f64>,
    signal_variance: Option<f64>,
    gp_noise_variance: Option<f64>,
    center_targets: Option<bool>,
    fit_budget: Option<usize>,
    fit_noise: Option<bool>,
    record_wall_time: Option<bool>,
    refit: Option<RefitSchedule>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeta {
    mode: Option<BetaMode>,
    value: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    algorithms: Option<Vec<RawAlgorithm>>,
    trials: Option<usize>,
    base_seed: Option<u64>,
    workers: Option<usize>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAlgorithm {
    Name(String),
    Table {
        kind: String,
        epsilon: Option<f64>,
        tau: Option<f64>,
    },
}

impl RawConfig {
    fn resolve(self, violations: &mut Vec<String>) -> ExperimentConfig {
        let kind = match self.game.kind.as_deref().unwrap_or("saddle").parse::<GameKind>() {
            Ok(k) => k,
            Err(e) => {
                violations.push(format!("game.kind: {e}"));
                GameKind::Saddle
            }
        };
        let g = self.game;
        let agents = g
            .agents
            .or_else(|| g.matrix.as_ref().map(|m| m.strategies.len()))
            .unwrap_or(2);
        let mut game = GameSpec::new(kind, agents);
        set(&mut game.noise_variance, g.noise_variance);
        set(&mut game.resolution, g.resolution);
        set(&mut game.lattice, g.lattice);
        set(&mut game.integration, g.integration);
        set(&mut game.space_cap, g.space_cap);
        set(&mut game.budget, g.budget);
        game.matrix = g.matrix;

        let mut config = ExperimentConfig::for_game(game);
        let s = self.solver;
        let solver = &mut config.solver;
        set(&mut solver.horizon, s.horizon);
        set(&mut solver.init_count, s.init_count);
        set(&mut solver.envelopes, s.envelopes);
        set(&mut solver.reset_envelope_on_refit, s.reset_envelope_on_refit);
        set(&mut solver.kernel, s.kernel);
        set(&mut solver.initial_lengthscale, s.lengthscale);
        set(&mut solver.initial_signal_variance, s.signal_variance);
        solver.gp_noise_variance = s.gp_noise_variance;
        set(&mut solver.center_targets, s.center_targets);
        set(&mut solver.fit_budget, s.fit_budget);
        set(&mut solver.fit_noise, s.fit_noise);
        set(&mut solver.record_wall_time, s.record_wall_time);
        set(&mut solver.refit, s.refit);

        set(&mut config.beta.mode, self.beta.mode);
        config.beta.value = self.beta.value;
        set(&mut config.beta.delta, self.beta.delta);

        let e = self.experiment;
        if let Some(list) = e.algorithms {
            config.algorithms = list
                .into_iter()
                .filter_map(|a| match a.into_algorithm() {
                    Ok(a) => Some(a),
                    Err(msg) => {
                        violations.push(msg);
                        None
                    }
                })
                .collect();
        }
        set(&mut config.trials, e.trials);
        set(&mut config.base_seed, e.base_seed);
        set(&mut config.workers, e.workers);
        set(&mut config.output_dir, e.output_dir);
        config
    }
}

impl RawAlgorithm {
    fn into_algorithm(self) -> Result<Algorithm, String> {
        let (name, epsilon, tau) = match self {
            RawAlgorithm::Name(n) => (n, None, None),
            RawAlgorithm::Table { kind, epsilon, tau } => (kind, epsilon, tau),
        };
        let kind: AlgorithmKind = name
            .parse()
            .map_err(|e| format!("experiment.algorithms: {e}"))?;
        let mut a = Algorithm::new(kind);
        set(&mut a.epsilon, epsilon);
        set(&mut a.tau, tau);
        Ok(a)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parses a comma-separated algorithm list such as `arise,sur-lite`.
pub fn parse_algorithm_list(list: &str) -> Result<Vec<Algorithm>, HarnessError> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name.parse::<AlgorithmKind>() {
            Ok(k) => out.push(Algorithm::new(k)),
            Err(e) => bad.push(e.to_string()),
        }
    }
    if !bad.is_empty() {
        return Err(HarnessError::Invalid(bad));
    }
    if out.is_empty() {
        return Err(HarnessError::Invalid(vec!["empty algorithm list".into()]));
    }
    Ok(out)
}

impl fmt::Display for BetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BetaMode::Practical => "practical",
            BetaMode::Theoretical => "theoretical",
        })
    }
}
