//! Black-box benchmark games with exact oracles.
//!
//! A [`Game`] answers noisy utility queries for the learner and exposes the
//! noise-free utilities, best-response gains and Nash loss used to score runs.

pub mod budget;
pub mod hotelling;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{simplex_lattice, unit_grid, JointSpace, DEFAULT_SPACE_CAP};

pub use budget::BudgetParams;

/// Benchmark game family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    Saddle,
    Rps,
    Hotelling,
    BudgetAllocation,
    /// Finite normal-form game given by explicit payoff tables.
    Matrix,
}

impl GameKind {
    pub fn name(self) -> &'static str {
        match self {
            GameKind::Saddle => "saddle",
            GameKind::Rps => "rps",
            GameKind::Hotelling => "hotelling",
            GameKind::BudgetAllocation => "budget-allocation",
            GameKind::Matrix => "matrix",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "saddle" => Ok(GameKind::Saddle),
            "rps" | "rock-paper-scissors" => Ok(GameKind::Rps),
            "hotelling" => Ok(GameKind::Hotelling),
            "budget" | "budget-allocation" | "budgetallocation" => Ok(GameKind::BudgetAllocation),
            "matrix" => Ok(GameKind::Matrix),
            other => Err(Error::Config(format!("unknown game kind `{other}`"))),
        }
    }
}

/// Payoff tables of a finite normal-form game.
///
/// `payoffs[i]` lists agent `i`'s utility for every joint profile, in the
/// candidate order of the resulting [`JointSpace`] (last agent fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPayoffs {
    pub strategies: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

/// Full description of a game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub kind: GameKind,
    /// Number of agents.
    pub n: usize,
    /// Variance of the Gaussian observation noise.
    pub noise_variance: f64,
    /// Grid points per axis (Saddle, Hotelling).
    pub resolution: usize,
    /// Simplex lattice denominator (RPS).
    pub lattice: usize,
    /// Customer integration grid per axis (Hotelling).
    pub integration: usize,
    pub budget: BudgetParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixPayoffs>,
    /// Largest admissible joint space.
    pub space_cap: usize,
}

impl GameSpec {
    /// Defaults for `kind` with `n` agents.
    pub fn new(kind: GameKind, n: usize) -> Self {
        let resolution = match kind {
            GameKind::Hotelling => 11,
            _ => 21,
        };
        Self {
            kind,
            n,
            noise_variance: 0.01,
            resolution,
            lattice: 6,
            integration: 201,
            budget: BudgetParams::default(),
            matrix: None,
            space_cap: DEFAULT_SPACE_CAP,
        }
    }

    pub fn saddle() -> Self {
        Self::new(GameKind::Saddle, 2)
    }

    pub fn rps() -> Self {
        Self::new(GameKind::Rps, 2)
    }

    pub fn hotelling(n: usize) -> Self {
        Self::new(GameKind::Hotelling, n)
    }

    pub fn budget(n: usize) -> Self {
        Self::new(GameKind::BudgetAllocation, n)
    }

    pub fn matrix(payoffs: MatrixPayoffs) -> Self {
        let mut spec = Self::new(GameKind::Matrix, payoffs.strategies.len());
        spec.matrix = Some(payoffs);
        spec
    }

    pub fn with_noise(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    /// All violated constraints, empty when the spec is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            v.push("noise_variance must be finite and >= 0".into());
        }
        match self.kind {
            GameKind::Saddle | GameKind::Rps => {
                if self.n != 2 {
                    v.push(format!("{} is a two-player game (n = {})", self.kind, self.n));
                }
            }
            GameKind::Hotelling => {
                if self.n < 2 {
                    v.push("hotelling needs n >= 2".into());
                }
            }
            GameKind::BudgetAllocation => {
                if !(1..=4).contains(&self.n) {
                    v.push(format!(
                        "budget-allocation supports 1 <= n <= 4 (exact permutation average), got {}",
                        self.n
                    ));
                }
                self.budget.validate(&mut v);
            }
            GameKind::Matrix => match &self.matrix {
                None => v.push("matrix game needs payoff tables".into()),
                Some(m) => {
                    let size: usize = m.strategies.iter().product();
                    if m.strategies.len() != self.n || m.payoffs.len() != self.n {
                        v.push("matrix payoffs must list one table per agent".into());
                    }
                    if m.strategies.contains(&0) {
                        v.push("matrix strategy counts must be >= 1".into());
                    }
                    if m.payoffs.iter().any(|p| p.len() != size) {
                        v.push(format!("each matrix payoff table needs {size} entries"));
                    }
                }
            },
        }
        if matches!(self.kind, GameKind::Saddle | GameKind::Hotelling) && self.resolution == 0 {
            v.push("resolution must be >= 1".into());
        }
        if self.kind == GameKind::Rps && (self.lattice == 0 || !self.lattice.is_multiple_of(3)) {
            v.push(format!(
                "rps lattice denominator must be a positive multiple of 3, got {}",
                self.lattice
            ));
        }
        if self.kind == GameKind::Hotelling && self.integration == 0 {
            v.push("integration resolution must be >= 1".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

/// Builds the finite joint strategy set for `spec`.
pub fn build_space(spec: &GameSpec) -> Result<JointSpace> {
    spec.validate()?;
    let per_agent: Vec<Vec<Vec<f64>>> = match spec.kind {
        GameKind::Saddle => vec![unit_grid(spec.resolution, 1); spec.n],
        GameKind::Rps => vec![simplex_lattice(spec.lattice); spec.n],
        GameKind::Hotelling => vec![unit_grid(spec.resolution, 2); spec.n],
        GameKind::BudgetAllocation => {
            let strategies: Vec<Vec<f64>> = spec
                .budget
                .strategies()?
                .into_iter()
                .map(|x| x.into_iter().map(f64::from).collect())
                .collect();
            vec![strategies; spec.n]
        }
        GameKind::Matrix => {
            let m = spec.matrix.as_ref().expect("validated");
            m.strategies.iter().map(|&k| unit_grid(k, 1)).collect()
        }
    };
    JointSpace::new(per_agent, spec.space_cap)
}

#[derive(Debug, Clone)]
enum Instance {
    Saddle,
    Rps,
    Hotelling { integration: usize },
    Budget { probs: Vec<Vec<f64>> },
    Matrix { payoffs: Vec<Vec<f64>> },
}

/// A game instance: strategy space, exact utilities and a noisy query channel.
///
/// Immutable after construction; the exact utility and loss tables are
/// computed once on first use and shared between readers.
#[derive(Debug)]
pub struct Game {
    spec: GameSpec,
    space: JointSpace,
    instance: Instance,
    utilities: OnceLock<Vec<f64>>,
    losses: OnceLock<Vec<f64>>,
}

impl Game {
    pub fn new(spec: GameSpec) -> Result<Self> {
        let space = build_space(&spec)?;
        let instance = match spec.kind {
            GameKind::Saddle => Instance::Saddle,
            GameKind::Rps => Instance::Rps,
            GameKind::Hotelling => Instance::Hotelling {
                integration: spec.integration,
            },
            GameKind::BudgetAllocation => {
                let p = spec.budget.activation_matrix();
                let probs = spec
                    .budget
                    .strategies()?
                    .iter()
                    .map(|x| budget::activation_probabilities(&p, x))
                    .collect();
                Instance::Budget { probs }
            }
            GameKind::Matrix => Instance::Matrix {
                payoffs: spec.matrix.as_ref().expect("validated").payoffs.clone(),
            },
        };
        Ok(Self {
            spec,
            space,
            instance,
            utilities: OnceLock::new(),
            losses: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn space(&self) -> &JointSpace {
        &self.space
    }

    pub fn agents(&self) -> usize {
        self.spec.n
    }

    /// Noise-free utilities of candidate `id`.
    pub fn exact_utilities(&self, id: usize) -> Vec<f64> {
        if let Some(table) = self.utilities.get() {
            let n = self.agents();
            return table[id * n..(id + 1) * n].to_vec();
        }
        self.compute_utilities(id)
    }

    fn compute_utilities(&self, id: usize) -> Vec<f64> {
        let space = &self.space;
        match &self.instance {
            Instance::Saddle => {
                let a = space.agent_coords(id, 0)[0] - 0.5;
                let b = space.agent_coords(id, 1)[0] - 0.5;
                vec![b * b - a * a, a * a - b * b]
            }
            Instance::Rps => {
                let x1 = space.agent_coords(id, 0);
                let x2 = space.agent_coords(id, 1);
                vec![rps_payoff(x1, x2), rps_payoff(x2, x1)]
            }
            Instance::Hotelling { integration } => {
                let locations: Vec<&[f64]> =
                    (0..self.agents()).map(|i| space.agent_coords(id, i)).collect();
                hotelling::market_shares(&locations, *integration)
            }
            Instance::Budget { probs } => {
                let per_agent: Vec<&[f64]> = (0..self.agents())
                    .map(|i| probs[space.strategy_index(id, i)].as_slice())
                    .collect();
                budget::expected_customers(&per_agent)
            }
            Instance::Matrix { payoffs } => payoffs.iter().map(|p| p[id]).collect(),
        }
    }

    /// Exact utilities of every candidate, row-major `len x n`.
    pub fn utility_table(&self) -> &[f64] {
        self.utilities.get_or_init(|| {
            (0..self.space.len())
                .flat_map(|id| self.compute_utilities(id))
                .collect()
        })
    }

    /// Exact Nash loss of every candidate.
    pub fn loss_table(&self) -> &[f64] {
        self.losses.get_or_init(|| {
            let n = self.agents();
            let u = self.utility_table();
            let mut losses = vec![0.0; self.space.len()];
            for agent in 0..n {
                for base in self.space.slice_bases(agent) {
                    let best = self
                        .space
                        .slice(agent, base)
                        .map(|id| u[id * n + agent])
                        .fold(f64::NEG_INFINITY, f64::max);
                    for id in self.space.slice(agent, base) {
                        losses[id] += best - u[id * n + agent];
                    }
                }
            }
            losses
        })
    }

    /// Noisy observation `u(x) + eps`, `eps ~ N(0, noise_variance I)`.
    pub fn query<R: Rng + ?Sized>(&self, id: usize, rng: &mut R) -> Vec<f64> {
        let mut y = self.exact_utilities(id);
        if self.spec.noise_variance > 0.0 {
            let noise = Normal::new(0.0, self.spec.noise_variance.sqrt())
                .expect("validated noise variance");
            for v in &mut y {
                *v += noise.sample(rng);
            }
        }
        y
    }

    /// `max_{x'_i} u_i(x'_i, x_{-i}) - u_i(x)`, always `>= 0`.
    pub fn best_response_gain(&self, agent: usize, id: usize) -> f64 {
        let own = self.exact_utilities(id)[agent];
        let best = self
            .space
            .slice(agent, id)
            .map(|other| self.exact_utilities(other)[agent])
            .fold(own, f64::max);
        best - own
    }

    /// Sum of best-response gains; zero exactly at pure Nash equilibria.
    pub fn exact_loss(&self, id: usize) -> f64 {
        if let Some(table) = self.losses.get() {
            return table[id];
        }
        (0..self.agents())
            .map(|i| self.best_response_gain(i, id))
            .sum()
    }

    /// Whether no agent can gain more than `eps` by deviating alone.
    pub fn is_eps_ne(&self, id: usize, eps: f64) -> bool {
        (0..self.agents()).all(|i| self.best_response_gain(i, id) <= eps)
    }

    /// Grid candidate of the documented analytic equilibrium, when it lies on the grid.
    pub fn known_equilibrium(&self) -> Option<usize> {
        let tol = 1e-12;
        match self.spec.kind {
            GameKind::Saddle => self.space.find(&[0.5, 0.5], tol),
            GameKind::Rps => {
                let third = 1.0 / 3.0;
                self.space.find(&[third; 6], tol)
            }
            GameKind::Hotelling if self.spec.n == 2 => self.space.find(&[0.5; 4], tol),
            _ => None,
        }
    }
}

/// Expected payoff of mixed strategy `me` against `them` in rock-paper-scissors.
fn rps_payoff(me: &[f64], them: &[f64]) -> f64 {
    let (r, p, s) = (me[0], me[1], me[2]);
    (p - s) * them[0] + (s - r) * them[1] + (r - p) * them[2]
}
