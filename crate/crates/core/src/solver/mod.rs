//! The sequential learning loop and its baselines.
//!
//! Each round refits the per-agent surrogates on schedule, recomputes
//! confidence bounds over the whole space (intersected with history when
//! envelopes are on), shrinks the region of interest, picks the next profile
//! and queries the game. Exact losses are looked up from the game's noise-free
//! oracle for the trace only; the learner never sees them.

pub mod certificates;
mod roi;
mod select;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{u_bounds_from, BoundsTable, EnvelopeState, Posterior, Region};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::gp::{fit_hyperparams, FitSettings, KernelFamily, KernelParams, SurrogateModel};
use crate::space::JointSpace;

pub use certificates::{
    certificate_constants, verify_round_certificates, CertificateInput, CertificateReport,
};
pub use roi::{update_roi, RoiState, RoiUpdate};
pub use select::{argmax_first, argmin_first, plug_in_loss, predicted_loss, select_next, Selection};

/// Selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    /// Width-reduction acquisition restricted to the region of interest.
    Arise,
    /// Width-reduction acquisition over the full space.
    AriseGlobal,
    /// Greedy minimization of the approximate loss from posterior means.
    Prediction,
    /// Prediction, exploring by total posterior standard deviation with probability epsilon.
    EpsilonGreedy,
    /// Maximum total posterior variance.
    SurLite,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Arise,
        AlgorithmKind::AriseGlobal,
        AlgorithmKind::Prediction,
        AlgorithmKind::EpsilonGreedy,
        AlgorithmKind::SurLite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Arise => "arise",
            AlgorithmKind::AriseGlobal => "arise-global",
            AlgorithmKind::Prediction => "prediction",
            AlgorithmKind::EpsilonGreedy => "epsilon-greedy",
            AlgorithmKind::SurLite => "sur-lite",
        }
    }

    pub fn is_arise(self) -> bool {
        matches!(self, AlgorithmKind::Arise | AlgorithmKind::AriseGlobal)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "arise" => Ok(AlgorithmKind::Arise),
            "arise-global" | "global" => Ok(AlgorithmKind::AriseGlobal),
            "prediction" => Ok(AlgorithmKind::Prediction),
            "epsilon-greedy" | "eps-greedy" | "epsilongreedy" => Ok(AlgorithmKind::EpsilonGreedy),
            "sur-lite" | "sur" | "surlite" => Ok(AlgorithmKind::SurLite),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// A selection rule with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Algorithm {
    pub kind: AlgorithmKind,
    /// Exploration probability (epsilon-greedy).
    pub epsilon: f64,
    /// Weight of the slice standard deviation in the approximate loss.
    pub tau: f64,
}

impl Algorithm {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            epsilon: 0.1,
            tau: 1.0,
        }
    }
}

/// When to refit kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefitSchedule {
    /// Refit every round while `t <= every_round_until`.
    pub every_round_until: usize,
    /// Afterwards refit when `t` is a multiple of this (0 disables).
    pub interval: usize,
}

impl Default for RefitSchedule {
    fn default() -> Self {
        Self {
            every_round_until: 25,
            interval: 5,
        }
    }
}

impl RefitSchedule {
    pub fn due(&self, round: usize) -> bool {
        round <= self.every_round_until || (self.interval > 0 && round.is_multiple_of(self.interval))
    }
}

/// `2 ln(n |D| T / delta)`, the confidence scaling under which the region of
/// interest keeps the equilibrium with probability at least `1 - delta`.
pub fn theoretical_beta(agents: usize, domain_size: usize, horizon: usize, delta: f64) -> Result<f64> {
    if agents == 0 || domain_size == 0 || horizon == 0 {
        return Err(Error::Domain(
            "theoretical beta needs positive n, |D| and T".into(),
        ));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let beta = 2.0 * ((agents as f64) * (domain_size as f64) * (horizon as f64) / delta).ln();
    if beta <= 0.0 {
        log::warn!("theoretical beta is {beta}; bounds collapse to the posterior mean");
    }
    Ok(beta.max(0.0))
}

/// Per-run solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub horizon: usize,
    pub init_count: usize,
    pub beta: f64,
    pub envelopes: bool,
    /// Restart the envelope intersection whenever a refit changes hyperparameters.
    pub reset_envelope_on_refit: bool,
    pub kernel: KernelFamily,
    pub initial_lengthscale: f64,
    pub initial_signal_variance: f64,
    /// GP observation noise; `None` uses the game's noise variance.
    pub gp_noise_variance: Option<f64>,
    pub center_targets: bool,
    pub refit: RefitSchedule,
    pub fit_budget: usize,
    pub fit_noise: bool,
    /// Keep every round's active ROI set in the run output.
    pub record_roi_sets: bool,
    /// Record per-round wall time; off keeps trace files byte-identical across repeats.
    pub record_wall_time: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            horizon: 100,
            init_count: 10,
            beta: 2.0,
            envelopes: true,
            reset_envelope_on_refit: true,
            kernel: KernelFamily::SquaredExponential,
            initial_lengthscale: 0.5,
            initial_signal_variance: 1.0,
            gp_noise_variance: None,
            center_targets: true,
            refit: RefitSchedule::default(),
            fit_budget: 80,
            fit_noise: false,
            record_roi_sets: false,
            record_wall_time: false,
        }
    }
}

impl SolverConfig {
    pub fn fit_settings(&self) -> FitSettings {
        FitSettings {
            budget: self.fit_budget,
            fit_noise: self.fit_noise,
            ..FitSettings::default()
        }
    }
}

/// Everything the learner knows at a given round.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub round: usize,
    pub algorithm: Algorithm,
    pub beta: f64,
    pub models: Vec<SurrogateModel>,
    /// Posterior over the full space for the current round.
    pub posteriors: Vec<Posterior>,
    /// Bounds over the full space for the current round.
    pub bounds: Option<BoundsTable>,
    pub envelope: EnvelopeState,
    pub roi: RoiState,
    /// Queried candidates and observed utilities, initial design first.
    pub observations: Vec<(usize, Vec<f64>)>,
}

impl SolverState {
    pub fn new(config: &SolverConfig, algorithm: Algorithm, game: &Game) -> Result<Self> {
        let space = game.space();
        let noise = config
            .gp_noise_variance
            .unwrap_or(game.spec().noise_variance);
        let params = KernelParams::isotropic(
            config.kernel,
            config.initial_lengthscale,
            config.initial_signal_variance,
            noise,
        );
        let models = (0..game.agents())
            .map(|_| SurrogateModel::new(params.clone(), space.dim(), config.center_targets))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            round: 0,
            algorithm,
            beta: config.beta,
            models,
            posteriors: Vec::new(),
            bounds: None,
            envelope: EnvelopeState::new(config.envelopes),
            roi: RoiState::full(space.len()),
            observations: Vec::new(),
        })
    }

    /// Appends one observation to every agent's surrogate.
    pub fn observe(&mut self, space: &JointSpace, id: usize, y: &[f64]) -> Result<()> {
        if y.len() != self.models.len() {
            return Err(Error::Dimension {
                expected: self.models.len(),
                got: y.len(),
            });
        }
        let x = space.coords(id);
        for (model, &yi) in self.models.iter_mut().zip(y) {
            model.update(x, yi)?;
        }
        self.observations.push((id, y.to_vec()));
        Ok(())
    }

    /// Refits every agent's hyperparameters; returns warnings.
    pub fn refit(&mut self, settings: &FitSettings) -> Vec<String> {
        let mut warnings = Vec::new();
        for (agent, model) in self.models.iter_mut().enumerate() {
            let outcome = fit_hyperparams(
                model.inputs(),
                model.dim(),
                model.targets(),
                model.params(),
                model.centers_targets(),
                settings,
            );
            if outcome.warning.is_some() {
                warnings.push(format!("fit-failed-agent{agent}"));
            }
            if outcome.params != *model.params() {
                match model.with_params(outcome.params) {
                    Ok(m) => *model = m,
                    Err(e) => warnings.push(format!("refit-rejected-agent{agent}:{e}")),
                }
            }
        }
        warnings
    }

    /// Recomputes posteriors and full-space bounds for `round`, then shrinks the ROI.
    /// Returns whether the ROI fallback fired.
    pub fn refresh(&mut self, space: &JointSpace, round: usize) -> Result<bool> {
        self.round = round;
        self.posteriors = self
            .models
            .iter()
            .map(|m| Posterior::of(m, space))
            .collect();
        let u = self
            .posteriors
            .iter()
            .map(|p| u_bounds_from(p, self.beta))
            .collect::<Result<Vec<_>>>()?;
        let u = self.envelope.apply(u);
        let table = BoundsTable::compose(round, self.beta, u, space, Region::full(space.len()))?;
        let update = update_roi(&table, &self.roi)?;
        self.roi = update.state;
        self.bounds = Some(table);
        Ok(update.fallback)
    }

    /// Final recommendation.
    ///
    /// ARISE variants return the ROI member with the smallest `lcb_f`; the
    /// baselines return the minimizer of their own loss estimate.
    pub fn report(&self, space: &JointSpace) -> Result<usize> {
        let bounds = self
            .bounds
            .as_ref()
            .ok_or_else(|| Error::Logic("report requested before any bounds".into()))?;
        let found = match self.algorithm.kind {
            AlgorithmKind::Arise | AlgorithmKind::AriseGlobal => argmin_first(
                self.roi.active.ids().iter().map(|&id| (id, bounds.f.lcb[id])),
            ),
            AlgorithmKind::Prediction | AlgorithmKind::EpsilonGreedy => {
                let f_hat = predicted_loss(&self.posteriors, space, self.algorithm.tau);
                argmin_first(f_hat.into_iter().enumerate())
            }
            AlgorithmKind::SurLite => {
                argmin_first(plug_in_loss(&self.posteriors, space).into_iter().enumerate())
            }
        };
        found
            .map(|(id, _)| id)
            .ok_or_else(|| Error::Logic("nothing to report".into()))
    }

    /// Sum over agents of the empirical information gain.
    pub fn info_gains(&self) -> Vec<f64> {
        self.models
            .iter()
            .map(|m| m.empirical_info_gain().unwrap_or(f64::NAN))
            .collect()
    }
}

/// One round of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub round: usize,
    pub candidate: usize,
    pub coords: Vec<f64>,
    /// Noise-free loss of the queried candidate.
    pub f_exact: f64,
    pub min_f_exact: f64,
    pub roi_size: usize,
    /// `min ucb_f - min lcb_f` over the ROI.
    pub ci_width: f64,
    /// Per-agent empirical information gain after this round's observation.
    pub info_gain: Vec<f64>,
    pub beta: f64,
    pub wall_ms: f64,
    pub warnings: Vec<String>,
    /// Selection criterion value at the chosen candidate.
    pub acquisition: f64,
    /// `ucb_f - lcb_f` at the chosen candidate under the selection bounds.
    pub width_at_selection: f64,
    /// `(n + 1) sum_i 2 sqrt(beta) sigma_i(x^t)`.
    pub chain_bound: f64,
    pub eps_draw: Option<f64>,
    pub explored: bool,
    pub roi_v_matches_global: bool,
}

impl TraceRecord {
    pub fn info_gain_total(&self) -> f64 {
        self.info_gain.iter().sum()
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SolverState,
    pub trace: Vec<TraceRecord>,
    pub init_ids: Vec<usize>,
    pub report: usize,
    pub report_loss: f64,
    /// Active ROI after each round's update (when recorded), final update last.
    pub roi_sets: Option<Vec<Vec<usize>>>,
}

/// Runs one learner on `game` for `config.horizon` rounds. Deterministic in `seed`.
///
/// Observation noise and initial design use one random stream, the
/// algorithm's own randomness another, so baselines see identical noise.
pub fn run(config: &SolverConfig, algorithm: Algorithm, game: &Game, seed: u64) -> Result<RunOutput> {
    if config.horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    if config.init_count == 0 {
        return Err(Error::Config("init_count must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&algorithm.epsilon) {
        return Err(Error::Config("epsilon must lie in [0, 1]".into()));
    }
    let space = game.space();
    let losses = game.loss_table();
    let n = game.agents();
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(seed);
    policy_rng.set_stream(1);

    let mut state = SolverState::new(config, algorithm, game)?;
    let init = config.init_count.min(space.len());
    let init_ids: Vec<usize> = rand::seq::index::sample(&mut noise_rng, space.len(), init).into_vec();
    for &id in &init_ids {
        let y = game.query(id, &mut noise_rng);
        state.observe(space, id, &y)?;
    }

    let fit = config.fit_settings();
    let mut trace = Vec::with_capacity(config.horizon);
    let mut roi_sets = config.record_roi_sets.then(Vec::new);
    let mut min_f = f64::INFINITY;
    let mut collapsed_seen = 0;

    for round in 1..=config.horizon {
        let started = Instant::now();
        let mut warnings = Vec::new();
        if config.refit.due(round) {
            let before: Vec<_> = state.models.iter().map(|m| m.params().clone()).collect();
            warnings.extend(state.refit(&fit));
            if config.reset_envelope_on_refit
                && state.models.iter().zip(&before).any(|(m, b)| m.params() != b) {
                state.envelope.reset();
            }
        }
        if state.refresh(space, round)? {
            warnings.push("roi-fallback".to_string());
        }
        if state.envelope.collapsed > collapsed_seen {
            warnings.push(format!(
                "envelope-collapsed={}",
                state.envelope.collapsed - collapsed_seen
            ));
            collapsed_seen = state.envelope.collapsed;
        }
        if let Some(sets) = roi_sets.as_mut() {
            sets.push(state.roi.active.ids().to_vec());
        }

        let selection = select_next(&state, space, &mut policy_rng)?;
        let id = selection.id;
        let bounds = state.bounds.as_ref().expect("refreshed");
        let roi_ids = state.roi.active.ids();
        let ci_width = bounds.ci_width_over(roi_ids);
        let chain_bound = (n as f64 + 1.0)
            * state
                .posteriors
                .iter()
                .map(|p| 2.0 * state.beta.sqrt() * p.sd[id])
                .sum::<f64>();
        let roi_size = roi_ids.len();

        let y = game.query(id, &mut noise_rng);
        let jitters_before: Vec<f64> = state.models.iter().map(|m| m.jitter()).collect();
        state.observe(space, id, &y)?;
        for (agent, (m, before)) in state.models.iter().zip(jitters_before).enumerate() {
            if m.jitter() > before {
                warnings.push(format!("jitter-agent{agent}={:e}", m.jitter()));
            }
        }

        let f_exact = losses[id];
        min_f = min_f.min(f_exact);
        if !selection.roi_v_matches_global {
            log::debug!("round {round}: partial maxima over the ROI differ from the full space");
        }
        trace.push(TraceRecord {
            round,
            candidate: id,
            coords: space.coords(id).to_vec(),
            f_exact,
            min_f_exact: min_f,
            roi_size,
            ci_width,
            info_gain: state.info_gains(),
            beta: state.beta,
            wall_ms: if config.record_wall_time {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
            warnings,
            acquisition: selection.score,
            width_at_selection: selection.width_at_selection,
            chain_bound,
            eps_draw: selection.eps_draw,
            explored: selection.explored,
            roi_v_matches_global: selection.roi_v_matches_global,
        });
    }

    state.refresh(space, config.horizon + 1)?;
    if let Some(sets) = roi_sets.as_mut() {
        sets.push(state.roi.active.ids().to_vec());
    }
    let report = state.report(space)?;
    Ok(RunOutput {
        report_loss: losses[report],
        report,
        state,
        trace,
        init_ids,
        roi_sets,
    })
}
