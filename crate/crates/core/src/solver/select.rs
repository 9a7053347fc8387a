//! Next-query rules for ARISE and the baselines.

use rand::Rng;

use super::{AlgorithmKind, SolverState};
use crate::bounds::{acquisition, BoundsTable, Posterior};
use crate::error::{Error, Result};
use crate::space::JointSpace;

/// Outcome of one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub id: usize,
    /// The criterion value at `id` (acquisition, estimated loss or total uncertainty).
    pub score: f64,
    /// Uniform draw that decided exploration (epsilon-greedy only).
    pub eps_draw: Option<f64>,
    pub explored: bool,
    /// Whether partial-maximum bounds over the ROI match those over the full space on the ROI.
    pub roi_v_matches_global: bool,
    /// `ucb_f - lcb_f` at `id` under the bounds used for selection.
    pub width_at_selection: f64,
}

/// First index of the largest value; NaNs never win.
pub fn argmax_first(values: impl IntoIterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (id, v) in values {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((bid, bv)) if bv > v || (bv == v && bid < id) => {}
            _ => best = Some((id, v)),
        }
    }
    best
}

/// First index of the smallest value.
pub fn argmin_first(values: impl IntoIterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    argmax_first(values.into_iter().map(|(id, v)| (id, -v))).map(|(id, v)| (id, -v))
}

/// Approximate loss `max_i [mean_slice(mu_i) + tau sd_slice(mu_i) - mu_i(x)]`
/// at every candidate, with slice moments taken over agent `i`'s own strategies.
pub fn predicted_loss(posteriors: &[Posterior], space: &JointSpace, tau: f64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; space.len()];
    for (agent, post) in posteriors.iter().enumerate() {
        let count = space.strategy_count(agent) as f64;
        for base in space.slice_bases(agent) {
            let mean = space.slice(agent, base).map(|id| post.mean[id]).sum::<f64>() / count;
            let var = space
                .slice(agent, base)
                .map(|id| (post.mean[id] - mean).powi(2))
                .sum::<f64>()
                / count;
            let level = mean + tau * var.sqrt();
            for id in space.slice(agent, base) {
                out[id] = out[id].max(level - post.mean[id]);
            }
        }
    }
    out
}

/// Plug-in loss `sum_i max_slice(mu_i) - mu_i(x)` from posterior means.
pub fn plug_in_loss(posteriors: &[Posterior], space: &JointSpace) -> Vec<f64> {
    let mut out = vec![0.0; space.len()];
    for (agent, post) in posteriors.iter().enumerate() {
        for base in space.slice_bases(agent) {
            let best = space
                .slice(agent, base)
                .map(|id| post.mean[id])
                .fold(f64::NEG_INFINITY, f64::max);
            for id in space.slice(agent, base) {
                out[id] += best - post.mean[id];
            }
        }
    }
    out
}

fn total_sd(posteriors: &[Posterior], id: usize) -> f64 {
    posteriors.iter().map(|p| p.sd[id]).sum()
}

fn total_var(posteriors: &[Posterior], id: usize) -> f64 {
    posteriors.iter().map(|p| p.sd[id] * p.sd[id]).sum()
}

fn width(table: &BoundsTable, id: usize) -> f64 {
    table.f.ucb[id] - table.f.lcb[id]
}

/// Chooses the next candidate to query. Ties go to the lowest id.
///
/// Requires [`SolverState::refresh`] to have run this round.
pub fn select_next<R: Rng + ?Sized>(
    state: &SolverState,
    space: &JointSpace,
    rng: &mut R,
) -> Result<Selection> {
    let full = state
        .bounds
        .as_ref()
        .ok_or_else(|| Error::Logic("select_next called before bounds were computed".into()))?;
    let posteriors = &state.posteriors;
    let all = || 0..space.len();
    let pick = |found: Option<(usize, f64)>| {
        found.ok_or_else(|| Error::Logic("no selectable candidate".into()))
    };
    let plain = |id: usize, score: f64| Selection {
        id,
        score,
        eps_draw: None,
        explored: false,
        roi_v_matches_global: true,
        width_at_selection: width(full, id),
    };

    match state.algorithm.kind {
        AlgorithmKind::Arise => {
            let roi = &state.roi.active;
            if roi.is_empty() {
                return Err(Error::Logic("empty ROI".into()));
            }
            let restricted;
            let table = if roi.is_full() {
                full
            } else {
                restricted = full.restricted(space, roi.clone())?;
                &restricted
            };
            let alpha = acquisition(table, roi)?;
            let (id, score) = pick(argmax_first(alpha))?;
            Ok(Selection {
                id,
                score,
                eps_draw: None,
                explored: false,
                roi_v_matches_global: table.v_agrees_with(full, roi.ids()),
                width_at_selection: width(table, id),
            })
        }
        AlgorithmKind::AriseGlobal => {
            let alpha = acquisition(full, &full.region)?;
            let (id, score) = pick(argmax_first(alpha))?;
            Ok(plain(id, score))
        }
        AlgorithmKind::Prediction => {
            let f_hat = predicted_loss(posteriors, space, state.algorithm.tau);
            let (id, score) = pick(argmin_first(all().map(|id| (id, f_hat[id]))))?;
            Ok(plain(id, score))
        }
        AlgorithmKind::EpsilonGreedy => {
            let draw: f64 = rng.random();
            if draw < state.algorithm.epsilon {
                let (id, score) = pick(argmax_first(all().map(|id| (id, total_sd(posteriors, id)))))?;
                Ok(Selection {
                    eps_draw: Some(draw),
                    explored: true,
                    ..plain(id, score)
                })
            } else {
                let f_hat = predicted_loss(posteriors, space, state.algorithm.tau);
                let (id, score) = pick(argmin_first(all().map(|id| (id, f_hat[id]))))?;
                Ok(Selection {
                    eps_draw: Some(draw),
                    ..plain(id, score)
                })
            }
        }
        AlgorithmKind::SurLite => {
            let (id, score) = pick(argmax_first(all().map(|id| (id, total_var(posteriors, id)))))?;
            Ok(plain(id, score))
        }
    }
}
