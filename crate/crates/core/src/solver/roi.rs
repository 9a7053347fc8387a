use crate::bounds::{BoundsTable, Region};
use crate::error::{Error, Result};

/// Active candidate set, shrinking hierarchically from the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiState {
    pub active: Region,
    /// Active-set size after each update.
    pub history: Vec<usize>,
    /// `min(min_x ucb_f(x), 0)` used at each update.
    pub thresholds: Vec<f64>,
}

impl RoiState {
    pub fn full(len: usize) -> Self {
        Self {
            active: Region::full(len),
            history: Vec::new(),
            thresholds: Vec::new(),
        }
    }
}

/// Result of one ROI update; `fallback` is set when the filter emptied the set.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiUpdate {
    pub state: RoiState,
    pub fallback: bool,
}

/// Keeps the previously active candidates whose `lcb_f <= min(min ucb_f, 0)`.
///
/// `bounds` must be composed over the full space, since the threshold is the
/// global minimum of `ucb_f`. If nothing survives, the previous member with
/// the smallest `lcb_f` is kept.
pub fn update_roi(bounds: &BoundsTable, prev: &RoiState) -> Result<RoiUpdate> {
    if !bounds.region.is_full() {
        return Err(Error::Logic(
            "ROI threshold needs bounds composed over the full space".into(),
        ));
    }
    let threshold = bounds.min_ucb_f().min(0.0);
    let len = prev.active.universe();
    let kept: Vec<usize> = prev
        .active
        .ids()
        .iter()
        .copied()
        .filter(|&id| bounds.f.lcb[id] <= threshold)
        .collect();
    let fallback = kept.is_empty();
    let active = if fallback {
        let best = prev
            .active
            .ids()
            .iter()
            .copied()
            .fold(None::<usize>, |acc, id| match acc {
                Some(b) if bounds.f.lcb[b] <= bounds.f.lcb[id] => Some(b),
                _ => Some(id),
            })
            .ok_or_else(|| Error::Logic("previous ROI is empty".into()))?;
        log::warn!("ROI emptied at round {}; keeping candidate {best}", bounds.round);
        Region::from_ids(len, [best])
    } else {
        Region::from_ids(len, kept)
    };
    let mut state = prev.clone();
    state.history.push(active.len());
    state.thresholds.push(threshold);
    state.active = active;
    Ok(RoiUpdate { state, fallback })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Interval;

    fn table(lcb: Vec<f64>, ucb: Vec<f64>) -> BoundsTable {
        let n = lcb.len();
        BoundsTable {
            round: 1,
            beta: 1.0,
            u: vec![],
            v: vec![],
            f: Interval { lcb, ucb },
            region: Region::full(n),
        }
    }

    #[test]
    fn threshold_capped_at_zero() {
        let t = table(vec![-1.0, 0.5, -0.2], vec![0.3, 0.9, 0.4]);
        let up = update_roi(&t, &RoiState::full(3)).unwrap();
        assert_eq!(up.state.active.ids(), &[0, 2]);
        assert_eq!(up.state.thresholds, vec![0.0]);
        assert!(!up.fallback);
    }

    #[test]
    fn negative_threshold_from_ucb() {
        let t = table(vec![-1.0, -0.4, -0.2], vec![-0.3, 0.9, 0.4]);
        let up = update_roi(&t, &RoiState::full(3)).unwrap();
        assert_eq!(up.state.active.ids(), &[0, 1]);
    }

    #[test]
    fn hierarchical_filtering_only_shrinks() {
        let prev = RoiState {
            active: Region::from_ids(3, [1, 2]),
            history: vec![2],
            thresholds: vec![0.0],
        };
        let t = table(vec![-1.0, -0.5, 0.2], vec![1.0, 1.0, 1.0]);
        let up = update_roi(&t, &prev).unwrap();
        assert_eq!(up.state.active.ids(), &[1]);
        assert_eq!(up.state.history, vec![2, 1]);
    }

    #[test]
    fn empty_result_falls_back_to_lowest_lcb() {
        let t = table(vec![0.5, 0.2, 0.2], vec![1.0, 1.0, 1.0]);
        let up = update_roi(&t, &RoiState::full(3)).unwrap();
        assert!(up.fallback);
        assert_eq!(up.state.active.ids(), &[1]);
    }
}
