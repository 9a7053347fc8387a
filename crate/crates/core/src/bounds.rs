//! Confidence bounds on utilities, partial maxima and the Nash loss.
//!
//! For agent `i` with posterior `mu_i, sigma_i` and scaling `beta`:
//!
//! ```text
//! ucb_u_i(x)    = mu_i(x) + sqrt(beta) sigma_i(x)        lcb_u_i likewise with -
//! ucb_v_i(x, S) = max { ucb_u_i(x'_i, x_-i) : (x'_i, x_-i) in S }
//! lcb_v_i(x, S) = max { lcb_u_i(x'_i, x_-i) : (x'_i, x_-i) in S }
//! ucb_f(x, S)   = sum_i ucb_v_i(x, S) - lcb_u_i(x)
//! lcb_f(x, S)   = sum_i lcb_v_i(x, S) - ucb_u_i(x)
//! alpha(x, S)   = ucb_f(x, S) - lcb_f(x, S)
//! ```
//!
//! Partial-maximum entries whose slice misses `S` are undefined and stored as
//! NaN; composing the loss bounds from such an entry is an error.

use crate::error::{Error, Result};
use crate::gp::SurrogateModel;
use crate::space::JointSpace;

/// A subset of candidate ids with O(1) membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    ids: Vec<usize>,
    mask: Vec<bool>,
}

impl Region {
    /// Every candidate of a space with `len` candidates.
    pub fn full(len: usize) -> Self {
        Self {
            ids: (0..len).collect(),
            mask: vec![true; len],
        }
    }

    /// Region from arbitrary ids (deduplicated and sorted).
    pub fn from_ids(len: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = vec![false; len];
        for id in ids {
            mask[id] = true;
        }
        let ids = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Self { ids, mask }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.mask.get(id).copied().unwrap_or(false)
    }

    pub fn is_full(&self) -> bool {
        self.ids.len() == self.mask.len()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.ids.iter().all(|&id| other.contains(id))
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }
}

/// Posterior means and standard deviations of one agent over every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Posterior {
    pub fn of(model: &SurrogateModel, space: &JointSpace) -> Self {
        let (mean, var) = model.posterior_batch(space.all_coords());
        Self {
            mean,
            sd: var.into_iter().map(f64::sqrt).collect(),
        }
    }
}

/// Lower and upper bounds on one agent's quantity over every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lcb: Vec<f64>,
    pub ucb: Vec<f64>,
}

impl Interval {
    pub fn width(&self, id: usize) -> f64 {
        self.ucb[id] - self.lcb[id]
    }
}

/// `mu -/+ sqrt(beta) sigma` over every candidate.
pub fn u_bounds_from(posterior: &Posterior, beta: f64) -> Result<Interval> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Domain(format!("beta must be >= 0, got {beta}")));
    }
    let scale = beta.sqrt();
    let lcb = posterior
        .mean
        .iter()
        .zip(&posterior.sd)
        .map(|(m, s)| m - scale * s)
        .collect();
    let ucb = posterior
        .mean
        .iter()
        .zip(&posterior.sd)
        .map(|(m, s)| m + scale * s)
        .collect();
    Ok(Interval { lcb, ucb })
}

/// Utility confidence bounds of `model` over `space`.
pub fn u_bounds(model: &SurrogateModel, space: &JointSpace, beta: f64) -> Result<Interval> {
    u_bounds_from(&Posterior::of(model, space), beta)
}

/// Partial-maximum bounds of agent `agent` over `region`; NaN where the slice misses it.
pub fn v_bounds(u: &Interval, space: &JointSpace, region: &Region, agent: usize) -> Interval {
    let len = space.len();
    let mut lcb = vec![f64::NAN; len];
    let mut ucb = vec![f64::NAN; len];
    for base in space.slice_bases(agent) {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::NEG_INFINITY;
        let mut any = false;
        for id in space.slice(agent, base) {
            if region.contains(id) {
                any = true;
                hi = hi.max(u.ucb[id]);
                lo = lo.max(u.lcb[id]);
            }
        }
        if any {
            for id in space.slice(agent, base) {
                ucb[id] = hi;
                lcb[id] = lo;
            }
        }
    }
    Interval { lcb, ucb }
}

/// Loss bounds at the `requested` candidates; NaN elsewhere.
pub fn f_bounds(u: &[Interval], v: &[Interval], requested: &[usize]) -> Result<Interval> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::Logic("u and v bounds must cover the same agents".into()));
    }
    let len = u[0].lcb.len();
    let mut lcb = vec![f64::NAN; len];
    let mut ucb = vec![f64::NAN; len];
    for &id in requested {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for (ui, vi) in u.iter().zip(v) {
            if vi.ucb[id].is_nan() || vi.lcb[id].is_nan() {
                return Err(Error::Logic(format!(
                    "partial-maximum bound undefined at candidate {id}"
                )));
            }
            hi += vi.ucb[id] - ui.lcb[id];
            lo += vi.lcb[id] - ui.ucb[id];
        }
        ucb[id] = hi;
        lcb[id] = lo;
    }
    Ok(Interval { lcb, ucb })
}

/// Bounds at every level for one round, with partial maxima taken over `region`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub round: usize,
    pub beta: f64,
    pub u: Vec<Interval>,
    pub v: Vec<Interval>,
    pub f: Interval,
    pub region: Region,
}

impl BoundsTable {
    /// Composes v and f bounds over `region` from utility bounds.
    pub fn compose(
        round: usize,
        beta: f64,
        u: Vec<Interval>,
        space: &JointSpace,
        region: Region,
    ) -> Result<Self> {
        let v: Vec<Interval> = u
            .iter()
            .enumerate()
            .map(|(i, ui)| v_bounds(ui, space, &region, i))
            .collect();
        let f = f_bounds(&u, &v, region.ids())?;
        Ok(Self {
            round,
            beta,
            u,
            v,
            f,
            region,
        })
    }

    /// The same utility bounds recomposed over a different region.
    pub fn restricted(&self, space: &JointSpace, region: Region) -> Result<Self> {
        Self::compose(self.round, self.beta, self.u.clone(), space, region)
    }

    /// Smallest upper loss bound over the region.
    pub fn min_ucb_f(&self) -> f64 {
        self.region
            .ids()
            .iter()
            .map(|&id| self.f.ucb[id])
            .fold(f64::INFINITY, f64::min)
    }

    /// `min ucb_f - min lcb_f` over `ids`.
    pub fn ci_width_over(&self, ids: &[usize]) -> f64 {
        let min_u = ids.iter().map(|&id| self.f.ucb[id]).fold(f64::INFINITY, f64::min);
        let min_l = ids.iter().map(|&id| self.f.lcb[id]).fold(f64::INFINITY, f64::min);
        min_u - min_l
    }

    /// Whether the partial-maximum bounds agree with `other`'s at `ids`.
    pub fn v_agrees_with(&self, other: &BoundsTable, ids: &[usize]) -> bool {
        ids.iter().all(|&id| {
            self.v.iter().zip(&other.v).all(|(a, b)| {
                a.ucb[id] == b.ucb[id] && a.lcb[id] == b.lcb[id]
            })
        })
    }
}

/// Width-reduction acquisition `ucb_f - lcb_f` at each member of `region`.
pub fn acquisition(bounds: &BoundsTable, region: &Region) -> Result<Vec<(usize, f64)>> {
    if bounds.region != *region {
        return Err(Error::Logic(
            "acquisition region differs from the region the bounds were composed over".into(),
        ));
    }
    Ok(region
        .ids()
        .iter()
        .map(|&id| (id, bounds.f.ucb[id] - bounds.f.lcb[id]))
        .collect())
}

/// Intersects `current` with `previous` entrywise.
///
/// Disjoint intervals collapse onto the endpoint of `previous` nearest to
/// `current`, so the result always lies inside `previous`.
pub fn intersect(previous: &Interval, current: &Interval) -> Interval {
    let mut lcb = Vec::with_capacity(current.lcb.len());
    let mut ucb = Vec::with_capacity(current.ucb.len());
    for k in 0..current.lcb.len() {
        let (pl, pu) = (previous.lcb[k], previous.ucb[k]);
        let (cl, cu) = (current.lcb[k], current.ucb[k]);
        let mut lo = pl.max(cl);
        let mut hi = pu.min(cu);
        if lo > hi {
            let edge = if cl > pu { pu } else { pl };
            lo = edge;
            hi = edge;
        }
        lcb.push(lo);
        ucb.push(hi);
    }
    Interval { lcb, ucb }
}

/// Running intersection of historical utility confidence intervals.
#[derive(Debug, Clone, Default)]
pub struct EnvelopeState {
    pub enabled: bool,
    previous: Option<Vec<Interval>>,
    /// Entries collapsed because the new interval missed the historical one.
    pub collapsed: usize,
}

impl EnvelopeState {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            previous: None,
            collapsed: 0,
        }
    }

    /// Intersects utility bounds with history and records the result.
    pub fn apply(&mut self, current: Vec<Interval>) -> Vec<Interval> {
        if !self.enabled {
            return current;
        }
        let out = match &self.previous {
            None => current,
            Some(prev) => prev
                .iter()
                .zip(&current)
                .map(|(p, c)| {
                    self.collapsed += p
                        .lcb
                        .iter()
                        .zip(&p.ucb)
                        .zip(c.lcb.iter().zip(&c.ucb))
                        .filter(|((pl, pu), (cl, cu))| pl.max(**cl) > pu.min(**cu))
                        .count();
                    intersect(p, c)
                })
                .collect(),
        };
        self.previous = Some(out.clone());
        out
    }

    /// Forgets history; the next round starts a new intersection.
    pub fn reset(&mut self) {
        self.previous = None;
    }

    pub fn previous(&self) -> Option<&[Interval]> {
        self.previous.as_deref()
    }
}

/// Applies the envelope at the utility level, then recomposes v and f.
pub fn monotone_envelope(
    state: &mut EnvelopeState,
    current: &BoundsTable,
    space: &JointSpace,
) -> Result<BoundsTable> {
    let u = state.apply(current.u.clone());
    BoundsTable::compose(current.round, current.beta, u, space, current.region.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelFamily, KernelParams};
    use crate::space::{unit_grid, DEFAULT_SPACE_CAP};

    fn grid(k: usize) -> JointSpace {
        JointSpace::new(vec![unit_grid(k, 1), unit_grid(k, 1)], DEFAULT_SPACE_CAP).unwrap()
    }

    fn prior_model(dim: usize) -> SurrogateModel {
        SurrogateModel::new(
            KernelParams::isotropic(KernelFamily::SquaredExponential, 0.3, 1.0, 0.01),
            dim,
            false,
        )
        .unwrap()
    }

    fn prior_table(space: &JointSpace, beta: f64) -> BoundsTable {
        let u = (0..2)
            .map(|_| u_bounds(&prior_model(2), space, beta).unwrap())
            .collect();
        BoundsTable::compose(1, beta, u, space, Region::full(space.len())).unwrap()
    }

    #[test]
    fn zero_beta_collapses_to_mean() {
        let space = grid(5);
        let mut m = prior_model(2);
        m.update(&[0.25, 0.5], 0.3).unwrap();
        let b = u_bounds(&m, &space, 0.0).unwrap();
        assert_eq!(b.lcb, b.ucb);
    }

    #[test]
    fn prior_bounds() {
        let space = grid(4);
        let t = prior_table(&space, 4.0);
        assert!(t.u[0].ucb.iter().all(|&v| (v - 2.0).abs() < 1e-12));
        assert!(t.u[0].lcb.iter().all(|&v| (v + 2.0).abs() < 1e-12));
        assert!(t.f.ucb.iter().all(|&v| (v - 8.0).abs() < 1e-12));
        assert!(t.f.lcb.iter().all(|&v| (v + 8.0).abs() < 1e-12));
        let region = Region::full(space.len());
        let alpha = acquisition(&t, &region).unwrap();
        assert!(alpha.iter().all(|(_, a)| (a - 16.0).abs() < 1e-12));
    }

    #[test]
    fn width_is_two_root_beta_sigma() {
        let space = grid(6);
        let mut m = prior_model(2);
        m.update(&[0.2, 0.4], 0.1).unwrap();
        m.update(&[0.8, 0.6], -0.2).unwrap();
        let post = Posterior::of(&m, &space);
        let b = u_bounds_from(&post, 2.5).unwrap();
        for id in 0..space.len() {
            let expected = 2.0 * 2.5f64.sqrt() * post.sd[id];
            assert!((b.width(id) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_max_over_two_point_slice() {
        let space = grid(2);
        // Agent 0's slice with agent 1 at strategy 0: ids 0 and 2.
        let u = Interval {
            lcb: vec![0.1, 0.0, 0.4, 0.0],
            ucb: vec![0.1, 0.0, 0.4, 0.0],
        };
        let v = v_bounds(&u, &space, &Region::full(4), 0);
        assert_eq!((v.lcb[0], v.ucb[0]), (0.4, 0.4));
        assert_eq!((v.lcb[2], v.ucb[2]), (0.4, 0.4));
    }

    #[test]
    fn singleton_region_and_undefined_entries() {
        let space = grid(3);
        let u = Interval {
            lcb: (0..9).map(|k| k as f64 - 1.0).collect(),
            ucb: (0..9).map(|k| k as f64 + 1.0).collect(),
        };
        let region = Region::from_ids(9, [4]);
        let v = v_bounds(&u, &space, &region, 1);
        assert_eq!((v.lcb[4], v.ucb[4]), (u.lcb[4], u.ucb[4]));
        // Candidate 0 shares no agent-1 slice with candidate 4.
        assert!(v.ucb[0].is_nan());
        let us = vec![u.clone(), u.clone()];
        let vs = vec![v_bounds(&u, &space, &region, 0), v];
        assert!(matches!(f_bounds(&us, &vs, &[0]), Err(Error::Logic(_))));
        assert!(f_bounds(&us, &vs, &[4]).is_ok());
    }

    #[test]
    fn exact_means_give_exact_loss() {
        use crate::game::{Game, GameSpec};
        let game = Game::new(GameSpec::saddle().with_resolution(7)).unwrap();
        let space = game.space();
        let u: Vec<Interval> = (0..2)
            .map(|i| {
                let vals: Vec<f64> = (0..space.len()).map(|id| game.exact_utilities(id)[i]).collect();
                Interval {
                    lcb: vals.clone(),
                    ucb: vals,
                }
            })
            .collect();
        let t = BoundsTable::compose(1, 0.0, u, space, Region::full(space.len())).unwrap();
        for id in 0..space.len() {
            assert!((t.f.ucb[id] - game.exact_loss(id)).abs() < 1e-12);
            assert!((t.f.lcb[id] - game.exact_loss(id)).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_identity_and_tighter_history() {
        let a = Interval {
            lcb: vec![-1.0, 0.0],
            ucb: vec![1.0, 2.0],
        };
        assert_eq!(intersect(&a, &a), a);
        let wide = Interval {
            lcb: vec![-5.0, -5.0],
            ucb: vec![5.0, 5.0],
        };
        assert_eq!(intersect(&a, &wide), a);
    }

    #[test]
    fn envelope_disjoint_collapses_inside_previous() {
        let prev = Interval {
            lcb: vec![0.0, 0.0],
            ucb: vec![1.0, 1.0],
        };
        let cur = Interval {
            lcb: vec![2.0, -3.0],
            ucb: vec![3.0, -2.0],
        };
        let out = intersect(&prev, &cur);
        assert_eq!(out.lcb, vec![1.0, 0.0]);
        assert_eq!(out.ucb, vec![1.0, 0.0]);
    }

    #[test]
    fn envelope_recomposes_nested_tables() {
        let space = grid(3);
        let mut state = EnvelopeState::new(true);
        let first = prior_table(&space, 4.0);
        let e1 = monotone_envelope(&mut state, &first, &space).unwrap();
        assert_eq!(e1, first);
        let mut m = prior_model(2);
        m.update(&[0.5, 0.5], 0.0).unwrap();
        let u = vec![
            u_bounds(&m, &space, 4.0).unwrap(),
            u_bounds(&prior_model(2), &space, 4.0).unwrap(),
        ];
        let second = BoundsTable::compose(2, 4.0, u, &space, Region::full(9)).unwrap();
        let e2 = monotone_envelope(&mut state, &second, &space).unwrap();
        for id in 0..9 {
            assert!(e2.f.ucb[id] <= e1.f.ucb[id] + 1e-15);
            assert!(e2.f.lcb[id] >= e1.f.lcb[id] - 1e-15);
            assert!(e2.f.lcb[id] <= e2.f.ucb[id]);
        }
    }
}
