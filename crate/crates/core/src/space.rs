//! Discretized joint strategy spaces.
//!
//! Joint candidates are the Cartesian product of per-agent strategy lists,
//! enumerated in mixed radix with the last agent varying fastest. A candidate
//! id therefore encodes one strategy index per agent, and the agent-`i` slice
//! through a candidate (all profiles sharing the opponents' strategies) is an
//! arithmetic progression of ids with stride `stride(i)`.

use crate::error::{Error, Result};

/// Default cap on the number of joint candidates.
pub const DEFAULT_SPACE_CAP: usize = 200_000;

/// Finite joint strategy set with per-agent slice indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpace {
    per_agent: Vec<Vec<Vec<f64>>>,
    strides: Vec<usize>,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
    coords: Vec<f64>,
}

impl JointSpace {
    /// Builds the product space of the given per-agent strategy lists.
    ///
    /// Every strategy of agent `i` must have the same dimension.
    pub fn new(per_agent: Vec<Vec<Vec<f64>>>, cap: usize) -> Result<Self> {
        if per_agent.is_empty() {
            return Err(Error::Config("a game needs at least one agent".into()));
        }
        let mut dims = Vec::with_capacity(per_agent.len());
        for (i, strategies) in per_agent.iter().enumerate() {
            let first = strategies.first().ok_or_else(|| {
                Error::Config(format!("agent {i} has an empty strategy set"))
            })?;
            let d = first.len();
            if let Some(bad) = strategies.iter().find(|s| s.len() != d) {
                return Err(Error::Dimension {
                    expected: d,
                    got: bad.len(),
                });
            }
            dims.push(d);
        }
        let size: u128 = per_agent.iter().map(|s| s.len() as u128).product();
        if size > cap as u128 {
            return Err(Error::SpaceTooLarge { size, cap });
        }
        let len = size as usize;

        let n = per_agent.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * per_agent[i + 1].len();
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let total_dim = acc;

        let mut coords = Vec::with_capacity(len * total_dim);
        for id in 0..len {
            for (i, strategies) in per_agent.iter().enumerate() {
                let s = (id / strides[i]) % strategies.len();
                coords.extend_from_slice(&strategies[s]);
            }
        }

        Ok(Self {
            per_agent,
            strides,
            dims,
            offsets,
            len,
            coords,
        })
    }

    pub fn agents(&self) -> usize {
        self.per_agent.len()
    }

    /// Number of joint candidates `|D|`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Dimension of a joint coordinate vector (sum of per-agent dimensions).
    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn agent_dim(&self, agent: usize) -> usize {
        self.dims[agent]
    }

    /// Strategies available to `agent`.
    pub fn strategies(&self, agent: usize) -> &[Vec<f64>] {
        &self.per_agent[agent]
    }

    pub fn strategy_count(&self, agent: usize) -> usize {
        self.per_agent[agent].len()
    }

    pub fn stride(&self, agent: usize) -> usize {
        self.strides[agent]
    }

    /// Index into `strategies(agent)` used by candidate `id`.
    pub fn strategy_index(&self, id: usize, agent: usize) -> usize {
        (id / self.strides[agent]) % self.per_agent[agent].len()
    }

    /// Per-agent strategy indices of candidate `id`.
    pub fn profile(&self, id: usize) -> Vec<usize> {
        (0..self.agents())
            .map(|i| self.strategy_index(id, i))
            .collect()
    }

    /// Candidate id of a profile of per-agent strategy indices.
    pub fn id_of(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.strides)
            .map(|(s, stride)| s * stride)
            .sum()
    }

    /// Joint coordinates of candidate `id`.
    pub fn coords(&self, id: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[id * d..(id + 1) * d]
    }

    /// Agent `agent`'s block of the joint coordinates of `id`.
    pub fn agent_coords(&self, id: usize, agent: usize) -> &[f64] {
        let start = self.offsets[agent];
        &self.coords(id)[start..start + self.dims[agent]]
    }

    /// All joint coordinates, row-major `len() x dim()`.
    pub fn all_coords(&self) -> &[f64] {
        &self.coords
    }

    /// Ids sharing the opponents' strategies of `id`, ordered by agent's own strategy index.
    pub fn slice(&self, agent: usize, id: usize) -> impl Iterator<Item = usize> + Clone {
        let stride = self.strides[agent];
        let base = id - self.strategy_index(id, agent) * stride;
        (0..self.per_agent[agent].len()).map(move |k| base + k * stride)
    }

    /// Canonical representative (own strategy index zero) of `id`'s agent slice.
    pub fn slice_base(&self, agent: usize, id: usize) -> usize {
        id - self.strategy_index(id, agent) * self.strides[agent]
    }

    /// Dense index `0..len()/|X_agent|` of the agent slice containing `id`.
    pub fn slice_key(&self, agent: usize, id: usize) -> usize {
        let stride = self.strides[agent];
        let count = self.per_agent[agent].len();
        let high = id / (stride * count);
        let low = id % stride;
        high * stride + low
    }

    /// Number of agent slices, `len() / |X_agent|`.
    pub fn slice_count(&self, agent: usize) -> usize {
        self.len / self.per_agent[agent].len()
    }

    /// Canonical representatives of every agent slice, in slice-key order.
    pub fn slice_bases(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.strides[agent];
        let count = self.per_agent[agent].len();
        let block = stride * count;
        (0..self.slice_count(agent)).map(move |key| (key / stride) * block + key % stride)
    }

    /// Candidate whose coordinates equal `coords` within `tol`, if any.
    pub fn find(&self, coords: &[f64], tol: f64) -> Option<usize> {
        if coords.len() != self.dim() {
            return None;
        }
        (0..self.len).find(|&id| {
            self.coords(id)
                .iter()
                .zip(coords)
                .all(|(a, b)| (a - b).abs() <= tol)
        })
    }

    /// Candidate minimizing Euclidean distance to `coords` (lowest id on ties).
    pub fn nearest(&self, coords: &[f64]) -> Result<usize> {
        if coords.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        let mut best = (0, f64::INFINITY);
        for id in 0..self.len {
            let d: f64 = self
                .coords(id)
                .iter()
                .zip(coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d < best.1 {
                best = (id, d);
            }
        }
        Ok(best.0)
    }
}

/// Uniform grid on `[0,1]^dim` with `resolution` points per axis.
pub fn unit_grid(resolution: usize, dim: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if resolution == 1 {
        vec![0.5]
    } else {
        (0..resolution)
            .map(|k| k as f64 / (resolution - 1) as f64)
            .collect()
    };
    let mut points = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    points
}

/// Simplex lattice `{(a/k, b/k, c/k) : a + b + c = k}`.
pub fn simplex_lattice(k: usize) -> Vec<Vec<f64>> {
    let kf = k as f64;
    let mut points = Vec::new();
    for a in (0..=k).rev() {
        for b in (0..=k - a).rev() {
            let c = k - a - b;
            points.push(vec![a as f64 / kf, b as f64 / kf, c as f64 / kf]);
        }
    }
    points
}
