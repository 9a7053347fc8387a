//! Marketing budget allocation among competing advertisers.
//!
//! Channels reach customers independently with activation probability
//! `p(s, z)` per allocated unit. Advertisers are ordered uniformly at random;
//! a customer goes to the first advertiser in the order who activates them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Budget game instance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetParams {
    /// Number of media channels `|S|`.
    pub channels: usize,
    /// Number of customers `|Z|`.
    pub customers: usize,
    /// Per-channel unit capacity `c(s)`, shared by all channels.
    pub capacity: u32,
    /// Cost of one unit on any channel.
    pub unit_cost: f64,
    /// Budget `B` per advertiser.
    pub budget: f64,
    /// Upper end of the uniform activation probability draw.
    pub activation_max: f64,
    /// Seed of the activation probability generator.
    pub instance_seed: u64,
    /// Explicit `channels x customers` activation probabilities; overrides the generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<Vec<Vec<f64>>>,
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self {
            channels: 4,
            customers: 12,
            capacity: 2,
            unit_cost: 1.0,
            budget: 3.0,
            activation_max: 0.2,
            instance_seed: 20_240_601,
            activation: None,
        }
    }
}

impl BudgetParams {
    pub(crate) fn validate(&self, violations: &mut Vec<String>) {
        if self.channels == 0 {
            violations.push("budget.channels must be >= 1".into());
        }
        if self.customers == 0 {
            violations.push("budget.customers must be >= 1".into());
        }
        if !(self.unit_cost.is_finite() && self.unit_cost > 0.0) {
            violations.push("budget.unit_cost must be > 0".into());
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            violations.push("budget.budget must be >= 0 (no feasible allocation otherwise)".into());
        }
        if !(0.0..=1.0).contains(&self.activation_max) {
            violations.push("budget.activation_max must lie in [0, 1]".into());
        }
        if let Some(p) = &self.activation {
            if p.len() != self.channels || p.iter().any(|row| row.len() != self.customers) {
                violations.push(format!(
                    "budget.activation must be {} x {}",
                    self.channels, self.customers
                ));
            }
            if p.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                violations.push("budget.activation entries must lie in [0, 1]".into());
            }
        }
    }

    /// Activation probabilities `p[s][z]`, explicit or drawn from the instance seed.
    pub fn activation_matrix(&self) -> Vec<Vec<f64>> {
        if let Some(p) = &self.activation {
            return p.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.instance_seed);
        (0..self.channels)
            .map(|_| {
                (0..self.customers)
                    .map(|_| rng.random::<f64>() * self.activation_max)
                    .collect()
            })
            .collect()
    }

    /// Feasible unit allocations: `x(s) <= c(s)` and `<w, x> <= B`.
    pub fn strategies(&self) -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        let mut current = vec![0u32; self.channels];
        self.enumerate(0, 0.0, &mut current, &mut out);
        if out.is_empty() {
            return Err(Error::Config("budget game has an empty feasible set".into()));
        }
        Ok(out)
    }

    fn enumerate(&self, s: usize, spent: f64, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if spent > self.budget + 1e-12 {
            return;
        }
        if s == self.channels {
            out.push(current.clone());
            return;
        }
        for units in 0..=self.capacity {
            current[s] = units;
            self.enumerate(s + 1, spent + units as f64 * self.unit_cost, current, out);
        }
        current[s] = 0;
    }
}

/// Per-customer activation probability `P(x, z) = 1 - prod_s (1 - p(s,z))^x(s)`.
pub fn activation_probabilities(p: &[Vec<f64>], allocation: &[u32]) -> Vec<f64> {
    let customers = p.first().map_or(0, Vec::len);
    (0..customers)
        .map(|z| {
            let miss: f64 = allocation
                .iter()
                .zip(p)
                .map(|(&units, row)| (1.0 - row[z]).powi(units as i32))
                .product();
            1.0 - miss
        })
        .collect()
}

/// Expected customers won by each advertiser, averaged over all `n!` orderings.
///
/// `probs[i][z]` is advertiser `i`'s activation probability of customer `z`.
pub fn expected_customers(probs: &[&[f64]]) -> Vec<f64> {
    let n = probs.len();
    let customers = probs.first().map_or(0, |p| p.len());
    let perms = permutations(n);
    let scale = 1.0 / perms.len() as f64;
    let mut utilities = vec![0.0; n];
    for z in 0..customers {
        for order in &perms {
            let mut untaken = 1.0;
            for &i in order {
                utilities[i] += scale * untaken * probs[i][z];
                untaken *= 1.0 - probs[i][z];
            }
        }
    }
    utilities
}

/// All orderings of `0..n` (Heap's algorithm).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..n).collect();
    let mut out = vec![items.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            out.push(items.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        for (n, f) in [(1, 1), (2, 2), (3, 6), (4, 24)] {
            let mut p = permutations(n);
            assert_eq!(p.len(), f);
            p.sort();
            p.dedup();
            assert_eq!(p.len(), f);
        }
    }

    #[test]
    fn two_advertisers_single_customer() {
        // First in line: 0.5; second: 0.5 * (1 - 0.5). Average of the two orders.
        let u = expected_customers(&[&[0.5], &[0.5]]);
        assert!((u[0] - 0.375).abs() < 1e-15);
        assert!((u[1] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn default_instance_size() {
        let s = BudgetParams::default().strategies().unwrap();
        assert_eq!(s.len(), 31);
        assert!(s.iter().all(|x| x.iter().sum::<u32>() <= 3 && x.iter().all(|&v| v <= 2)));
    }

    #[test]
    fn zero_budget_forces_zero_allocation() {
        let params = BudgetParams {
            budget: 0.0,
            ..BudgetParams::default()
        };
        assert_eq!(params.strategies().unwrap(), vec![vec![0; 4]]);
    }

    #[test]
    fn generator_is_seeded() {
        let a = BudgetParams::default().activation_matrix();
        let b = BudgetParams::default().activation_matrix();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&p| (0.0..=0.2).contains(&p)));
    }
}
