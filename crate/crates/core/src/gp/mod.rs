//! Exact Gaussian-process regression for one agent's utility.
//!
//! The model keeps a Cholesky factor of `K + (noise + jitter) I` that grows
//! by one bordered row per observation, so posterior queries after an update
//! cost `O(t^2)` per point without refactorizing.

mod cholesky;
pub mod fit;
pub mod kernel;

use cholesky::PackedCholesky;
pub use fit::{fit_hyperparams, negative_log_marginal_likelihood, FitOutcome, FitSettings};
pub use kernel::{kernel_value, KernelFamily, KernelParams};

use crate::error::{Error, Result};
use kernel::Kernel;

/// Smallest jitter, relative to the signal variance.
pub const JITTER_START: f64 = 1e-8;
/// Largest jitter, relative to the signal variance.
pub const JITTER_MAX: f64 = 1e-4;

/// GP posterior over one agent's utility.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    params: KernelParams,
    kernel: Kernel,
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    center_targets: bool,
    offset: f64,
    factor: PackedCholesky,
    jitter: f64,
    solved: Vec<f64>,
}

impl SurrogateModel {
    /// Model with no observations.
    ///
    /// With `center_targets` the prior mean is the running mean of the
    /// observed targets instead of zero.
    pub fn new(params: KernelParams, dim: usize, center_targets: bool) -> Result<Self> {
        params.validate(dim)?;
        let kernel = Kernel::new(&params, dim);
        let jitter = JITTER_START * params.signal_variance;
        Ok(Self {
            params,
            kernel,
            dim,
            inputs: Vec::new(),
            targets: Vec::new(),
            center_targets,
            offset: 0.0,
            factor: PackedCholesky::default(),
            jitter,
            solved: Vec::new(),
        })
    }

    /// Builds the model from a full dataset (`inputs` row-major, `targets.len()` rows).
    pub fn from_data(
        params: KernelParams,
        dim: usize,
        inputs: &[f64],
        targets: &[f64],
        center_targets: bool,
    ) -> Result<Self> {
        let mut model = Self::new(params, dim, center_targets)?;
        if inputs.len() != targets.len() * dim {
            return Err(Error::Dimension {
                expected: targets.len() * dim,
                got: inputs.len(),
            });
        }
        model.inputs = inputs.to_vec();
        model.targets = targets.to_vec();
        model.refactor()?;
        Ok(model)
    }

    /// Same observations under new hyperparameters.
    pub fn with_params(&self, params: KernelParams) -> Result<Self> {
        Self::from_data(params, self.dim, &self.inputs, &self.targets, self.center_targets)
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn centers_targets(&self) -> bool {
        self.center_targets
    }

    /// Diagonal jitter currently added to the kernel matrix.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Prior mean used for prediction.
    pub fn prior_mean(&self) -> f64 {
        self.offset
    }

    fn input(&self, j: usize) -> &[f64] {
        &self.inputs[j * self.dim..(j + 1) * self.dim]
    }

    fn kernel_lower(&self, jitter: f64) -> Vec<f64> {
        let t = self.len();
        let mut lower = Vec::with_capacity(t * (t + 1) / 2);
        let diag = self.params.noise_variance + jitter;
        for r in 0..t {
            for c in 0..=r {
                let mut v = self.kernel.eval(self.input(r), self.input(c));
                if r == c {
                    v += diag;
                }
                lower.push(v);
            }
        }
        lower
    }

    /// Refactorizes from scratch, escalating jitter on failure.
    fn refactor(&mut self) -> Result<()> {
        let s2 = self.params.signal_variance;
        let mut rel = (self.jitter / s2).max(JITTER_START);
        loop {
            let jitter = rel * s2;
            if let Some(f) = PackedCholesky::factor(&self.kernel_lower(jitter), self.len()) {
                if rel > JITTER_START * 1.0001 {
                    log::warn!("kernel factorization needed jitter {jitter:e}");
                }
                self.factor = f;
                self.jitter = jitter;
                self.resolve();
                return Ok(());
            }
            if rel >= JITTER_MAX * 0.9999 {
                return Err(Error::ModelCorrupt { jitter });
            }
            rel *= 10.0;
        }
    }

    fn resolve(&mut self) {
        self.offset = if self.center_targets && !self.targets.is_empty() {
            self.targets.iter().sum::<f64>() / self.targets.len() as f64
        } else {
            0.0
        };
        let residual: Vec<f64> = self.targets.iter().map(|y| y - self.offset).collect();
        self.solved = self.factor.solve(&residual);
    }

    /// Adds observation `(x, y)` by bordering the factor with one row.
    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        let t = self.len();
        let mut col = Vec::with_capacity(t + 1);
        for j in 0..t {
            col.push(self.kernel.eval(self.input(j), x));
        }
        col.push(self.kernel.eval(x, x) + self.params.noise_variance + self.jitter);
        self.inputs.extend_from_slice(x);
        self.targets.push(y);
        if self.factor.push_row(&col).is_some() {
            self.resolve();
            Ok(())
        } else {
            let escalated = self.jitter * 10.0;
            self.jitter = escalated;
            self.refactor()
        }
    }

    /// Posterior mean and variance at `x`.
    pub fn posterior(&self, x: &[f64]) -> (f64, f64) {
        let t = self.len();
        let mut k = vec![0.0; t];
        let mut v = vec![0.0; t];
        self.posterior_with(x, &mut k, &mut v)
    }

    fn posterior_with(&self, x: &[f64], k: &mut [f64], v: &mut [f64]) -> (f64, f64) {
        let t = self.len();
        let prior = self.kernel.prior_variance();
        if t == 0 {
            return (self.offset, prior);
        }
        let mut mean = self.offset;
        for j in 0..t {
            k[j] = self.kernel.eval(self.input(j), x);
            mean += k[j] * self.solved[j];
        }
        self.factor.forward_into(k, v);
        let explained: f64 = v.iter().map(|a| a * a).sum();
        (mean, (prior - explained).max(0.0))
    }

    /// Posterior means and variances at every row of `points` (row-major, `dim` columns).
    pub fn posterior_batch(&self, points: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let count = points.len() / self.dim;
        let t = self.len();
        let mut k = vec![0.0; t];
        let mut v = vec![0.0; t];
        let mut means = Vec::with_capacity(count);
        let mut vars = Vec::with_capacity(count);
        for p in points.chunks_exact(self.dim) {
            let (m, s2) = self.posterior_with(p, &mut k, &mut v);
            means.push(m);
            vars.push(s2);
        }
        (means, vars)
    }

    /// `1/2 log det(I + K / noise)` of the observed inputs.
    pub fn empirical_info_gain(&self) -> Result<f64> {
        let noise = self.params.noise_variance;
        if !(noise > 0.0) {
            return Err(Error::Domain(
                "information gain needs a positive noise variance".into(),
            ));
        }
        let t = self.len() as f64;
        Ok((self.factor.half_log_det() - 0.5 * t * noise.ln()).max(0.0))
    }

    /// Negative log marginal likelihood of the (centered) targets.
    pub fn nlml(&self) -> f64 {
        let t = self.len();
        let fit: f64 = self
            .targets
            .iter()
            .zip(&self.solved)
            .map(|(y, a)| (y - self.offset) * a)
            .sum();
        0.5 * fit + self.factor.half_log_det() + 0.5 * t as f64 * (2.0 * std::f64::consts::PI).ln()
    }

    /// Max entrywise gap between the maintained factor and a fresh one at the same jitter.
    pub fn factor_drift(&self) -> Result<f64> {
        let fresh = PackedCholesky::factor(&self.kernel_lower(self.jitter), self.len())
            .ok_or(Error::ModelCorrupt { jitter: self.jitter })?;
        Ok(self.factor.max_abs_diff(&fresh))
    }

    /// Whether every diagonal entry of the factor is strictly positive.
    pub fn factor_is_valid(&self) -> bool {
        (0..self.factor.size()).all(|r| self.factor.diag(r) > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se(l: f64, s2: f64, noise: f64) -> KernelParams {
        KernelParams::isotropic(KernelFamily::SquaredExponential, l, s2, noise)
    }

    #[test]
    fn prior_only() {
        let m = SurrogateModel::new(se(1.0, 1.0, 0.01), 2, false).unwrap();
        assert_eq!(m.posterior(&[0.3, 0.9]), (0.0, 1.0));
        assert_eq!(m.empirical_info_gain().unwrap(), 0.0);
    }

    #[test]
    fn one_observation_closed_form() {
        let mut m = SurrogateModel::new(se(1.0, 1.0, 0.01), 1, false).unwrap();
        m.update(&[0.0], 1.0).unwrap();
        let (mean, var) = m.posterior(&[0.0]);
        assert!((mean - 1.0 / 1.01).abs() < 1e-7);
        assert!((var - (1.0 - 1.0 / 1.01)).abs() < 1e-7);
        assert!((m.empirical_info_gain().unwrap() - 0.5 * 101f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn near_interpolation_with_tiny_noise() {
        let mut m = SurrogateModel::new(se(0.3, 1.0, 1e-6), 1, false).unwrap();
        for (x, y) in [(0.1, 0.2), (0.5, -0.4), (0.8, 0.7)] {
            m.update(&[x], y).unwrap();
            assert!((m.posterior(&[x]).0 - y).abs() < 1e-3);
        }
    }

    #[test]
    fn duplicate_inputs_average() {
        let mut m = SurrogateModel::new(se(0.5, 1.0, 0.01), 1, false).unwrap();
        m.update(&[0.4], 0.2).unwrap();
        m.update(&[0.4], 0.6).unwrap();
        let mean = m.posterior(&[0.4]).0;
        assert!(mean > 0.2 && mean < 0.6);
        assert!(m.factor_is_valid());
    }

    #[test]
    fn centering_shifts_prior_mean() {
        let mut m = SurrogateModel::new(se(0.2, 1.0, 0.01), 1, true).unwrap();
        m.update(&[0.0], 3.0).unwrap();
        m.update(&[0.1], 5.0).unwrap();
        assert_eq!(m.prior_mean(), 4.0);
        // Far from the data the prediction reverts to the running mean.
        assert!((m.posterior(&[50.0]).0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn info_gain_requires_noise() {
        let m = SurrogateModel::new(se(1.0, 1.0, 0.0), 1, false).unwrap();
        assert!(m.empirical_info_gain().is_err());
    }

    #[test]
    fn dimension_checked() {
        let mut m = SurrogateModel::new(se(1.0, 1.0, 0.01), 2, false).unwrap();
        assert!(matches!(m.update(&[0.0], 1.0), Err(Error::Dimension { .. })));
    }
}
