use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stationary covariance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
}

/// Kernel hyperparameters plus the observation noise used by the posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub family: KernelFamily,
    /// One entry (isotropic) or one per input dimension.
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn isotropic(family: KernelFamily, lengthscale: f64, signal_variance: f64, noise_variance: f64) -> Self {
        Self {
            family,
            lengthscales: vec![lengthscale],
            signal_variance,
            noise_variance,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.lengthscales.is_empty() || (self.lengthscales.len() != 1 && self.lengthscales.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: self.lengthscales.len(),
            });
        }
        if self.lengthscales.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Domain("lengthscales must be > 0".into()));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(Error::Domain("signal variance must be > 0".into()));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::Domain("noise variance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Kernel with precomputed inverse squared lengthscales.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    family: KernelFamily,
    inv_sq: Vec<f64>,
    signal_variance: f64,
}

impl Kernel {
    pub(crate) fn new(params: &KernelParams, dim: usize) -> Self {
        let inv_sq = if params.lengthscales.len() == 1 {
            vec![1.0 / (params.lengthscales[0] * params.lengthscales[0]); dim]
        } else {
            params.lengthscales.iter().map(|l| 1.0 / (l * l)).collect()
        };
        Self {
            family: params.family,
            inv_sq,
            signal_variance: params.signal_variance,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut r2 = 0.0;
        for ((x, y), w) in a.iter().zip(b).zip(&self.inv_sq) {
            let d = x - y;
            r2 += d * d * w;
        }
        match self.family {
            KernelFamily::SquaredExponential => self.signal_variance * (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                let r = (5.0 * r2).sqrt();
                self.signal_variance * (1.0 + r + r * r / 3.0) * (-r).exp()
            }
        }
    }

    pub(crate) fn prior_variance(&self) -> f64 {
        self.signal_variance
    }
}

/// `k(a, b)` for the given parameters.
pub fn kernel_value(params: &KernelParams, a: &[f64], b: &[f64]) -> f64 {
    Kernel::new(params, a.len()).eval(a, b)
}
