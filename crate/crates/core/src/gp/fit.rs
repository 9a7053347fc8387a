//! Type-II maximum likelihood for kernel hyperparameters.
//!
//! Multi-start Nelder-Mead in log space, box-constrained by projection. The
//! incumbent parameters are always the first start, so the result never has a
//! higher negative log marginal likelihood than the incumbent.

use super::{KernelParams, SurrogateModel};

/// Search box and budget for [`fit_hyperparams`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    /// Total number of likelihood evaluations.
    pub budget: usize,
    pub lengthscale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    /// Also fit the noise variance (otherwise it stays at the incumbent's value).
    pub fit_noise: bool,
    pub noise_variance_bounds: (f64, f64),
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            budget: 80,
            lengthscale_bounds: (0.01, 10.0),
            signal_variance_bounds: (0.01, 10.0),
            fit_noise: false,
            noise_variance_bounds: (1e-6, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub params: KernelParams,
    pub nlml: f64,
    pub incumbent_nlml: f64,
    pub evaluations: usize,
    pub warning: Option<String>,
}

/// NLML of `targets` under `params`, or `None` if the kernel matrix cannot be factorized.
pub fn negative_log_marginal_likelihood(
    params: &KernelParams,
    dim: usize,
    inputs: &[f64],
    targets: &[f64],
    center_targets: bool,
) -> Option<f64> {
    SurrogateModel::from_data(params.clone(), dim, inputs, targets, center_targets)
        .ok()
        .map(|m| m.nlml())
        .filter(|v| v.is_finite())
}

struct Problem<'a> {
    template: &'a KernelParams,
    dim: usize,
    inputs: &'a [f64],
    targets: &'a [f64],
    center: bool,
    lower: Vec<f64>,
    upper: Vec<f64>,
    fit_noise: bool,
    evaluations: usize,
}

impl Problem<'_> {
    fn n_lengthscales(&self) -> usize {
        self.template.lengthscales.len()
    }

    fn encode(&self, p: &KernelParams) -> Vec<f64> {
        let mut theta: Vec<f64> = p.lengthscales.iter().map(|l| l.ln()).collect();
        theta.push(p.signal_variance.ln());
        if self.fit_noise {
            theta.push(p.noise_variance.max(1e-300).ln());
        }
        self.project(theta)
    }

    fn decode(&self, theta: &[f64]) -> KernelParams {
        let k = self.n_lengthscales();
        let mut p = self.template.clone();
        p.lengthscales = theta[..k].iter().map(|v| v.exp()).collect();
        p.signal_variance = theta[k].exp();
        if self.fit_noise {
            p.noise_variance = theta[k + 1].exp();
        }
        p
    }

    fn project(&self, mut theta: Vec<f64>) -> Vec<f64> {
        for ((v, lo), hi) in theta.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
        theta
    }

    fn objective(&mut self, theta: &[f64]) -> f64 {
        self.evaluations += 1;
        let p = self.decode(theta);
        negative_log_marginal_likelihood(&p, self.dim, self.inputs, self.targets, self.center)
            .unwrap_or(f64::INFINITY)
    }

    /// Nelder-Mead from `start` using at most `budget` evaluations.
    fn nelder_mead(&mut self, start: Vec<f64>, budget: usize) -> (Vec<f64>, f64) {
        let d = start.len();
        let mut best = (start.clone(), f64::INFINITY);
        if budget == 0 {
            return best;
        }
        let mut used = 0;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        let f0 = self.objective(&start);
        used += 1;
        simplex.push((start.clone(), f0));
        for j in 0..d {
            if used >= budget {
                break;
            }
            let mut v = start.clone();
            let step = 0.7;
            v[j] = if v[j] + step <= self.upper[j] { v[j] + step } else { v[j] - step };
            let v = self.project(v);
            let f = self.objective(&v);
            used += 1;
            simplex.push((v, f));
        }
        if simplex.len() < d + 1 {
            return simplex
                .into_iter()
                .fold(best, |acc, s| if s.1 < acc.1 { s } else { acc });
        }

        while used < budget {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let worst = simplex[d].clone();
            let mut centroid = vec![0.0; d];
            for (v, _) in &simplex[..d] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / d as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = self.project(along(1.0));
            let fr = self.objective(&xr);
            used += 1;
            if fr < simplex[0].1 {
                if used < budget {
                    let xe = self.project(along(2.0));
                    let fe = self.objective(&xe);
                    used += 1;
                    simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
                } else {
                    simplex[d] = (xr, fr);
                }
                continue;
            }
            if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
                continue;
            }
            if used >= budget {
                break;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = self.project(along(0.5));
                let fc = self.objective(&xc);
                (xc, fc)
            } else {
                let xc = self.project(along(-0.5));
                let fc = self.objective(&xc);
                (xc, fc)
            };
            used += 1;
            if fc < worst.1.min(fr) {
                simplex[d] = (xc, fc);
                continue;
            }
            // Shrink toward the best vertex.
            let anchor = simplex[0].0.clone();
            for k in 1..=d {
                if used >= budget {
                    break;
                }
                let v: Vec<f64> = simplex[k]
                    .0
                    .iter()
                    .zip(&anchor)
                    .map(|(x, a)| a + 0.5 * (x - a))
                    .collect();
                let f = self.objective(&v);
                used += 1;
                simplex[k] = (v, f);
            }
        }
        for s in simplex {
            if s.1 < best.1 {
                best = s;
            }
        }
        best
    }
}

/// Fits kernel hyperparameters by minimizing the negative log marginal likelihood.
///
/// `inputs` is row-major with `dim` columns. The kernel family, the number of
/// lengthscales and (unless `settings.fit_noise`) the noise variance are taken
/// from `incumbent`. With fewer than two observations or a zero budget the
/// incumbent is returned unchanged.
pub fn fit_hyperparams(
    inputs: &[f64],
    dim: usize,
    targets: &[f64],
    incumbent: &KernelParams,
    center_targets: bool,
    settings: &FitSettings,
) -> FitOutcome {
    let unchanged = |nlml: f64, warning: Option<String>| FitOutcome {
        params: incumbent.clone(),
        nlml,
        incumbent_nlml: nlml,
        evaluations: 0,
        warning,
    };
    if targets.len() < 2 || settings.budget == 0 {
        return unchanged(f64::NAN, None);
    }

    let k = incumbent.lengthscales.len();
    let (l_lo, l_hi) = settings.lengthscale_bounds;
    let (s_lo, s_hi) = settings.signal_variance_bounds;
    let mut lower = vec![l_lo.ln(); k];
    let mut upper = vec![l_hi.ln(); k];
    lower.push(s_lo.ln());
    upper.push(s_hi.ln());
    if settings.fit_noise {
        lower.push(settings.noise_variance_bounds.0.ln());
        upper.push(settings.noise_variance_bounds.1.ln());
    }
    let mut problem = Problem {
        template: incumbent,
        dim,
        inputs,
        targets,
        center: center_targets,
        lower,
        upper,
        fit_noise: settings.fit_noise,
        evaluations: 0,
    };

    let incumbent_nlml =
        negative_log_marginal_likelihood(incumbent, dim, inputs, targets, center_targets)
            .unwrap_or(f64::INFINITY);
    problem.evaluations += 1;

    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let spread = targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / targets.len() as f64;
    let s2_guess = spread.clamp(s_lo, s_hi);
    let mut starts = vec![problem.encode(incumbent)];
    for l in [0.1, 0.4, 1.6] {
        let mut p = incumbent.clone();
        p.lengthscales = vec![l; k];
        p.signal_variance = s2_guess;
        starts.push(problem.encode(&p));
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let remaining = settings.budget.saturating_sub(1);
    let per_start = remaining / starts.len();
    let extra = remaining % starts.len();
    for (idx, start) in starts.into_iter().enumerate() {
        let budget = per_start + usize::from(idx < extra);
        let (theta, value) = problem.nelder_mead(start, budget);
        if value.is_finite() && best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((theta, value));
        }
    }

    match best {
        Some((theta, value)) if value < incumbent_nlml => FitOutcome {
            params: problem.decode(&theta),
            nlml: value,
            incumbent_nlml,
            evaluations: problem.evaluations,
            warning: None,
        },
        Some(_) => FitOutcome {
            params: incumbent.clone(),
            nlml: incumbent_nlml,
            incumbent_nlml,
            evaluations: problem.evaluations,
            warning: None,
        },
        None => {
            let msg = "hyperparameter search failed at every start; keeping incumbent".to_string();
            log::warn!("{msg}");
            FitOutcome {
                evaluations: problem.evaluations,
                ..unchanged(incumbent_nlml, Some(msg))
            }
        }
    }
}
