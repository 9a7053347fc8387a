//! Post-hoc checks of the width and regret inequalities on recorded runs.
//!
//! With `C1 = 8 / ln(1 + 1/noise)` and `Gamma` the summed empirical
//! information gain of the final surrogates:
//!
//! * (a) `sum_t alpha_t^2 <= (n+1)^2 C1 beta Gamma`
//! * (b) final CI width `<= sqrt((n+1)^2 C1 beta Gamma / T)`
//! * (c) `sum_t f(x^t) <= sqrt(T beta Gamma (n+1)^2 C1)`

use super::TraceRecord;
use crate::error::{Error, Result};

/// Histories needed by [`verify_round_certificates`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateInput {
    pub agents: usize,
    pub noise_variance: f64,
    pub beta: f64,
    /// Acquisition value at the selected candidate, per round.
    pub alphas: Vec<f64>,
    /// Exact loss of the selected candidate, per round.
    pub losses: Vec<f64>,
    /// CI width at the last round.
    pub final_ci_width: f64,
    /// Summed empirical information gain after the last round.
    pub info_gain_total: f64,
    /// Per-round `(width at selection, chain bound)` pairs, if recorded.
    pub chain: Vec<(f64, f64)>,
}

impl CertificateInput {
    pub fn from_trace(trace: &[TraceRecord], agents: usize, noise_variance: f64) -> Result<Self> {
        let last = trace
            .last()
            .ok_or_else(|| Error::MissingHistory("trace has no rounds".into()))?;
        Ok(Self {
            agents,
            noise_variance,
            beta: last.beta,
            alphas: trace.iter().map(|r| r.acquisition).collect(),
            losses: trace.iter().map(|r| r.f_exact).collect(),
            final_ci_width: last.ci_width,
            info_gain_total: last.info_gain_total(),
            chain: trace
                .iter()
                .map(|r| (r.width_at_selection, r.chain_bound))
                .collect(),
        })
    }
}

/// Outcome of each inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// `8 / ln(1 + noise^-1)`.
    pub c1: f64,
    /// `(n+1)^2 C1`.
    pub c1_hat: f64,
    pub sum_alpha_sq: f64,
    pub bound_a: f64,
    pub a_holds: bool,
    pub ci_width: f64,
    pub bound_b: f64,
    pub b_holds: bool,
    pub cumulative_regret: f64,
    pub bound_c: f64,
    pub c_holds: bool,
    /// Rounds where the selection width exceeded its chain bound (diagnostic).
    pub chain_violations: usize,
}

impl CertificateReport {
    pub fn all_hold(&self) -> bool {
        self.a_holds && self.b_holds && self.c_holds
    }
}

/// `(C1, (n+1)^2 C1)` for `n` agents and observation noise variance `noise_variance`.
pub fn certificate_constants(agents: usize, noise_variance: f64) -> Result<(f64, f64)> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(Error::Domain(
            "certificates need a positive noise variance".into(),
        ));
    }
    let c1 = 8.0 / (1.0 + 1.0 / noise_variance).ln();
    let k = agents as f64 + 1.0;
    Ok((c1, k * k * c1))
}

pub fn verify_round_certificates(input: &CertificateInput) -> Result<CertificateReport> {
    if input.alphas.is_empty() || input.losses.len() != input.alphas.len() {
        return Err(Error::MissingHistory(
            "per-round acquisition and loss histories are required".into(),
        ));
    }
    let (c1, c1_hat) = certificate_constants(input.agents, input.noise_variance)?;
    let t = input.alphas.len() as f64;
    let budget = c1_hat * input.beta * input.info_gain_total;

    let sum_alpha_sq: f64 = input.alphas.iter().map(|a| a * a).sum();
    let bound_b = (budget / t).sqrt();
    let cumulative_regret: f64 = input.losses.iter().sum();
    let bound_c = (t * budget).sqrt();
    let chain_violations = input
        .chain
        .iter()
        .filter(|(w, b)| *w > *b * (1.0 + 1e-12) + 1e-12)
        .count();

    Ok(CertificateReport {
        c1,
        c1_hat,
        sum_alpha_sq,
        bound_a: budget,
        a_holds: sum_alpha_sq <= budget,
        ci_width: input.final_ci_width,
        bound_b,
        b_holds: input.final_ci_width <= bound_b,
        cumulative_regret,
        bound_c,
        c_holds: cumulative_regret <= bound_c,
        chain_violations,
    })
}
