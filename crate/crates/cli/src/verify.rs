use std::fmt;

use arise_core::{verify_round_certificates, AlgorithmKind, CertificateInput};

use crate::experiment::TraceSet;
use crate::traces::algorithm_labels;

/// Outcome of one check on one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub run: String,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{tag} {:<28} {:<26} {}", self.run, self.name, self.detail)
    }
}

/// Checks recorded runs: trace shape, running-minimum and ROI-size
/// monotonicity, the width chain at every selection, epsilon-greedy draw
/// consistency, and the certificate inequalities for full-space ARISE runs.
pub fn verify_traces(set: &TraceSet) -> VerifyReport {
    let labels = algorithm_labels(&set.config.algorithms);
    let horizon = set.config.solver.horizon;
    let mut checks = Vec::new();
    for r in &set.runs {
        let label = set
            .config
            .algorithms
            .iter()
            .position(|a| *a == r.algorithm)
            .map_or_else(|| r.algorithm.kind.to_string(), |k| labels[k].clone());
        let run = format!("{label} t{:03} (seed {})", r.trial, r.seed);
        let mut push = |name: &'static str, passed: bool, detail: String| {
            checks.push(Check {
                run: run.clone(),
                name,
                passed,
                detail,
            })
        };
        let res = match &r.outcome {
            Ok(res) => res,
            Err(e) => {
                push("run completed", false, e.clone());
                continue;
            }
        };
        let trace = &res.trace;

        let shape = trace.len() == horizon && trace.iter().enumerate().all(|(k, t)| t.round == k + 1);
        push("trace shape", shape, format!("{} rounds, expected {horizon}", trace.len()));

        let mut best = f64::INFINITY;
        let mut bad_min = None;
        for t in trace {
            best = best.min(t.f_exact);
            if t.min_f_exact != best && bad_min.is_none() {
                bad_min = Some(t.round);
            }
        }
        push(
            "running minimum",
            bad_min.is_none(),
            bad_min.map_or("nonincreasing".into(), |t| format!("breaks at round {t}")),
        );

        let bad_roi = trace.windows(2).find(|w| w[1].roi_size > w[0].roi_size);
        push(
            "roi nesting",
            bad_roi.is_none(),
            bad_roi.map_or("sizes nonincreasing".into(), |w| {
                format!("grows {} -> {} at round {}", w[0].roi_size, w[1].roi_size, w[1].round)
            }),
        );

        let kind = r.algorithm.kind;
        if kind.is_arise() {
            let over = trace
                .iter()
                .filter(|t| t.width_at_selection > t.chain_bound * (1.0 + 1e-9) + 1e-12)
                .count();
            push("width chain", over == 0, format!("{over} rounds above the bound"));
        }

        if kind == AlgorithmKind::EpsilonGreedy {
            let eps = r.algorithm.epsilon;
            let bad = trace
                .iter()
                .filter(|t| match t.eps_draw {
                    Some(d) => t.explored != (d < eps),
                    None => true,
                })
                .count();
            push("exploration draws", bad == 0, format!("{bad} inconsistent rounds"));
        }

        if kind == AlgorithmKind::AriseGlobal {
            match CertificateInput::from_trace(trace, set.agents, set.noise_variance)
                .and_then(|input| verify_round_certificates(&input))
            {
                Ok(c) => {
                    push(
                        "certificate (a)",
                        c.a_holds,
                        format!("sum alpha^2 {:.4e} <= {:.4e}", c.sum_alpha_sq, c.bound_a),
                    );
                    push(
                        "certificate (b)",
                        c.b_holds,
                        format!("ci width {:.4e} <= {:.4e}", c.ci_width, c.bound_b),
                    );
                    push(
                        "certificate (c)",
                        c.c_holds,
                        format!("sum f {:.4e} <= {:.4e}", c.cumulative_regret, c.bound_c),
                    );
                }
                Err(e) => push("certificates", false, e.to_string()),
            }
        }
    }
    VerifyReport { checks }
}
