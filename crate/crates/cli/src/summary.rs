use arise_core::Algorithm;

use crate::error::HarnessError;
use crate::experiment::TraceSet;
use crate::traces::algorithm_labels;

/// Cross-trial statistics of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub label: String,
    pub algorithm: Algorithm,
    pub trials: usize,
    /// Mean exact loss of the round-`t` query, `t = 1..=T`.
    pub mean: Vec<f64>,
    /// Sample standard deviation over trials divided by `sqrt(trials)`.
    pub stderr: Vec<f64>,
    pub best_mean: Vec<f64>,
    pub best_stderr: Vec<f64>,
    /// Median over trials of the last round's exact loss.
    pub final_median: f64,
    /// Exact loss of each trial's reported candidate.
    pub report_losses: Vec<f64>,
    pub report_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Function evaluations spent before round 1.
    pub init_count: usize,
    pub algorithms: Vec<AlgorithmSummary>,
}

/// Per-index mean and standard error over equally long series.
pub fn mean_stderr(series: &[&[f64]]) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    let Some(first) = series.first() else {
        return Err(HarnessError::Other("no series to summarize".into()));
    };
    let len = first.len();
    if series.iter().any(|s| s.len() != len) {
        return Err(HarnessError::Other("traces have different lengths".into()));
    }
    let k = series.len() as f64;
    let mut mean = Vec::with_capacity(len);
    let mut stderr = Vec::with_capacity(len);
    for t in 0..len {
        let m = series.iter().map(|s| s[t]).sum::<f64>() / k;
        let se = if series.len() < 2 {
            0.0
        } else {
            let var = series.iter().map(|s| (s[t] - m).powi(2)).sum::<f64>() / (k - 1.0);
            var.sqrt() / k.sqrt()
        };
        mean.push(m);
        stderr.push(se);
    }
    Ok((mean, stderr))
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Summaries of every configured algorithm with at least one successful run.
pub fn summarize(set: &TraceSet) -> Result<Summary, HarnessError> {
    let labels = algorithm_labels(&set.config.algorithms);
    let mut algorithms = Vec::new();
    for (algorithm, label) in set.config.algorithms.iter().zip(labels) {
        let runs: Vec<_> = set.runs_of(algorithm).filter_map(|r| r.result()).collect();
        if runs.is_empty() {
            continue;
        }
        let f: Vec<Vec<f64>> = runs.iter().map(|r| r.trace.iter().map(|x| x.f_exact).collect()).collect();
        let best: Vec<Vec<f64>> = runs
            .iter()
            .map(|r| r.trace.iter().map(|x| x.min_f_exact).collect())
            .collect();
        let (mean, stderr) = mean_stderr(&f.iter().map(Vec::as_slice).collect::<Vec<_>>())?;
        let (best_mean, best_stderr) = mean_stderr(&best.iter().map(Vec::as_slice).collect::<Vec<_>>())?;
        let finals: Vec<f64> = f.iter().filter_map(|s| s.last().copied()).collect();
        let report_losses: Vec<f64> = runs.iter().map(|r| r.report_loss).collect();
        algorithms.push(AlgorithmSummary {
            label,
            algorithm: *algorithm,
            trials: runs.len(),
            mean,
            stderr,
            best_mean,
            best_stderr,
            final_median: median(&finals),
            report_median: median(&report_losses),
            report_losses,
        });
    }
    if algorithms.is_empty() {
        return Err(HarnessError::Other("no successful runs to summarize".into()));
    }
    Ok(Summary {
        init_count: set.config.solver.init_count.min(set.space_size),
        algorithms,
    })
}
