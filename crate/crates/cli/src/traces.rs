//! On-disk trace format.
//!
//! A trace directory holds `metadata.toml` plus, per successful run,
//! `<label>-t<trial>.csv` with the per-round table and
//! `<label>-t<trial>.bounds.csv` with the selection diagnostics that the
//! certificate checks need. Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use arise_core::{Algorithm, TraceRecord, VERSION};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::experiment::{RunRecord, RunResult, TraceSet};

pub const METADATA_FILE: &str = "metadata.toml";

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    version: String,
    beta: f64,
    agents: usize,
    noise_variance: f64,
    space_size: usize,
    dim: usize,
    game_instance_seed: u64,
    config: ExperimentConfig,
    runs: Vec<RunMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunMeta {
    label: String,
    algorithm: Algorithm,
    trial: usize,
    seed: u64,
    status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report_coords: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init_ids: Option<Vec<usize>>,
}

/// Short unique name per configured algorithm, e.g. `arise` or `epsilon-greedy2`.
pub fn algorithm_labels(algorithms: &[Algorithm]) -> Vec<String> {
    algorithms
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let dup = algorithms.iter().filter(|b| b.kind == a.kind).count() > 1;
            if dup {
                format!("{}{k}", a.kind)
            } else {
                a.kind.to_string()
            }
        })
        .collect()
}

fn label_of(set_algorithms: &[Algorithm], labels: &[String], a: &Algorithm) -> String {
    set_algorithms
        .iter()
        .position(|b| b == a)
        .map(|k| labels[k].clone())
        .unwrap_or_else(|| a.kind.to_string())
}

/// Header of the per-round table for `dim` coordinates.
pub fn trace_header(dim: usize) -> String {
    let mut h = String::from("trial,algo,iter,candidate_id");
    for d in 0..dim {
        let _ = write!(h, ",x{d}");
    }
    h.push_str(",f_exact,min_f_exact,roi_size,ci_width,info_gain_total,beta,wall_ms,warnings");
    h
}

pub fn bounds_header(agents: usize) -> String {
    let mut h = String::from(
        "iter,acquisition,width_at_selection,chain_bound,eps_draw,explored,roi_v_matches_global",
    );
    for i in 0..agents {
        let _ = write!(h, ",info_gain{i}");
    }
    h
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn clean_warning(w: &str) -> String {
    w.replace([',', ';', '\n', '\r'], " ")
}

/// Writes every run and the metadata into `dir`, creating it if needed.
pub fn write_traces(set: &TraceSet, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let labels = algorithm_labels(&set.config.algorithms);
    let mut runs = Vec::with_capacity(set.runs.len());
    for r in &set.runs {
        let label = label_of(&set.config.algorithms, &labels, &r.algorithm);
        let mut meta = RunMeta {
            label: label.clone(),
            algorithm: r.algorithm,
            trial: r.trial,
            seed: r.seed,
            status: "ok".into(),
            error: None,
            file: None,
            report: None,
            report_coords: None,
            report_loss: None,
            init_ids: None,
        };
        match &r.outcome {
            Ok(res) => {
                let stem = format!("{label}-t{:03}", r.trial);
                let main = dir.join(format!("{stem}.csv"));
                write_file(&main, &trace_table(res, &label, r.trial, set.dim))?;
                let side = dir.join(format!("{stem}.bounds.csv"));
                write_file(&side, &bounds_table(res, set.agents))?;
                meta.file = Some(format!("{stem}.csv"));
                meta.report = Some(res.report);
                meta.report_coords = Some(res.report_coords.clone());
                meta.report_loss = Some(res.report_loss);
                meta.init_ids = Some(res.init_ids.clone());
            }
            Err(e) => {
                meta.status = "failed".into();
                meta.error = Some(e.clone());
            }
        }
        runs.push(meta);
    }
    let meta = Metadata {
        version: VERSION.to_string(),
        beta: set.beta,
        agents: set.agents,
        noise_variance: set.noise_variance,
        space_size: set.space_size,
        dim: set.dim,
        game_instance_seed: set.config.game.budget.instance_seed,
        config: set.config.clone(),
        runs,
    };
    let text = toml::to_string(&meta).map_err(|e| HarnessError::Other(format!("metadata: {e}")))?;
    write_file(&dir.join(METADATA_FILE), &text)
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn trace_table(res: &RunResult, label: &str, trial: usize, dim: usize) -> String {
    let mut out = trace_header(dim);
    out.push('\n');
    for rec in &res.trace {
        let _ = write!(out, "{trial},{label},{},{}", rec.round, rec.candidate);
        for c in &rec.coords {
            let _ = write!(out, ",{}", float(*c));
        }
        let warnings: Vec<String> = rec.warnings.iter().map(|w| clean_warning(w)).collect();
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{}",
            float(rec.f_exact),
            float(rec.min_f_exact),
            rec.roi_size,
            float(rec.ci_width),
            float(rec.info_gain_total()),
            float(rec.beta),
            float(rec.wall_ms),
            warnings.join(";")
        );
    }
    out
}

fn bounds_table(res: &RunResult, agents: usize) -> String {
    let mut out = bounds_header(agents);
    out.push('\n');
    for rec in &res.trace {
        let draw = rec.eps_draw.map(float).unwrap_or_default();
        let _ = write!(
            out,
            "{},{},{},{},{draw},{},{}",
            rec.round,
            float(rec.acquisition),
            float(rec.width_at_selection),
            float(rec.chain_bound),
            rec.explored,
            rec.roi_v_matches_global
        );
        for g in &rec.info_gain {
            let _ = write!(out, ",{}", float(*g));
        }
        out.push('\n');
    }
    out
}

/// Loads a directory written by [`write_traces`].
pub fn read_traces(dir: &Path) -> Result<TraceSet, HarnessError> {
    let meta_path = dir.join(METADATA_FILE);
    let text = fs::read_to_string(&meta_path).map_err(|e| HarnessError::io(&meta_path, e))?;
    let meta: Metadata = toml::from_str(&text)
        .map_err(|e| HarnessError::Parse(format!("{}: {e}", meta_path.display())))?;
    let mut runs = Vec::with_capacity(meta.runs.len());
    for r in meta.runs {
        let outcome = if r.status == "ok" {
            let file = r
                .file
                .ok_or_else(|| HarnessError::Other(format!("run {} t{} has no file", r.label, r.trial)))?;
            let main = dir.join(&file);
            let side = dir.join(file.replace(".csv", ".bounds.csv"));
            let trace = read_run(&main, &side, meta.dim, meta.agents)?;
            let missing = |what: &str| HarnessError::Other(format!("run {} t{} lacks {what}", r.label, r.trial));
            Ok(RunResult {
                trace,
                init_ids: r.init_ids.ok_or_else(|| missing("init_ids"))?,
                report: r.report.ok_or_else(|| missing("report"))?,
                report_coords: r.report_coords.ok_or_else(|| missing("report_coords"))?,
                report_loss: r.report_loss.ok_or_else(|| missing("report_loss"))?,
            })
        } else {
            Err(r.error.unwrap_or_default())
        };
        runs.push(RunRecord {
            algorithm: r.algorithm,
            trial: r.trial,
            seed: r.seed,
            outcome,
        });
    }
    Ok(TraceSet {
        config: meta.config,
        beta: meta.beta,
        agents: meta.agents,
        noise_variance: meta.noise_variance,
        space_size: meta.space_size,
        dim: meta.dim,
        runs,
    })
}

struct Rows {
    path: PathBuf,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_rows(path: &Path, header: &str) -> Result<Rows, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((_, h)) => {
            return Err(HarnessError::trace(path, 1, format!("unexpected header `{h}`, expected `{header}`")))
        }
        None => return Err(HarnessError::trace(path, 1, "empty file")),
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (k, line) in lines {
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != width {
            return Err(HarnessError::trace(
                path,
                k + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        rows.push((k + 1, fields));
    }
    Ok(Rows {
        path: path.to_path_buf(),
        rows,
    })
}

impl Rows {
    fn parse<T: std::str::FromStr>(&self, line: usize, field: &str, name: &str) -> Result<T, HarnessError> {
        field
            .parse()
            .map_err(|_| HarnessError::trace(&self.path, line, format!("bad {name} `{field}`")))
    }
}

fn read_run(main: &Path, side: &Path, dim: usize, agents: usize) -> Result<Vec<TraceRecord>, HarnessError> {
    let m = read_rows(main, &trace_header(dim))?;
    let s = read_rows(side, &bounds_header(agents))?;
    if m.rows.len() != s.rows.len() {
        return Err(HarnessError::trace(side, 1, "row count differs from the trace table"));
    }
    let mut out = Vec::with_capacity(m.rows.len());
    for ((line, f), (sline, g)) in m.rows.iter().zip(&s.rows) {
        let (line, sline) = (*line, *sline);
        let round: usize = m.parse(line, &f[2], "iter")?;
        let side_round: usize = s.parse(sline, &g[0], "iter")?;
        if round != side_round {
            return Err(HarnessError::trace(side, sline, format!("iter {side_round} does not match {round}")));
        }
        let coords = (0..dim)
            .map(|d| m.parse(line, &f[4 + d], "coordinate"))
            .collect::<Result<Vec<f64>, _>>()?;
        let k = 4 + dim;
        let warnings = if f[k + 7].is_empty() {
            Vec::new()
        } else {
            f[k + 7].split(';').map(str::to_string).collect()
        };
        let info_gain = (0..agents)
            .map(|i| s.parse(sline, &g[7 + i], "information gain"))
            .collect::<Result<Vec<f64>, _>>()?;
        out.push(TraceRecord {
            round,
            candidate: m.parse(line, &f[3], "candidate_id")?,
            coords,
            f_exact: m.parse(line, &f[k], "f_exact")?,
            min_f_exact: m.parse(line, &f[k + 1], "min_f_exact")?,
            roi_size: m.parse(line, &f[k + 2], "roi_size")?,
            ci_width: m.parse(line, &f[k + 3], "ci_width")?,
            info_gain,
            beta: m.parse(line, &f[k + 5], "beta")?,
            wall_ms: m.parse(line, &f[k + 6], "wall_ms")?,
            warnings,
            acquisition: s.parse(sline, &g[1], "acquisition")?,
            width_at_selection: s.parse(sline, &g[2], "width_at_selection")?,
            chain_bound: s.parse(sline, &g[3], "chain_bound")?,
            eps_draw: if g[4].is_empty() {
                None
            } else {
                Some(s.parse(sline, &g[4], "eps_draw")?)
            },
            explored: s.parse(sline, &g[5], "explored")?,
            roi_v_matches_global: s.parse(sline, &g[6], "roi_v_matches_global")?,
        });
    }
    Ok(out)
}
