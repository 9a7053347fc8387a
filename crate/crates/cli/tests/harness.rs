use std::fs;
use std::path::Path;
use std::process::Command;

use arise_cli::traces::trace_header;
use arise_cli::{
    emit_plot, load_config, read_traces, render_svg, run_experiment, summarize, verify_traces,
    write_traces, ExperimentConfig, HarnessError, PlotOptions, Summary,
};
use arise_core::{Algorithm, AlgorithmKind, GameSpec};
use quick_xml::events::Event;
use quick_xml::Reader;

fn tiny(algorithms: &[AlgorithmKind], trials: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_game(GameSpec::saddle().with_resolution(7));
    c.solver.horizon = 8;
    c.algorithms = algorithms.iter().map(|&k| Algorithm::new(k)).collect();
    c.trials = trials;
    c
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn well_formed(svg: &str) -> bool {
    let mut reader = Reader::from_str(svg);
    let mut depth = 0i32;
    loop {
        match reader.read_event() {
            Ok(Event::Start(_)) => depth += 1,
            Ok(Event::End(_)) => depth -= 1,
            Ok(Event::Eof) => return depth == 0,
            Ok(_) => {}
            Err(_) => return false,
        }
    }
}

#[test]
fn one_trace_per_algorithm_and_trial() {
    let set = run_experiment(&tiny(&[AlgorithmKind::Arise, AlgorithmKind::SurLite], 1)).unwrap();
    assert_eq!(set.runs.len(), 2);
    assert_eq!(set.runs[0].algorithm.kind, AlgorithmKind::Arise);
    assert_eq!(set.runs[1].algorithm.kind, AlgorithmKind::SurLite);
    assert!(set.runs.iter().all(|r| r.result().unwrap().trace.len() == 8));
}

#[test]
fn seeds_follow_trial_index() {
    let mut c = tiny(&[AlgorithmKind::Prediction], 3);
    c.base_seed = 40;
    let set = run_experiment(&c).unwrap();
    let seeds: Vec<u64> = set.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![40, 41, 42]);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut c = tiny(&[AlgorithmKind::Arise, AlgorithmKind::EpsilonGreedy], 3);
    let serial = run_experiment(&c).unwrap();
    c.workers = 3;
    let parallel = run_experiment(&c).unwrap();
    assert_eq!(serial.runs, parallel.runs);
}

#[test]
fn written_traces_reload_exactly_and_repeat_byte_for_byte() {
    let c = tiny(&AlgorithmKind::ALL, 2);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let set = run_experiment(&c).unwrap();
    write_traces(&set, a.path()).unwrap();
    write_traces(&run_experiment(&c).unwrap(), b.path()).unwrap();
    assert_eq!(files(a.path()), files(b.path()));

    let back = read_traces(a.path()).unwrap();
    assert_eq!(back, set);

    let text = fs::read_to_string(a.path().join("arise-t000.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), trace_header(2));
    assert_eq!(
        trace_header(2),
        "trial,algo,iter,candidate_id,x0,x1,f_exact,min_f_exact,roi_size,ci_width,info_gain_total,beta,wall_ms,warnings"
    );
}

#[test]
fn min_column_is_nonincreasing_in_files() {
    let dir = tempfile::tempdir().unwrap();
    write_traces(&run_experiment(&tiny(&AlgorithmKind::ALL, 1)).unwrap(), dir.path()).unwrap();
    for (name, bytes) in files(dir.path()) {
        if !name.ends_with(".csv") || name.ends_with(".bounds.csv") {
            continue;
        }
        let text = String::from_utf8(bytes).unwrap();
        let col = trace_header(2).split(',').position(|h| h == "min_f_exact").unwrap();
        let mins: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
        assert!(mins.windows(2).all(|w| w[1] <= w[0]), "{name}");
    }
}

#[test]
fn corrupted_trace_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    write_traces(&run_experiment(&tiny(&[AlgorithmKind::Arise], 1)).unwrap(), dir.path()).unwrap();
    let path = dir.path().join("arise-t000.csv");
    let text = fs::read_to_string(&path).unwrap().replacen(",441,", ",x,", 1);
    let text = text.replacen("0,arise,2,", "0,arise,two,", 1);
    fs::write(&path, text).unwrap();
    match read_traces(dir.path()) {
        Err(HarnessError::Trace { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains("iter"), "{message}");
        }
        other => panic!("expected a trace error, got {other:?}"),
    }
}

#[test]
fn identical_traces_have_zero_stderr() {
    let set = run_experiment(&tiny(&[AlgorithmKind::Arise], 1)).unwrap();
    let mut doubled = set.clone();
    doubled.runs.push(set.runs[0].clone());
    let s = summarize(&doubled).unwrap();
    let a = &s.algorithms[0];
    let trace = &set.runs[0].result().unwrap().trace;
    assert_eq!(a.trials, 2);
    assert!(a.stderr.iter().all(|&v| v == 0.0));
    for (m, rec) in a.mean.iter().zip(trace) {
        assert_eq!(*m, rec.f_exact);
    }
}

#[test]
fn plot_has_one_series_and_band_per_algorithm() {
    let set = run_experiment(&tiny(&[AlgorithmKind::Arise], 2)).unwrap();
    let summary = summarize(&set).unwrap();
    for opts in [PlotOptions::default(), PlotOptions { log_y: true, best_so_far: true }] {
        let svg = render_svg(&summary, opts).unwrap();
        assert!(well_formed(&svg));
        assert_eq!(svg.matches(r#"class="series""#).count(), 1);
        assert_eq!(svg.matches(r#"class="band""#).count(), 1);
        assert!(svg.contains(">arise<"));
    }
    let full = summarize(&run_experiment(&tiny(&AlgorithmKind::ALL, 1)).unwrap()).unwrap();
    assert_eq!(render_svg(&full, PlotOptions::default()).unwrap().matches(r#"class="series""#).count(), 5);
}

#[test]
fn empty_summary_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.svg");
    let empty = Summary { init_count: 10, algorithms: vec![] };
    assert!(emit_plot(&empty, &path, PlotOptions::default()).is_err());
    assert!(!path.exists());
}

#[test]
fn verify_passes_on_fresh_traces() {
    let set = run_experiment(&tiny(&AlgorithmKind::ALL, 2)).unwrap();
    let report = verify_traces(&set);
    assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
    assert!(report.checks.iter().any(|c| c.name == "certificate (a)"));
}

#[test]
fn config_files_load_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "[game]\nkind = \"saddle\"\n[experiment]\ntrials = 2\n").unwrap();
    assert_eq!(load_config(&good).unwrap().trials, 2);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[game]\nkind = \"saddle\"\nresolution = \"many\"\n").unwrap();
    let msg = load_config(&bad).unwrap_err().to_string();
    assert!(msg.contains("bad.toml") && msg.contains("line 3"), "{msg}");
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}

fn arise() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arise"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[game]\nkind = \"saddle\"\nresolution = 5\n[solver]\nhorizon = 4\n[experiment]\ntrials = 1\nalgorithms = [\"arise-global\", \"epsilon-greedy\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = arise().args(["run"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(arise().arg("verify").arg(&out).status().unwrap().code(), Some(0));
    let svg = dir.path().join("p.svg");
    assert_eq!(arise().arg("plot").arg(&out).arg("--out").arg(&svg).status().unwrap().code(), Some(0));
    assert!(well_formed(&fs::read_to_string(&svg).unwrap()));

    let side = out.join("epsilon-greedy-t000.bounds.csv");
    let text = fs::read_to_string(&side).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(k, l)| {
            if k == 1 {
                let mut f: Vec<&str> = l.split(',').collect();
                f[4] = "0.9";
                f[5] = "true";
                f.join(",")
            } else {
                l.to_string()
            }
        })
        .collect();
    fs::write(&side, tampered.join("\n") + "\n").unwrap();
    assert_eq!(arise().arg("verify").arg(&out).status().unwrap().code(), Some(3));

    fs::write(&cfg, "[experiment]\ntrials = 0\n").unwrap();
    assert_eq!(arise().arg("run").arg(&cfg).status().unwrap().code(), Some(2));
    assert_eq!(arise().args(["oracle", "saddle", "--x", "0.5,0.5"]).status().unwrap().code(), Some(0));
}

#[test]
fn output_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[game]\nkind = \"saddle\"\nresolution = 3\n[solver]\nhorizon = 2\n[experiment]\ntrials = 1\nalgorithms = [\"sur-lite\"]\noutput_dir = \"unused\"\n",
    )
    .unwrap();
    let target = dir.path().join("from-env");
    let status = arise()
        .arg("run")
        .arg(&cfg)
        .env("ARISE_OUTPUT_DIR", &target)
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(target.join("metadata.toml").exists());
    assert!(!dir.path().join("unused").exists());
}
