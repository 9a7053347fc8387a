use std::path::PathBuf;
use std::process::ExitCode;

use arise_cli::config::{default_beta, parse_algorithm_list, BetaMode};
use arise_cli::oracle::{locate, minimizers, oracle_at};
use arise_cli::{
    emit_plot, load_config, read_traces, run_experiment, summarize, verify_traces, write_traces,
    HarnessError, PlotOptions,
};
use arise_core::{Game, GameKind, GameSpec};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arise", version, about = "Learn Nash equilibria of black-box games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write traces.
    Run {
        config: PathBuf,
        /// Output directory (overrides ARISE_OUTPUT_DIR and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed; trial k uses seed + k.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// A number or `theoretical`.
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Comma-separated algorithm names.
        #[arg(long)]
        algo: Option<String>,
        /// Replace the game with this kind's defaults.
        #[arg(long)]
        game: Option<String>,
    },
    /// Plot mean exact loss with standard-error bands.
    Plot {
        trace_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log_y: bool,
        #[arg(long)]
        best_so_far: bool,
    },
    /// Check invariants and certificates on recorded traces.
    Verify { trace_dir: PathBuf },
    /// Print exact utilities, gains and loss.
    Oracle {
        game: String,
        /// Candidate coordinates, comma separated.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 2)]
        agents: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, HarnessError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            trials,
            beta,
            horizon,
            algo,
            game,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(name) = game {
                let kind: GameKind = name
                    .parse()
                    .map_err(|e: arise_core::Error| HarnessError::Invalid(vec![e.to_string()]))?;
                let noise = cfg.game.noise_variance;
                cfg.game = GameSpec::new(kind, cfg.game.n).with_noise(noise);
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(h) = horizon {
                cfg.solver.horizon = h;
            }
            if let Some(list) = algo {
                cfg.algorithms = parse_algorithm_list(&list)?;
            }
            if let Some(b) = beta {
                if b.eq_ignore_ascii_case("theoretical") {
                    cfg.beta.mode = BetaMode::Theoretical;
                } else {
                    let v: f64 = b
                        .parse()
                        .map_err(|_| HarnessError::Invalid(vec![format!("--beta `{b}` is neither a number nor `theoretical`")]))?;
                    cfg.beta.mode = BetaMode::Practical;
                    cfg.beta.value = Some(v);
                }
            }
            cfg.validate()?;
            let dir = out.unwrap_or_else(|| cfg.effective_output_dir());
            let set = run_experiment(&cfg)?;
            write_traces(&set, &dir)?;
            println!("beta {} ({}), traces in {}", set.beta, cfg.beta.mode, dir.display());
            if let Ok(summary) = summarize(&set) {
                println!("{:<18} {:>6} {:>14} {:>14}", "algorithm", "trials", "median report", "median final");
                for a in &summary.algorithms {
                    println!(
                        "{:<18} {:>6} {:>14.6} {:>14.6}",
                        a.label, a.trials, a.report_median, a.final_median
                    );
                }
            }
            let failed = set.failures().count();
            if failed > 0 {
                eprintln!("{failed} run(s) failed; see metadata.toml");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot {
            trace_dir,
            out,
            log_y,
            best_so_far,
        } => {
            let set = read_traces(&trace_dir)?;
            let summary = summarize(&set)?;
            emit_plot(&summary, &out, PlotOptions { log_y, best_so_far })?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { trace_dir } => {
            let set = read_traces(&trace_dir)?;
            let report = verify_traces(&set);
            for c in &report.checks {
                println!("{c}");
            }
            let failed = report.failures().count();
            println!("{} checks, {failed} failed", report.checks.len());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Oracle { game, x, agents } => {
            let kind: GameKind = game
                .parse()
                .map_err(|e: arise_core::Error| HarnessError::Invalid(vec![e.to_string()]))?;
            let game = Game::new(GameSpec::new(kind, agents))?;
            match x {
                Some(coords) => println!("{}", oracle_at(&game, locate(&game, &coords)?)),
                None => {
                    println!(
                        "{kind}: {} candidates, default beta {}",
                        game.space().len(),
                        default_beta(kind)
                    );
                    for id in minimizers(&game) {
                        println!("{}", oracle_at(&game, id));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
