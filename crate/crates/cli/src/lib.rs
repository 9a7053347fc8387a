//! Experiment harness for `arise-core`: TOML configs, seeded multi-trial
//! runs, CSV traces, summaries, SVG plots and trace verification.

pub mod config;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod plot;
pub mod summary;
pub mod traces;
pub mod verify;

pub use config::{load_config, BetaMode, BetaSetting, ExperimentConfig, OUTPUT_DIR_ENV};
pub use error::HarnessError;
pub use experiment::{run_experiment, RunRecord, RunResult, TraceSet};
pub use plot::{emit_plot, render_svg, PlotOptions};
pub use summary::{summarize, AlgorithmSummary, Summary};
pub use traces::{read_traces, write_traces};
pub use verify::{verify_traces, VerifyReport};
