//! Learning Nash equilibria of black-box games from noisy utility queries.
//!
//! Each agent's utility gets its own Gaussian-process surrogate. Upper and
//! lower confidence bounds on utilities and on their partial maxima give
//! bounds on the Nash loss `f(x) = sum_i max_{x'_i} u_i(x'_i, x_-i) - u_i(x)`.
//! Candidates whose lower loss bound rises above zero leave the region of
//! interest, and queries go where the loss interval is widest.
//!
//! ```no_run
//! use arise_core::{run, Algorithm, AlgorithmKind, Game, GameSpec, SolverConfig};
//!
//! let game = Game::new(GameSpec::saddle()).unwrap();
//! let out = run(&SolverConfig::default(), Algorithm::new(AlgorithmKind::Arise), &game, 7).unwrap();
//! println!("reported {:?}, loss {}", game.space().coords(out.report), out.report_loss);
//! ```

pub mod bounds;
pub mod error;
pub mod game;
pub mod gp;
pub mod solver;
pub mod space;

pub use bounds::{BoundsTable, EnvelopeState, Interval, Posterior, Region};
pub use error::{Error, Result};
pub use game::{build_space, BudgetParams, Game, GameKind, GameSpec, MatrixPayoffs};
pub use gp::{KernelFamily, KernelParams, SurrogateModel};
pub use solver::{
    run, theoretical_beta, verify_round_certificates, Algorithm, AlgorithmKind, CertificateInput,
    CertificateReport, RefitSchedule, RunOutput, SolverConfig, SolverState, TraceRecord,
};
pub use space::JointSpace;

/// Crate version recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
