//! Maximum-entropy analysis of 2×2 population games.
//!
//! Two populations of agents (X and Y, four each by default) are randomly
//! matched every round; a round's outcome is the *social state* `(i, j)`,
//! the number of X-agents playing X1 and Y-agents playing Y1. Pooled over a
//! session these states form a distribution on the `(n+1)²` lattice, which
//! this crate compares with the maximum-entropy prediction implied by its
//! mean: the product of two binomials.
//!
//! - [`game_model`]: payoff matrices, the built-in treatments, mixed equilibria.
//! - [`lattice`]: social states, degeneracies, tallies and mean observations.
//! - [`maxent`]: the binomial prediction, degeneracy-corrected entropy, the
//!   entropy-concentration bound and an independent dual solver.
//! - [`stats`]: χ² fit, entropy deviation, the distance-weighted `Z`
//!   statistic, t-tests, summaries and the special functions behind them.
//! - [`simulator`]: seeded sessions and ensembles with pluggable policies.
//! - [`session_io`]: session CSV, treatment tables, JSON reports, SVG plots.
//! - [`analysis`], [`reproduce`], [`cli`]: the pipelines the command-line
//!   tool runs.
//!
//! ```
//! use popmaxent::prelude::*;
//!
//! let game = &treatment_catalog()[0];
//! let session = run_session(game, &PolicySpec::NASH, 200, 7).unwrap();
//! let observed = tally(&session.rounds, 4).unwrap();
//! let predicted = binomial_prediction(mean_observation(&observed), 4);
//! assert!(empirical_entropy(&observed) <= predicted.s_t);
//! ```

pub mod analysis;
pub mod cli;
pub mod game_model;
pub mod lattice;
pub mod maxent;
pub mod reproduce;
pub mod rng;
pub mod session_io;
pub mod simulator;
pub mod stats;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Game(#[from] game_model::GameError),
    #[error(transparent)]
    Lattice(#[from] lattice::LatticeError),
    #[error(transparent)]
    Maxent(#[from] maxent::MaxentError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Sim(#[from] simulator::SimError),
    #[error(transparent)]
    Io(#[from] session_io::SessionIoError),
}

pub mod prelude {
    pub use crate::analysis::{
        analyze_record, summarize_ensemble, AnalysisOptions, EnsembleSummary,
    };
    pub use crate::game_model::{
        find_treatment, mixed_nash, treatment_catalog, EquilibriumPoint, PayoffMatrix, Treatment,
    };
    pub use crate::lattice::{
        degeneracy, mean_observation, tally, LatticeDistribution, LatticeGrid, MeanObservation,
        SocialState,
    };
    pub use crate::maxent::{
        binomial_prediction, dual_maxent_solve, ect_bound, empirical_entropy, entropy,
        entropy_report, theoretical_entropy, EctScale, EctSettings, EntropyReport,
        MaxentPrediction,
    };
    pub use crate::session_io::{
        read_session_csv, read_treatment_config, write_session_csv, AnalysisReport, SessionIdentity,
    };
    pub use crate::simulator::{run_ensemble, run_session, PolicySpec, SessionRecord};
    pub use crate::stats::{
        chi_square_gof, chi_square_quantile, entropy_deviation, one_sample_t_test, summarize,
        z_statistic, ChiSquareReport, DeviationReport, SummaryStats,
    };
}
