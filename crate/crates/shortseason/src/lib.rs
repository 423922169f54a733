//! Tools for concluding a suspended round-robin season with fewer games.
//!
//! When a season stops partway through, the league must pick which of the
//! remaining games to actually play so that the shortened season's final
//! standings resemble the standings the full season would have produced.
//! This crate implements that pipeline end to end:
//!
//! * **Predict** — fit a logistic win-probability model to played games
//!   ([`predictor`]), with optional PCA compression and Platt calibration.
//! * **Optimize** — select the remaining games to play. The main solver
//!   minimizes the expected squared distance between shortened- and
//!   full-season win percentages via Frank-Wolfe over the transportation
//!   polytope of feasible selections ([`objective`], [`fw`]); variants guard
//!   against misspecified probabilities ([`mmr`]), cap strength-of-schedule
//!   distortion ([`fw::solve_sos`]), or maximize expected pairwise ranking
//!   concordance directly ([`pc`]).
//! * **Evaluate** — Monte Carlo simulation of the selected schedule against
//!   the counterfactual full season ([`simulator`]), plus single-path
//!   backtesting against realized results.
//!
//! Instances can be built programmatically ([`league`], [`synth`]) or read
//! from CSV files ([`io`]); [`pipeline`] wires the stages together behind the
//! `shortseason` command-line binary.
//!
//! Every example in `examples/` is runnable with `cargo run --example`:
//!
//! * `ranking_metrics` — concordance and rank-distance metrics.
//! * `deterministic_equivalent` — closed-form objective vs. Monte Carlo.
//! * `frank_wolfe` — solving a synthetic league, with bound certificates.
//! * `strength_of_schedule` — the SoS-constrained variant.
//! * `min_max_regret` — robustness across candidate probability models.
//! * `concordance_search` — variable fixing plus local search.
//! * `win_probability` — fitting and calibrating the predictor.
//! * `season_simulation` — comparing solvers under simulation.
//! * `backtest` — scoring a schedule against realized outcomes.
//! * `csv_pipeline` — the full file-based pipeline.

pub mod concordance;
pub mod error;
pub(crate) mod flow;
pub mod fw;
pub mod io;
pub mod league;
pub mod metrics;
pub mod mmr;
pub mod objective;
pub mod pipeline;
pub mod predictor;
pub mod rng;
pub mod simulator;
pub mod synth;

pub use error::{Error, Result};
pub use league::{
    Game, LeagueState, Ranking, Scenario, Schedule, ScoreVector, Team, TieBreak, PROB_CLAMP,
};
