//! End-to-end runs: predict (or load probabilities), optimize, simulate,
//! and write the artifacts.
//!
//! A [`RunConfig`] names the input files, the solver, and one base seed;
//! [`run`] executes the whole pipeline and leaves three files in the output
//! directory: `schedule.csv` (the selection), `report.json` (objective,
//! bounds, simulated concordance and agreements, strength-of-schedule
//! discrepancy, and timings), and `run-manifest.json` (the configuration
//! echo plus derived seeds and the tool version). Identical configurations
//! produce byte-identical reports apart from the `timings` object, and
//! [`run_from_manifest`] replays a run from its manifest alone.

use crate::concordance::ConcordanceInstance;
use crate::error::{Error, Result};
use crate::fw::{self, FwConfig};
use crate::io::{self, IngestSpec, TargetsSource};
use crate::league::{LeagueState, Schedule, PROB_CLAMP};
use crate::mmr::{self, CandidateSet, MmrConfig};
use crate::objective::PwObjectiveModel;
use crate::predictor::{self, FeatureDataset, FitConfig, TrainedModel, DEFAULT_PLATT_SPLITS};
use crate::rng;
use crate::simulator::{self, EvalConfig};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// Default number of sampled scenarios for the sample-average solver.
pub const DEFAULT_SAA_SCENARIOS: usize = crate::concordance::DEFAULT_SCENARIOS;
/// Default move budget for the concordance local search.
pub const DEFAULT_SEARCH_BUDGET: usize = 2_000;
/// Default relative strength-of-schedule slack.
pub const DEFAULT_SOS_EPSILON: f64 = 0.02;
/// Default ridge strength when the pipeline trains its own predictor.
pub const DEFAULT_L2: f64 = 0.1;

/// Schedule selection strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// Frank-Wolfe on the closed-form win-percentage objective.
    PwFw,
    /// Min-max regret across candidate probability models.
    PwMmr,
    /// Frank-Wolfe with the strength-of-schedule constraint.
    PwSos,
    /// Concordance local search on the mean-value scenario.
    PcMvp,
    /// Concordance local search on sampled scenarios.
    PcSaa,
    /// Day-order greedy benchmark.
    Greedy,
    /// No further games: pre-suspension standings.
    StatusQuo,
}

impl Solver {
    pub const ALL: [Solver; 7] = [
        Solver::PwFw,
        Solver::PwMmr,
        Solver::PwSos,
        Solver::PcMvp,
        Solver::PcSaa,
        Solver::Greedy,
        Solver::StatusQuo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::PwFw => "pw-fw",
            Solver::PwMmr => "pw-mmr",
            Solver::PwSos => "pw-sos",
            Solver::PcMvp => "pc-mvp",
            Solver::PcSaa => "pc-saa",
            Solver::Greedy => "greedy",
            Solver::StatusQuo => "status-quo",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|solver| solver.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Solver::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!(
                    "unknown solver '{s}' (choose from {})",
                    names.join(", ")
                ))
            })
    }
}

/// The league input files and how to read them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeagueFiles {
    pub teams: PathBuf,
    pub remaining: PathBuf,
    /// Shortened season length per team.
    pub m: u32,
    /// Explicit `targets.csv`; omitted, targets derive from `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<PathBuf>,
    /// `probs.csv` overriding any inline probability column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<PathBuf>,
    /// Accept win probabilities of exactly 0 or 1 by nudging them inward.
    #[serde(default)]
    pub clamp_probs: bool,
}

impl LeagueFiles {
    /// Reads and validates the league instance.
    pub fn ingest(&self) -> Result<LeagueState> {
        io::ingest(&IngestSpec {
            teams: &self.teams,
            remaining: &self.remaining,
            m: self.m,
            targets: match &self.targets {
                Some(path) => TargetsSource::Explicit(path),
                None => TargetsSource::Auto,
            },
            probs: self.probs.as_deref(),
            clamp_probs: self.clamp_probs,
        })
    }

    /// The same files with the probability source replaced.
    fn with_probs(&self, probs: PathBuf) -> LeagueFiles {
        LeagueFiles {
            probs: Some(probs),
            ..self.clone()
        }
    }
}

/// One candidate probability model for the min-max regret ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateFile {
    pub label: String,
    pub probs: PathBuf,
}

/// A complete pipeline run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub league: LeagueFiles,
    pub solver: Solver,
    pub out_dir: PathBuf,
    /// Labeled training table; with `game_features`, the pipeline fits a
    /// logistic model and predicts the remaining games' probabilities
    /// instead of loading them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_features: Option<PathBuf>,
    /// Feature rows covering every remaining game id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_features: Option<PathBuf>,
    /// Ridge strength for the trained predictor.
    #[serde(default = "default_l2")]
    pub l2: f64,
    /// Platt-calibrate the trained predictor on a 30% holdout.
    #[serde(default)]
    pub calibrate: bool,
    /// Candidate probability files for the `pw-mmr` ensemble; empty means
    /// the base probabilities are the only candidate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateFile>,
    /// Relative slack for the `pw-sos` constraint.
    #[serde(default = "default_sos_epsilon")]
    pub sos_epsilon: f64,
    /// Sampled scenarios for `pc-saa`.
    #[serde(default = "default_saa_scenarios")]
    pub saa_scenarios: usize,
    /// Move budget for the concordance local search.
    #[serde(default = "default_search_budget")]
    pub search_budget: usize,
    /// Monte Carlo replications in the evaluation step.
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Base seed; every random stream in the run derives from it.
    #[serde(default)]
    pub seed: u64,
}

fn default_l2() -> f64 {
    DEFAULT_L2
}
fn default_sos_epsilon() -> f64 {
    DEFAULT_SOS_EPSILON
}
fn default_saa_scenarios() -> usize {
    DEFAULT_SAA_SCENARIOS
}
fn default_search_budget() -> usize {
    DEFAULT_SEARCH_BUDGET
}
fn default_replications() -> usize {
    simulator::DEFAULT_REPLICATIONS
}

/// The seeds each stage derives from the configured base seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeedPlan {
    pub base: u64,
    pub predictor: u64,
    pub scenarios: u64,
    pub search: u64,
    pub simulation: u64,
}

impl SeedPlan {
    pub fn new(base: u64) -> SeedPlan {
        SeedPlan {
            base,
            predictor: base.wrapping_add(1),
            scenarios: base.wrapping_add(2),
            search: base.wrapping_add(3),
            simulation: base.wrapping_add(4),
        }
    }
}

/// Regret of the chosen schedule against one candidate model.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledRegret {
    pub label: String,
    pub regret: f64,
}

/// A team's unmet targets after the raw greedy scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShortfallReport {
    pub team: usize,
    pub home: u32,
    pub away: u32,
}

/// Solver-specific result summary; fields are present only when the chosen
/// strategy produces them.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OptimizationSummary {
    pub solver: String,
    /// Objective of the returned schedule (expected squared ranking
    /// deviation for the `pw-*` family, lower is better).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Worst excess over the strength-of-schedule slack, `pw-sos` only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sos_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_regret: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate_regrets: Option<Vec<LabeledRegret>>,
    /// Expected concordant pairs of the returned schedule (`pc-*` family,
    /// higher is better).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_concordant_pairs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_concordant_pairs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortfalls: Option<Vec<ShortfallReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repaired: Option<bool>,
}

/// A solver's chosen schedule plus its summary.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub schedule: Schedule,
    pub summary: OptimizationSummary,
}

/// Mean category agreements, serializable.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AgreementSummary {
    pub playoff: f64,
    pub home_court: f64,
    pub lottery: f64,
}

impl From<simulator::AgreementMeans> for AgreementSummary {
    fn from(means: simulator::AgreementMeans) -> Self {
        AgreementSummary {
            playoff: means.playoff,
            home_court: means.home_court,
            lottery: means.lottery,
        }
    }
}

/// Monte Carlo evaluation summary, serializable.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationSummary {
    pub replications: usize,
    pub mean_concordance: f64,
    pub concordance_ci: [f64; 2],
    pub max_concordance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<AgreementSummary>,
    pub ssd: f64,
}

impl From<simulator::SimulationReport> for EvaluationSummary {
    fn from(report: simulator::SimulationReport) -> Self {
        EvaluationSummary {
            replications: report.replications,
            mean_concordance: report.mean_concordance,
            concordance_ci: [report.concordance_ci.0, report.concordance_ci.1],
            max_concordance: report.max_concordance,
            agreement: report.agreement.map(AgreementSummary::from),
            ssd: report.ssd,
        }
    }
}

/// Single-path backtest summary, serializable.
#[derive(Debug, Clone, Serialize)]
pub struct BacktestSummary {
    pub concordance: f64,
    pub max_concordance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<AgreementSummary>,
    pub single_path: bool,
}

impl From<simulator::BacktestReport> for BacktestSummary {
    fn from(report: simulator::BacktestReport) -> Self {
        BacktestSummary {
            concordance: report.concordance,
            max_concordance: report.max_concordance,
            agreement: report.agreement.map(AgreementSummary::from),
            single_path: report.single_path,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LeagueSummary {
    pub teams: usize,
    pub games: usize,
    pub m: u32,
    pub m_hat: u32,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScheduleSummary {
    pub selected_games: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SosSummary {
    pub ssd: f64,
    pub flagged_teams: Vec<usize>,
}

/// Wall-clock stage durations; the only non-reproducible report content.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predict_ms: Option<u64>,
    pub ingest_ms: u64,
    pub optimize_ms: u64,
    pub simulate_ms: u64,
    pub total_ms: u64,
}

/// Everything a run writes into `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub solver: String,
    pub league: LeagueSummary,
    pub schedule: ScheduleSummary,
    pub optimization: OptimizationSummary,
    pub strength_of_schedule: SosSummary,
    pub simulation: EvaluationSummary,
    pub timings: Timings,
}

/// `run-manifest.json`: enough to replay the run exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seeds: SeedPlan,
    pub config: RunConfig,
}

/// Paths and report of a completed run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub schedule_path: PathBuf,
    pub report_path: PathBuf,
    pub manifest_path: PathBuf,
    pub report: RunReport,
}

/// Aligns a `game_id,prob` file with the league's game order, applying the
/// same range rules as ingestion.
pub fn aligned_probs(state: &LeagueState, path: &Path, clamp: bool) -> Result<Vec<f64>> {
    let rows = io::read_probs_csv(path)?;
    let index_of: HashMap<u32, usize> = state
        .games()
        .iter()
        .enumerate()
        .map(|(g, game)| (game.id, g))
        .collect();
    let name = path.display().to_string();
    let mut probs = vec![None; state.n_games()];
    for (id, p) in rows {
        let Some(&g) = index_of.get(&id) else {
            return Err(Error::ingest(name, 0, format!("unknown game_id {id}")));
        };
        if probs[g].replace(p).is_some() {
            return Err(Error::ingest(name, 0, format!("duplicate game_id {id}")));
        }
    }
    probs
        .into_iter()
        .enumerate()
        .map(|(g, p)| {
            let id = state.games()[g].id;
            let p = p.ok_or_else(|| {
                Error::ingest(name.clone(), 0, format!("no probability for game_id {id}"))
            })?;
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::ingest(
                    name.clone(),
                    0,
                    format!("game_id {id}: probability {p} outside [0, 1]"),
                ));
            }
            if p <= PROB_CLAMP.0 || p >= PROB_CLAMP.1 {
                if clamp {
                    Ok(p.clamp(PROB_CLAMP.0, PROB_CLAMP.1))
                } else {
                    Err(Error::ingest(
                        name.clone(),
                        0,
                        format!("game_id {id}: probability {p} is degenerate; enable clamping"),
                    ))
                }
            } else {
                Ok(p)
            }
        })
        .collect()
}

/// Fits the pipeline's predictor: ridge logistic regression on the full
/// training table, or on a 70% split with Platt calibration on the rest.
pub fn fit_predictor(
    train: &FeatureDataset,
    l2: f64,
    calibrate: bool,
    seed: u64,
) -> Result<TrainedModel> {
    let config = FitConfig::default();
    if !calibrate {
        return predictor::fit_logistic(train, l2, &config);
    }
    let mut indices: Vec<usize> = (0..train.n_rows()).collect();
    indices.shuffle(&mut rng::stream(seed, u64::MAX));
    let cut = ((train.n_rows() as f64) * 0.7).round() as usize;
    let cut = cut.clamp(1, train.n_rows().saturating_sub(1).max(1));
    let fit_set = train.subset(&indices[..cut]);
    let holdout = train.subset(&indices[cut..]);
    let model = predictor::fit_logistic(&fit_set, l2, &config)?;
    predictor::calibrate_platt(&model, &holdout, DEFAULT_PLATT_SPLITS, seed)
}

/// Trains on `train_features`, predicts every remaining game's probability
/// from `game_features`, and returns `(game_id, prob)` rows in the order of
/// the remaining-games file.
pub fn predict_remaining(
    remaining: &Path,
    train_features: &Path,
    game_features: &Path,
    l2: f64,
    calibrate: bool,
    seed: u64,
) -> Result<Vec<(u32, f64)>> {
    let train = io::read_features_csv(train_features)?;
    let model = fit_predictor(&train, l2, calibrate, seed)?;
    let games = io::read_features_csv(game_features)?;
    let probs = model.predict_many(&games)?;
    let by_id: HashMap<u32, f64> = games.game_ids().iter().copied().zip(probs).collect();
    io::remaining_game_ids(remaining)?
        .into_iter()
        .map(|id| {
            by_id.get(&id).map(|&p| (id, p)).ok_or_else(|| {
                Error::Config(format!(
                    "no feature row for remaining game_id {id} in {}",
                    game_features.display()
                ))
            })
        })
        .collect()
}

/// Runs the configured solver on a league instance.
pub fn solve(state: &LeagueState, config: &RunConfig, seeds: &SeedPlan) -> Result<SolveOutcome> {
    let mut summary = OptimizationSummary {
        solver: config.solver.name().to_string(),
        ..OptimizationSummary::default()
    };
    let schedule = match config.solver {
        Solver::PwFw => {
            let model = PwObjectiveModel::new(state);
            let result = fw::solve(&model, &FwConfig::default())?;
            summary.objective = Some(result.upper_bound);
            summary.lower_bound = Some(result.lower_bound);
            summary.abs_gap = Some(result.abs_gap);
            summary.rel_gap = Some(result.rel_gap);
            summary.iterations = Some(result.iterations);
            summary.converged = Some(result.converged);
            result.best_atom
        }
        Solver::PwSos => {
            let model = PwObjectiveModel::new(state);
            let fw_config = FwConfig {
                sos_epsilon: Some(config.sos_epsilon),
                ..FwConfig::default()
            };
            let pre_pct = state.pre_win_percentages()?;
            let result = fw::solve_sos(&model, &fw_config, &pre_pct)?;
            summary.objective = Some(result.upper_bound);
            summary.lower_bound = Some(result.lower_bound);
            summary.abs_gap = Some(result.abs_gap);
            summary.rel_gap = Some(result.rel_gap);
            summary.iterations = Some(result.iterations);
            summary.converged = Some(result.converged);
            summary.sos_violation = result.sos_violation;
            result.best_atom
        }
        Solver::PwMmr => {
            let mut candidates: Vec<(String, Vec<f64>)> = Vec::new();
            if config.candidates.is_empty() {
                candidates.push(("base".to_string(), state.win_probs()));
            }
            for candidate in &config.candidates {
                candidates.push((
                    candidate.label.clone(),
                    aligned_probs(state, &candidate.probs, config.league.clamp_probs)?,
                ));
            }
            let set = CandidateSet::build(state, candidates, &FwConfig::default())?;
            let result = mmr::solve_mmr(&set, state, &MmrConfig::default())?;
            summary.max_regret = Some(result.max_regret);
            summary.lower_bound = Some(result.lower_bound);
            summary.abs_gap = Some(result.abs_gap);
            summary.iterations = Some(result.iterations);
            summary.converged = Some(result.converged);
            summary.candidate_regrets = Some(
                set.labels()
                    .iter()
                    .zip(&result.per_candidate_regrets)
                    .map(|(label, &regret)| LabeledRegret {
                        label: label.clone(),
                        regret,
                    })
                    .collect(),
            );
            result.best_atom
        }
        Solver::PcMvp | Solver::PcSaa => {
            let instance = match config.solver {
                Solver::PcMvp => ConcordanceInstance::mean_value(state)?,
                _ => ConcordanceInstance::sampled(state, config.saa_scenarios, seeds.scenarios)?,
            };
            let start = simulator::greedy_schedule(state)?.schedule;
            let schedule =
                crate::concordance::local_search(&instance, &start, config.search_budget, seeds.search)?;
            summary.expected_concordant_pairs = Some(instance.objective(&schedule)?);
            summary.max_concordant_pairs = Some(instance.max_pairs());
            summary.scenarios = Some(instance.n_scenarios());
            schedule
        }
        Solver::Greedy => {
            let outcome = simulator::greedy_schedule(state)?;
            summary.shortfalls = Some(
                outcome
                    .shortfalls
                    .iter()
                    .map(|s| ShortfallReport {
                        team: s.team,
                        home: s.home,
                        away: s.away,
                    })
                    .collect(),
            );
            summary.repaired = Some(outcome.repaired);
            outcome.schedule
        }
        Solver::StatusQuo => Schedule::integral(vec![false; state.n_games()]),
    };
    Ok(SolveOutcome { schedule, summary })
}

/// Simulates the chosen schedule (or the status-quo standings) and wraps
/// the report.
pub fn evaluate(
    state: &LeagueState,
    solver: Solver,
    schedule: &Schedule,
    replications: usize,
    seed: u64,
) -> Result<EvaluationSummary> {
    let eval = EvalConfig {
        replications,
        base_seed: seed,
        sim_probs: None,
        threads: None,
        keep_replications: false,
    };
    let report = match solver {
        Solver::StatusQuo => simulator::simulate_status_quo(state, &eval)?,
        _ => simulator::simulate(state, schedule, &eval)?,
    };
    Ok(EvaluationSummary::from(report))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Executes a full run and writes `schedule.csv`, `report.json`, and
/// `run-manifest.json` into the configured output directory.
pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    let total = Instant::now();
    let seeds = SeedPlan::new(config.seed);
    fs::create_dir_all(&config.out_dir)?;

    // Phase one: predicted probabilities, when feature tables are supplied.
    let mut timings = Timings::default();
    let league_files = match (&config.train_features, &config.game_features) {
        (Some(train), Some(games)) => {
            let started = Instant::now();
            let rows = predict_remaining(
                &config.league.remaining,
                train,
                games,
                config.l2,
                config.calibrate,
                seeds.predictor,
            )?;
            let path = config.out_dir.join("predicted-probs.csv");
            io::write_probs_csv(&path, &rows)?;
            timings.predict_ms = Some(started.elapsed().as_millis() as u64);
            config.league.with_probs(path)
        }
        (None, None) => config.league.clone(),
        _ => {
            return Err(Error::Config(
                "supply both train_features and game_features to predict, or neither".into(),
            ))
        }
    };

    let started = Instant::now();
    let state = league_files.ingest()?;
    timings.ingest_ms = started.elapsed().as_millis() as u64;

    let started = Instant::now();
    let outcome = solve(&state, config, &seeds)?;
    timings.optimize_ms = started.elapsed().as_millis() as u64;

    let feasible = state.check_feasible(&outcome.schedule).is_ok();
    let sos = if config.solver == Solver::StatusQuo {
        SosSummary {
            ssd: 0.0,
            flagged_teams: Vec::new(),
        }
    } else {
        let report = simulator::strength_of_schedule(&state, Some(&outcome.schedule))?;
        SosSummary {
            ssd: report.ssd,
            flagged_teams: report.flagged,
        }
    };

    let started = Instant::now();
    let simulation = evaluate(
        &state,
        config.solver,
        &outcome.schedule,
        config.replications,
        seeds.simulation,
    )?;
    timings.simulate_ms = started.elapsed().as_millis() as u64;

    let schedule_path = config.out_dir.join("schedule.csv");
    io::write_schedule_csv(&schedule_path, &state, &outcome.schedule)?;

    timings.total_ms = total.elapsed().as_millis() as u64;
    let report = RunReport {
        solver: config.solver.name().to_string(),
        league: LeagueSummary {
            teams: state.n_teams(),
            games: state.n_games(),
            m: state.m(),
            m_hat: state.m_hat(),
        },
        schedule: ScheduleSummary {
            selected_games: outcome.schedule.n_selected(),
            feasible,
        },
        optimization: outcome.summary,
        strength_of_schedule: sos,
        simulation,
        timings,
    };
    let report_path = config.out_dir.join("report.json");
    write_json(&report_path, &report)?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds,
        config: config.clone(),
    };
    let manifest_path = config.out_dir.join("run-manifest.json");
    write_json(&manifest_path, &manifest)?;

    Ok(RunArtifacts {
        schedule_path,
        report_path,
        manifest_path,
        report,
    })
}

/// Replays a run from its manifest; `out_dir` overrides the recorded output
/// directory (so a replay can sit next to the original for comparison).
pub fn run_from_manifest(path: &Path, out_dir: Option<&Path>) -> Result<RunArtifacts> {
    let text = fs::read_to_string(path)?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let mut config = manifest.config;
    if let Some(dir) = out_dir {
        config.out_dir = dir.to_path_buf();
    }
    run(&config)
}
