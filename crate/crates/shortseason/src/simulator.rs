//! Monte Carlo evaluation harness.
//!
//! Given a league and a candidate shortened season, this module measures how
//! faithfully the shortened ranking reproduces the counterfactual
//! full-season ranking: per replication it draws one Bernoulli outcome per
//! remaining game, scores both seasons, and accumulates the pair-agreement
//! count plus category agreements (playoff, home-court, lottery). It also
//! houses the two benchmarks (day-order greedy selection and the status-quo
//! ranking), the opponent-win-percentage strength-of-schedule report,
//! single-path backtesting against realized outcomes, and variance/sharpness
//! diagnostics of the selected games.
//!
//! Replications are embarrassingly parallel: each one draws from its own
//! counter-derived RNG stream and writes to its own slot, and the reduction
//! runs in index order, so reports are bit-identical for any thread count.

use crate::concordance::count_pair_agreements;
use crate::error::{Error, Result};
use crate::fw;
use crate::league::{LeagueState, Ranking, Scenario, Schedule, ScoreVector, TieBreak};
use crate::rng;
use rand::Rng;
use std::collections::BTreeMap;

/// Default number of Monte Carlo replications.
pub const DEFAULT_REPLICATIONS: usize = 10_000;

/// Playoff teams: the top 8 of each conference.
pub const PLAYOFF_CUTOFF: usize = 8;
/// Home-court advantage: the top 4 of each conference.
pub const HOME_COURT_CUTOFF: usize = 4;
/// Double-digit lottery odds: the bottom 5 teams overall.
pub const LOTTERY_COUNT: usize = 5;

/// Monte Carlo evaluation settings.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub replications: usize,
    pub base_seed: u64,
    /// Evaluator win probabilities, when they differ from the optimizer's
    /// (e.g. a model trained on all pre-suspension data while the optimizer
    /// saw a hold-out split). `None` uses the league's game probabilities.
    pub sim_probs: Option<Vec<f64>>,
    /// Worker-thread count; `None` consults `SHORTSEASON_THREADS`, then the
    /// machine. The report is bit-identical either way.
    pub threads: Option<usize>,
    /// Keep the raw per-replication table in the report.
    pub keep_replications: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            replications: DEFAULT_REPLICATIONS,
            base_seed: 0,
            sim_probs: None,
            threads: None,
            keep_replications: false,
        }
    }
}

impl EvalConfig {
    fn validate(&self, state: &LeagueState) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("simulation needs at least one replication".into()));
        }
        if let Some(probs) = &self.sim_probs {
            if probs.len() != state.n_games() {
                return Err(Error::Dimension {
                    expected: state.n_games(),
                    got: probs.len(),
                });
            }
            if let Some(&p) = probs.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
                return Err(Error::Domain(format!(
                    "evaluator win probability {p} is outside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Mean category-agreement percentages over the replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementMeans {
    pub playoff: f64,
    pub home_court: f64,
    pub lottery: f64,
}

/// Raw outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationRow {
    pub replication: usize,
    pub concordance: f64,
    pub playoff: Option<f64>,
    pub home_court: Option<f64>,
    pub lottery: Option<f64>,
}

/// Summary of a Monte Carlo evaluation.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub replications: usize,
    pub mean_concordance: f64,
    /// Normal-approximation 95% confidence interval on the mean.
    pub concordance_ci: (f64, f64),
    /// `n(n-1)/2`, the per-replication ceiling.
    pub max_concordance: f64,
    /// Category agreements; `None` when the league is too small for the
    /// cutoffs (every conference needs 8 teams and the league 5).
    pub agreement: Option<AgreementMeans>,
    /// Strength-of-schedule discrepancy of the evaluated schedule.
    pub ssd: f64,
    pub per_replication: Option<Vec<ReplicationRow>>,
}

/// Agreement category, per the three ranking stakes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementCategory {
    Playoff,
    HomeCourt,
    Lottery,
}

fn conference_groups(state: &LeagueState) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, team) in state.teams().iter().enumerate() {
        groups.entry(team.conference.as_str()).or_default().push(i);
    }
    groups
}

/// Whether all three category cutoffs fit this league.
pub fn agreement_applicable(state: &LeagueState) -> bool {
    state.n_teams() >= LOTTERY_COUNT
        && conference_groups(state)
            .values()
            .all(|members| members.len() >= PLAYOFF_CUTOFF)
}

/// Membership mask of the category under `ranking`.
fn category_members(state: &LeagueState, ranking: &Ranking, category: AgreementCategory) -> Vec<bool> {
    let n = state.n_teams();
    let mut member = vec![false; n];
    match category {
        AgreementCategory::Playoff | AgreementCategory::HomeCourt => {
            let k = if category == AgreementCategory::Playoff {
                PLAYOFF_CUTOFF
            } else {
                HOME_COURT_CUTOFF
            };
            for members in conference_groups(state).values() {
                let mut ids = members.clone();
                ids.sort_by_key(|&i| ranking.rank(i));
                for &i in ids.iter().take(k) {
                    member[i] = true;
                }
            }
        }
        AgreementCategory::Lottery => {
            for (i, slot) in member.iter_mut().enumerate() {
                *slot = ranking.rank(i) > n - LOTTERY_COUNT;
            }
        }
    }
    member
}

fn category_percentage(
    state: &LeagueState,
    short_rank: &Ranking,
    full_rank: &Ranking,
    category: AgreementCategory,
) -> f64 {
    let short = category_members(state, short_rank, category);
    let full = category_members(state, full_rank, category);
    let size = full.iter().filter(|&&b| b).count();
    let shared = short
        .iter()
        .zip(&full)
        .filter(|&(&s, &f)| s && f)
        .count();
    100.0 * shared as f64 / size as f64
}

/// Percentage of category members shared between a shortened-season and a
/// full-season score vector, using the deterministic ranking tie-breaks.
pub fn agreement(
    state: &LeagueState,
    short: &ScoreVector,
    full: &ScoreVector,
    category: AgreementCategory,
) -> Result<f64> {
    match category {
        AgreementCategory::Playoff | AgreementCategory::HomeCourt => {
            let k = if category == AgreementCategory::Playoff {
                PLAYOFF_CUTOFF
            } else {
                HOME_COURT_CUTOFF
            };
            if let Some((name, members)) = conference_groups(state)
                .iter()
                .find(|(_, members)| members.len() < k)
            {
                return Err(Error::Config(format!(
                    "conference {name} has {} teams, fewer than the cutoff {k}",
                    members.len()
                )));
            }
        }
        AgreementCategory::Lottery => {
            if state.n_teams() < LOTTERY_COUNT {
                return Err(Error::Config(format!(
                    "{} teams cannot have a bottom {LOTTERY_COUNT}",
                    state.n_teams()
                )));
            }
        }
    }
    let short_rank = state.rank_from_scores(short, TieBreak::PreWinPctThenIndex)?;
    let full_rank = state.rank_from_scores(full, TieBreak::PreWinPctThenIndex)?;
    Ok(category_percentage(state, &short_rank, &full_rank, category))
}

/// The shortened-season scores evaluated per replication.
enum ShortSource<'a> {
    /// Score the selected games under the drawn scenario.
    Schedule(&'a Schedule),
    /// A fixed score vector (status quo: no further games played).
    Fixed(ScoreVector),
}

struct RepOutcome {
    concordance: f64,
    playoff: f64,
    home_court: f64,
    lottery: f64,
}

fn replicate(
    state: &LeagueState,
    source: &ShortSource<'_>,
    probs: &[f64],
    base_seed: u64,
    replication: usize,
    with_agreement: bool,
) -> Result<RepOutcome> {
    let mut r = rng::stream(base_seed, replication as u64);
    let outcomes: Vec<bool> = probs.iter().map(|&p| r.random_bool(p)).collect();
    let scenario = Scenario::binary(outcomes);
    let full = state.full_scores_unchecked(&scenario);
    let full_rank = state.rank_from_scores(&full, TieBreak::PreWinPctThenIndex)?;
    let short = match source {
        ShortSource::Schedule(schedule) => state.short_scores_unchecked(schedule, &scenario),
        ShortSource::Fixed(scores) => scores.clone(),
    };
    let concordance = count_pair_agreements(&short, &full_rank) as f64;
    let (playoff, home_court, lottery) = if with_agreement {
        let short_rank = state.rank_from_scores(&short, TieBreak::PreWinPctThenIndex)?;
        (
            category_percentage(state, &short_rank, &full_rank, AgreementCategory::Playoff),
            category_percentage(state, &short_rank, &full_rank, AgreementCategory::HomeCourt),
            category_percentage(state, &short_rank, &full_rank, AgreementCategory::Lottery),
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    Ok(RepOutcome {
        concordance,
        playoff,
        home_court,
        lottery,
    })
}

fn effective_threads(requested: Option<usize>, replications: usize) -> usize {
    requested
        .or_else(|| {
            std::env::var("SHORTSEASON_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, replications.max(1))
}

fn run_replications(
    state: &LeagueState,
    source: &ShortSource<'_>,
    ssd: f64,
    config: &EvalConfig,
) -> Result<SimulationReport> {
    config.validate(state)?;
    let probs = match &config.sim_probs {
        Some(p) => p.clone(),
        None => state.win_probs(),
    };
    let with_agreement = agreement_applicable(state);
    let replications = config.replications;

    let mut outcomes: Vec<Option<Result<RepOutcome>>> = Vec::with_capacity(replications);
    outcomes.resize_with(replications, || None);
    let threads = effective_threads(config.threads, replications);
    let chunk = replications.div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, slots) in outcomes.chunks_mut(chunk).enumerate() {
            let probs = &probs;
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(replicate(
                        state,
                        source,
                        probs,
                        config.base_seed,
                        c * chunk + k,
                        with_agreement,
                    ));
                }
            });
        }
    });

    // Fixed-order reduction: results are consumed by replication index, so
    // the report does not depend on thread scheduling.
    let mut rows = Vec::with_capacity(replications);
    for (i, slot) in outcomes.into_iter().enumerate() {
        let outcome = slot.expect("every replication slot is filled")?;
        rows.push(ReplicationRow {
            replication: i,
            concordance: outcome.concordance,
            playoff: with_agreement.then_some(outcome.playoff),
            home_court: with_agreement.then_some(outcome.home_court),
            lottery: with_agreement.then_some(outcome.lottery),
        });
    }

    let rf = replications as f64;
    let mean = rows.iter().map(|r| r.concordance).sum::<f64>() / rf;
    let half_width = if replications > 1 {
        let var = rows
            .iter()
            .map(|r| (r.concordance - mean).powi(2))
            .sum::<f64>()
            / (rf - 1.0);
        1.96 * (var / rf).sqrt()
    } else {
        0.0
    };
    let agreement = with_agreement.then(|| AgreementMeans {
        playoff: rows.iter().filter_map(|r| r.playoff).sum::<f64>() / rf,
        home_court: rows.iter().filter_map(|r| r.home_court).sum::<f64>() / rf,
        lottery: rows.iter().filter_map(|r| r.lottery).sum::<f64>() / rf,
    });
    let n = state.n_teams() as f64;
    Ok(SimulationReport {
        replications,
        mean_concordance: mean,
        concordance_ci: (mean - half_width, mean + half_width),
        max_concordance: n * (n - 1.0) / 2.0,
        agreement,
        ssd,
        per_replication: config.keep_replications.then_some(rows),
    })
}

/// Evaluates a feasible shortened season by Monte Carlo simulation.
pub fn simulate(
    state: &LeagueState,
    schedule: &Schedule,
    config: &EvalConfig,
) -> Result<SimulationReport> {
    state.check_feasible(schedule)?;
    let ssd = strength_of_schedule(state, Some(schedule))?.ssd;
    run_replications(state, &ShortSource::Schedule(schedule), ssd, config)
}

/// Evaluates the status-quo policy: no further games, teams ranked by their
/// pre-suspension records against each replication's simulated full season.
/// Its SSD is 0 by the zero-remaining-games convention.
pub fn simulate_status_quo(state: &LeagueState, config: &EvalConfig) -> Result<SimulationReport> {
    let scores = status_quo_scores(state)?;
    run_replications(state, &ShortSource::Fixed(scores), 0.0, config)
}

/// Pre-suspension records as scores: `y0_i / m0_i` per team.
pub fn status_quo_scores(state: &LeagueState) -> Result<ScoreVector> {
    let mut nums = Vec::with_capacity(state.n_teams());
    let mut dens = Vec::with_capacity(state.n_teams());
    for (i, team) in state.teams().iter().enumerate() {
        let played = team.pre_games();
        if played == 0 {
            return Err(Error::DegenerateInstance(format!(
                "team {i} has not played any games; the status-quo ranking is undefined"
            )));
        }
        nums.push(f64::from(team.pre_wins));
        dens.push(f64::from(played));
    }
    ScoreVector::per_team(nums, dens)
}

/// A team's unmet targets after the greedy scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shortfall {
    pub team: usize,
    pub home: u32,
    pub away: u32,
}

/// A greedy benchmark schedule, always feasible: when the scan strands a
/// target, the reported schedule is the feasible point closest to the scan's
/// selection, and `shortfalls` documents what the raw scan missed.
#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    pub schedule: Schedule,
    pub shortfalls: Vec<Shortfall>,
    pub repaired: bool,
}

/// Selects games in (day, id) order, taking a game whenever both the host's
/// home target and the guest's away target still have room.
pub fn greedy_schedule(state: &LeagueState) -> Result<GreedyOutcome> {
    let n = state.n_teams();
    let mut order: Vec<usize> = (0..state.n_games()).collect();
    order.sort_by_key(|&g| (state.games()[g].day, state.games()[g].id));

    let mut home_used = vec![0u32; n];
    let mut away_used = vec![0u32; n];
    let mut selected = vec![false; state.n_games()];
    for &g in &order {
        let game = &state.games()[g];
        if home_used[game.host] < state.teams()[game.host].home_target
            && away_used[game.guest] < state.teams()[game.guest].away_target
        {
            selected[g] = true;
            home_used[game.host] += 1;
            away_used[game.guest] += 1;
        }
    }

    let mut shortfalls = Vec::new();
    for i in 0..n {
        let home = state.teams()[i].home_target - home_used[i];
        let away = state.teams()[i].away_target - away_used[i];
        if home > 0 || away > 0 {
            shortfalls.push(Shortfall { team: i, home, away });
        }
    }
    if shortfalls.is_empty() {
        let schedule = Schedule::integral(selected);
        state.check_feasible(&schedule)?;
        return Ok(GreedyOutcome {
            schedule,
            shortfalls,
            repaired: false,
        });
    }
    // Repair: find the feasible selection with maximum overlap with the
    // scan (every kept game scores -1), a transportation problem.
    let costs: Vec<f64> = selected.iter().map(|&s| if s { -1.0 } else { 0.0 }).collect();
    let schedule = fw::transportation_subproblem(state, &costs)?;
    Ok(GreedyOutcome {
        schedule,
        shortfalls,
        repaired: true,
    })
}

/// Strength-of-schedule report: per-team opponent win percentages for the
/// shortened and full remainders, and their positive discrepancy.
#[derive(Debug, Clone)]
pub struct SosReport {
    /// Shortened-season opponent win percentage (0 for flagged teams).
    pub ow: Vec<f64>,
    /// Full-season opponent win percentage.
    pub ow_full: Vec<f64>,
    /// `(1/n) * sum_i max{(OW_i - OW_full_i) / OW_full_i, 0}`.
    pub ssd: f64,
    /// Teams with no remaining shortened-season games; their SSD terms are
    /// defined as 0 (their schedule cannot get harder).
    pub flagged: Vec<usize>,
}

/// Opponent win percentages under `schedule` (or the full remaining slate
/// when `None`), averaged with pre-suspension records, plus the SSD metric.
/// The metric is linear in the schedule, so fractional values are accepted.
pub fn strength_of_schedule(
    state: &LeagueState,
    schedule: Option<&Schedule>,
) -> Result<SosReport> {
    if let Some(s) = schedule {
        if s.len() != state.n_games() {
            return Err(Error::Dimension {
                expected: state.n_games(),
                got: s.len(),
            });
        }
    }
    let pre_pct = state.pre_win_percentages()?;
    let x: Vec<f64> = match schedule {
        Some(s) => s.values(),
        None => vec![1.0; state.n_games()],
    };

    let n = state.n_teams();
    let mut ow = vec![0.0; n];
    let mut ow_full = vec![0.0; n];
    let mut flagged = Vec::new();
    let mut ssd = 0.0;
    for i in 0..n {
        let mut short_sum = 0.0;
        let mut full_sum = 0.0;
        for &g in state.home_games(i) {
            let opponent = pre_pct[state.games()[g].guest];
            short_sum += x[g] * opponent;
            full_sum += opponent;
        }
        for &g in state.away_games(i) {
            let opponent = pre_pct[state.games()[g].host];
            short_sum += x[g] * opponent;
            full_sum += opponent;
        }
        let den_short = f64::from(state.m()) - f64::from(state.teams()[i].pre_games());
        let den_full = f64::from(state.m_hat()) - f64::from(state.teams()[i].pre_games());
        if den_short <= 0.0 {
            flagged.push(i);
            continue;
        }
        ow[i] = short_sum / den_short;
        ow_full[i] = full_sum / den_full;
        if ow_full[i] > 0.0 {
            ssd += ((ow[i] - ow_full[i]) / ow_full[i]).max(0.0);
        }
    }
    ssd /= n as f64;
    Ok(SosReport {
        ow,
        ow_full,
        ssd,
        flagged,
    })
}

/// Evaluation against the one realized outcome vector: no replications, no
/// confidence interval, just the single sample path.
#[derive(Debug, Clone)]
pub struct BacktestReport {
    pub concordance: f64,
    pub max_concordance: f64,
    pub agreement: Option<AgreementMeans>,
    /// Always true: this report is a single sample path, not an average.
    pub single_path: bool,
}

/// Scores a feasible schedule against actually realized outcomes.
pub fn backtest(
    state: &LeagueState,
    schedule: &Schedule,
    actual: &Scenario,
) -> Result<BacktestReport> {
    state.check_feasible(schedule)?;
    if actual.len() != state.n_games() {
        return Err(Error::Dimension {
            expected: state.n_games(),
            got: actual.len(),
        });
    }
    let full = state.full_scores_unchecked(actual);
    let full_rank = state.rank_from_scores(&full, TieBreak::PreWinPctThenIndex)?;
    let short = state.short_scores_unchecked(schedule, actual);
    let concordance = count_pair_agreements(&short, &full_rank) as f64;
    let agreement = if agreement_applicable(state) {
        let short_rank = state.rank_from_scores(&short, TieBreak::PreWinPctThenIndex)?;
        Some(AgreementMeans {
            playoff: category_percentage(state, &short_rank, &full_rank, AgreementCategory::Playoff),
            home_court: category_percentage(
                state,
                &short_rank,
                &full_rank,
                AgreementCategory::HomeCourt,
            ),
            lottery: category_percentage(state, &short_rank, &full_rank, AgreementCategory::Lottery),
        })
    } else {
        None
    };
    let n = state.n_teams() as f64;
    Ok(BacktestReport {
        concordance,
        max_concordance: n * (n - 1.0) / 2.0,
        agreement,
        single_path: true,
    })
}

/// How the selected and excluded games compare on outcome variance and
/// probability sharpness, plus the objective coefficient that governs the
/// trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSharpness {
    /// Mean `p(1-p)` over selected games (`None` if none are selected).
    pub selected_variance: Option<f64>,
    /// Mean `p(1-p)` over excluded games (`None` if all are selected).
    pub excluded_variance: Option<f64>,
    /// Mean `max{p, 1-p}` over selected games.
    pub selected_sharpness: Option<f64>,
    /// Mean `max{p, 1-p}` over excluded games.
    pub excluded_sharpness: Option<f64>,
    /// `2 (1 - 2m/m_hat) G1 / m^2` where `G1` is the number of selected
    /// games: negative for long shortened seasons (m > m_hat/2), where the
    /// objective rewards high-variance (evenly matched) games.
    pub coefficient: f64,
}

/// Variance/sharpness diagnostics of a schedule; fractional values weight
/// the averages.
pub fn variance_sharpness(state: &LeagueState, schedule: &Schedule) -> Result<VarianceSharpness> {
    if schedule.len() != state.n_games() {
        return Err(Error::Dimension {
            expected: state.n_games(),
            got: schedule.len(),
        });
    }
    let mut sel_weight = 0.0;
    let mut exc_weight = 0.0;
    let mut sel_var = 0.0;
    let mut exc_var = 0.0;
    let mut sel_sharp = 0.0;
    let mut exc_sharp = 0.0;
    for (g, game) in state.games().iter().enumerate() {
        let x = schedule.value(g);
        let p = game.win_prob;
        let variance = p * (1.0 - p);
        let sharpness = p.max(1.0 - p);
        sel_weight += x;
        exc_weight += 1.0 - x;
        sel_var += x * variance;
        exc_var += (1.0 - x) * variance;
        sel_sharp += x * sharpness;
        exc_sharp += (1.0 - x) * sharpness;
    }
    let m = f64::from(state.m());
    let coefficient = 2.0 * state.alpha() * sel_weight / (m * m);
    let mean = |total: f64, weight: f64| (weight > 0.0).then_some(total / weight);
    Ok(VarianceSharpness {
        selected_variance: mean(sel_var, sel_weight),
        excluded_variance: mean(exc_var, exc_weight),
        selected_sharpness: mean(sel_sharp, sel_weight),
        excluded_sharpness: mean(exc_sharp, exc_weight),
        coefficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::league::{Game, Team};
    use crate::synth;

    /// A 30-team league whose shortened season is the full season.
    fn full_length_league(seed: u64) -> LeagueState {
        let cfg = synth::SynthConfig {
            m: 82,
            ..synth::SynthConfig::day100_analogue(seed)
        };
        synth::league(&cfg).unwrap()
    }

    #[test]
    fn playing_the_full_season_agrees_perfectly() {
        let state = full_length_league(31);
        let schedule = Schedule::integral(vec![true; state.n_games()]);
        let config = EvalConfig {
            replications: 200,
            base_seed: 9,
            keep_replications: true,
            ..EvalConfig::default()
        };
        let report = simulate(&state, &schedule, &config).unwrap();
        assert_eq!(report.mean_concordance, 435.0);
        assert_eq!(report.max_concordance, 435.0);
        assert_eq!(report.concordance_ci, (435.0, 435.0));
        let agreement = report.agreement.unwrap();
        assert_eq!(agreement.playoff, 100.0);
        assert_eq!(agreement.home_court, 100.0);
        assert_eq!(agreement.lottery, 100.0);
        assert_eq!(report.ssd, 0.0);
        for row in report.per_replication.as_deref().unwrap() {
            assert!(row.concordance <= 435.0);
            assert_eq!(row.concordance, 435.0);
        }
    }

    /// Exact expected concordance by total scenario enumeration.
    fn exact_expected_concordance(state: &LeagueState, schedule: &Schedule) -> f64 {
        let g = state.n_games();
        assert!(g <= 16);
        let probs = state.win_probs();
        let mut total = 0.0;
        for mask in 0u32..(1 << g) {
            let outcomes: Vec<bool> = (0..g).map(|k| mask >> k & 1 == 1).collect();
            let weight: f64 = (0..g)
                .map(|k| if outcomes[k] { probs[k] } else { 1.0 - probs[k] })
                .product();
            let scenario = Scenario::binary(outcomes);
            let full = state.full_scores_unchecked(&scenario);
            let rank = state
                .rank_from_scores(&full, TieBreak::PreWinPctThenIndex)
                .unwrap();
            let short = state.short_scores_unchecked(schedule, &scenario);
            total += weight * count_pair_agreements(&short, &rank) as f64;
        }
        total
    }

    #[test]
    fn simulated_mean_matches_exhaustive_expectation() {
        for seed in [41u64, 42, 43] {
            let mut r = rng::stream(seed, 0);
            let probs: [f64; 8] = std::array::from_fn(|_| r.random_range(0.15..0.85));
            let state = synth::four_team_league(
                [3, 2, 1, 0],
                [(1, 1), (1, 1), (1, 1), (1, 1)],
                6,
                8,
                &probs,
            )
            .unwrap();
            let schedule = synth::enumerate_feasible(&state).unwrap().swap_remove(0);
            let exact = exact_expected_concordance(&state, &schedule);
            let config = EvalConfig {
                replications: 20_000,
                base_seed: seed,
                ..EvalConfig::default()
            };
            let report = simulate(&state, &schedule, &config).unwrap();
            let stderr = (report.concordance_ci.1 - report.concordance_ci.0) / (2.0 * 1.96);
            assert!(
                (report.mean_concordance - exact).abs() <= 3.0 * stderr.max(1e-12),
                "seed {seed}: mean {} vs exact {exact} (stderr {stderr})",
                report.mean_concordance
            );
        }
    }

    #[test]
    fn reports_are_bit_identical_across_thread_counts() {
        let state = synth::league(&synth::SynthConfig::day100_analogue(33)).unwrap();
        let schedule = greedy_schedule(&state).unwrap().schedule;
        let base = EvalConfig {
            replications: 250,
            base_seed: 5,
            keep_replications: true,
            ..EvalConfig::default()
        };
        let one = simulate(
            &state,
            &schedule,
            &EvalConfig {
                threads: Some(1),
                ..base.clone()
            },
        )
        .unwrap();
        let four = simulate(
            &state,
            &schedule,
            &EvalConfig {
                threads: Some(4),
                ..base
            },
        )
        .unwrap();
        assert_eq!(one.mean_concordance, four.mean_concordance);
        assert_eq!(one.concordance_ci, four.concordance_ci);
        assert_eq!(one.agreement.unwrap(), four.agreement.unwrap());
        assert_eq!(one.per_replication.unwrap(), four.per_replication.unwrap());
    }

    #[test]
    fn thirty_team_replications_never_exceed_the_ceiling() {
        let state = synth::league(&synth::SynthConfig::day100_analogue(34)).unwrap();
        let schedule = greedy_schedule(&state).unwrap().schedule;
        let config = EvalConfig {
            replications: 300,
            base_seed: 11,
            keep_replications: true,
            ..EvalConfig::default()
        };
        let report = simulate(&state, &schedule, &config).unwrap();
        assert_eq!(report.max_concordance, 435.0);
        for row in report.per_replication.as_deref().unwrap() {
            assert!(row.concordance >= 0.0 && row.concordance <= 435.0);
            for pct in [row.playoff, row.home_court, row.lottery] {
                let pct = pct.unwrap();
                assert!((0.0..=100.0).contains(&pct));
            }
        }
        assert!(report.concordance_ci.0 <= report.mean_concordance);
        assert!(report.concordance_ci.1 >= report.mean_concordance);
    }

    #[test]
    fn evaluator_probabilities_are_separate_and_validated() {
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let schedule = synth::enumerate_feasible(&state).unwrap().swap_remove(0);
        let base = EvalConfig {
            replications: 400,
            base_seed: 3,
            ..EvalConfig::default()
        };
        let with_state_probs = simulate(&state, &schedule, &base).unwrap();
        let skewed = EvalConfig {
            sim_probs: Some(vec![0.97; 8]),
            ..base.clone()
        };
        let with_skewed = simulate(&state, &schedule, &skewed).unwrap();
        assert_ne!(
            with_state_probs.mean_concordance,
            with_skewed.mean_concordance
        );

        let wrong_len = EvalConfig {
            sim_probs: Some(vec![0.5; 7]),
            ..base.clone()
        };
        assert!(matches!(
            simulate(&state, &schedule, &wrong_len),
            Err(Error::Dimension { .. })
        ));
        let out_of_range = EvalConfig {
            sim_probs: Some(vec![1.0; 8]),
            ..base.clone()
        };
        assert!(matches!(
            simulate(&state, &schedule, &out_of_range),
            Err(Error::Domain(_))
        ));
        let no_reps = EvalConfig {
            replications: 0,
            ..base
        };
        assert!(matches!(
            simulate(&state, &schedule, &no_reps),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn status_quo_scores_match_hand_division() {
        // A: 33 wins of 64 games; B: 31 of 64. One more game each possible.
        let teams = vec![
            Team {
                id: 0,
                name: "A".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 33,
                pre_home_played: 32,
                pre_away_played: 32,
                home_target: 1,
                away_target: 0,
            },
            Team {
                id: 1,
                name: "B".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 31,
                pre_home_played: 32,
                pre_away_played: 32,
                home_target: 0,
                away_target: 1,
            },
        ];
        let games = vec![
            Game {
                id: 0,
                host: 0,
                guest: 1,
                match_index: 1,
                day: 1,
                win_prob: 0.6,
            },
            Game {
                id: 1,
                host: 1,
                guest: 0,
                match_index: 1,
                day: 2,
                win_prob: 0.5,
            },
        ];
        let state = LeagueState::new(teams, games, 65, 66).unwrap();
        let scores = status_quo_scores(&state).unwrap();
        assert_eq!(scores.value(0), 0.515625);
        assert_eq!(scores.value(1), 0.484375);
        let ranking = state
            .rank_from_scores(&scores, TieBreak::PreWinPctThenIndex)
            .unwrap();
        assert_eq!(ranking.rank(0), 1);
        assert_eq!(ranking.rank(1), 2);
    }

    #[test]
    fn status_quo_ranking_matches_a_hand_ranked_table() {
        // Pre records 3-1, 2-2, 1-3, 0-4 rank teams 0 > 1 > 2 > 3.
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let scores = status_quo_scores(&state).unwrap();
        let ranking = state
            .rank_from_scores(&scores, TieBreak::PreWinPctThenIndex)
            .unwrap();
        assert_eq!(ranking.ranks(), &[1, 2, 3, 4]);

        let report = simulate_status_quo(
            &state,
            &EvalConfig {
                replications: 50,
                base_seed: 1,
                ..EvalConfig::default()
            },
        )
        .unwrap();
        assert_eq!(report.ssd, 0.0);
        assert!(report.mean_concordance <= report.max_concordance);
    }

    #[test]
    fn unplayed_teams_break_the_status_quo() {
        let teams = vec![
            Team {
                id: 0,
                name: "A".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 0,
                pre_home_played: 0,
                pre_away_played: 0,
                home_target: 1,
                away_target: 1,
            },
            Team {
                id: 1,
                name: "B".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 1,
                pre_home_played: 1,
                pre_away_played: 1,
                home_target: 0,
                away_target: 0,
            },
        ];
        let games = vec![
            Game {
                id: 0,
                host: 0,
                guest: 1,
                match_index: 1,
                day: 1,
                win_prob: 0.5,
            },
            Game {
                id: 1,
                host: 1,
                guest: 0,
                match_index: 1,
                day: 2,
                win_prob: 0.5,
            },
        ];
        let state = LeagueState::new(teams, games, 2, 3).unwrap();
        assert!(matches!(
            status_quo_scores(&state),
            Err(Error::DegenerateInstance(_))
        ));
    }

    #[test]
    fn agreement_matches_the_worked_percentages() {
        let state = synth::league(&synth::SynthConfig::day100_analogue(35)).unwrap();
        let n = state.n_teams();
        // Distinct descending scores: team i ranks i+1.
        let by_index: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let full = ScoreVector::uniform(by_index.clone(), 82.0);

        // Identical vectors: every category agrees fully.
        for category in [
            AgreementCategory::Playoff,
            AgreementCategory::HomeCourt,
            AgreementCategory::Lottery,
        ] {
            assert_eq!(agreement(&state, &full, &full, category).unwrap(), 100.0);
        }

        // Swap one bottom-5 team (rank 26, index 25) with a mid-table team
        // (rank 25, index 24): 4 of 5 lottery teams shared -> 80%.
        let mut nums = by_index.clone();
        nums.swap(24, 25);
        let short = ScoreVector::uniform(nums, 82.0);
        assert_eq!(
            agreement(&state, &short, &full, AgreementCategory::Lottery).unwrap(),
            80.0
        );

        // Two swapped out -> 3 of 5 shared -> 60%.
        let mut nums = by_index.clone();
        nums.swap(24, 25);
        nums.swap(23, 26);
        let short = ScoreVector::uniform(nums, 82.0);
        assert_eq!(
            agreement(&state, &short, &full, AgreementCategory::Lottery).unwrap(),
            60.0
        );

        // Bottom five entirely replaced -> 0%.
        let mut nums = by_index.clone();
        for k in 0..LOTTERY_COUNT {
            nums.swap(20 + k, 25 + k);
        }
        let short = ScoreVector::uniform(nums, 82.0);
        assert_eq!(
            agreement(&state, &short, &full, AgreementCategory::Lottery).unwrap(),
            0.0
        );

        // Swapping the 8th and 9th East teams (indices 7 and 8) changes one
        // of 16 playoff spots: 15/16.
        let mut nums = by_index.clone();
        nums.swap(7, 8);
        let short = ScoreVector::uniform(nums, 82.0);
        assert_eq!(
            agreement(&state, &short, &full, AgreementCategory::Playoff).unwrap(),
            100.0 * 15.0 / 16.0
        );
        // The same swap leaves the top 4 of each conference alone.
        assert_eq!(
            agreement(&state, &short, &full, AgreementCategory::HomeCourt).unwrap(),
            100.0
        );

        // Cutoffs that do not fit the league are configuration errors.
        let tiny = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let scores = status_quo_scores(&tiny).unwrap();
        for category in [AgreementCategory::Playoff, AgreementCategory::Lottery] {
            assert!(matches!(
                agreement(&tiny, &scores, &scores, category),
                Err(Error::Config(_))
            ));
        }
        // Four teams fit the home-court cutoff exactly, so that category
        // still computes - trivially 100% here.
        assert_eq!(
            agreement(&tiny, &scores, &scores, AgreementCategory::HomeCourt).unwrap(),
            100.0
        );
        assert!(!agreement_applicable(&tiny));
    }

    #[test]
    fn greedy_takes_everything_when_targets_allow() {
        let state = full_length_league(36);
        let outcome = greedy_schedule(&state).unwrap();
        assert!(outcome.shortfalls.is_empty());
        assert!(!outcome.repaired);
        assert!(outcome.schedule.selected().iter().all(|&s| s));

        let again = greedy_schedule(&state).unwrap();
        assert_eq!(outcome.schedule.selected(), again.schedule.selected());
    }

    #[test]
    fn greedy_strands_are_reported_and_repaired() {
        // Team 3 must host twice (games 3 and 7, late in the day order), so
        // team 1's lone away slot must survive until game 7 - but the scan
        // spends it greedily on game 0.
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (0, 2), (2, 0)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let outcome = greedy_schedule(&state).unwrap();
        assert!(outcome.repaired);
        assert_eq!(
            outcome.shortfalls,
            vec![
                Shortfall {
                    team: 2,
                    home: 0,
                    away: 1
                },
                Shortfall {
                    team: 3,
                    home: 1,
                    away: 0
                },
            ]
        );
        state.check_feasible(&outcome.schedule).unwrap();
        // The only feasible selection is games {1, 3, 4, 7}.
        assert_eq!(
            outcome.schedule.selected(),
            &[false, true, false, true, true, false, false, true]
        );
    }

    #[test]
    fn strength_of_schedule_matches_hand_arithmetic() {
        // Pre records 3-1, 2-2, 1-3, 0-4 give opponent percentages
        // 0.75, 0.5, 0.25, 0.0.
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        // Selection {g0 (0,1), g1 (1,0), g2 (2,3), g3 (3,2)}.
        let schedule = Schedule::integral(vec![
            true, true, true, true, false, false, false, false,
        ]);
        state.check_feasible(&schedule).unwrap();
        let report = strength_of_schedule(&state, Some(&schedule)).unwrap();
        // By hand: OW_0 = (y0_1 + y0_1)/2 = 0.5; OW_1 = (y0_0 + y0_0)/2 =
        // 0.75; OW_2 = (y0_3 + y0_3)/2 = 0; OW_3 = (y0_2 + y0_2)/2 = 0.25.
        // Full-slate OW is 0.375 for everyone by symmetry.
        let expect_ow = [0.5, 0.75, 0.0, 0.25];
        for i in 0..4 {
            assert!((report.ow[i] - expect_ow[i]).abs() < 1e-12, "team {i}");
            assert!((report.ow_full[i] - 0.375).abs() < 1e-12, "team {i}");
        }
        // Positive discrepancies: (0.5-0.375)/0.375 = 1/3 and
        // (0.75-0.375)/0.375 = 1; SSD = (1/3 + 1)/4.
        assert!((report.ssd - (1.0 / 3.0 + 1.0) / 4.0).abs() < 1e-12);
        assert!(report.flagged.is_empty());

        // The whole remaining slate squeezed into m slots: numerators match
        // the full season's but the shortened denominator is m - m0 = 2
        // instead of m_hat - m0 = 4, so every OW doubles and each of the
        // four teams contributes a relative excess of exactly 1.
        let full = strength_of_schedule(&state, None).unwrap();
        assert_eq!(full.ssd, 1.0);
        for i in 0..4 {
            assert!((full.ow[i] - full.ow_full[i] * 2.0).abs() < 1e-12);
        }

        // A full-length season restricted to itself: OW equals the full OW.
        let whole = full_length_league(37);
        let everything = Schedule::integral(vec![true; whole.n_games()]);
        let report = strength_of_schedule(&whole, Some(&everything)).unwrap();
        for i in 0..whole.n_teams() {
            assert_eq!(report.ow[i], report.ow_full[i]);
        }
        assert_eq!(report.ssd, 0.0);
    }

    #[test]
    fn teams_without_remaining_games_are_flagged() {
        // Teams 2 and 3 have played their whole shortened season already.
        let teams = vec![
            Team {
                id: 0,
                name: "A".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 2,
                pre_home_played: 2,
                pre_away_played: 2,
                home_target: 1,
                away_target: 0,
            },
            Team {
                id: 1,
                name: "B".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 3,
                pre_home_played: 2,
                pre_away_played: 2,
                home_target: 0,
                away_target: 1,
            },
            Team {
                id: 2,
                name: "X".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 2,
                pre_home_played: 3,
                pre_away_played: 2,
                home_target: 0,
                away_target: 0,
            },
            Team {
                id: 3,
                name: "Y".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 4,
                pre_home_played: 2,
                pre_away_played: 3,
                home_target: 0,
                away_target: 0,
            },
        ];
        let games = vec![
            Game {
                id: 0,
                host: 0,
                guest: 1,
                match_index: 1,
                day: 1,
                win_prob: 0.5,
            },
            Game {
                id: 1,
                host: 2,
                guest: 3,
                match_index: 1,
                day: 2,
                win_prob: 0.5,
            },
            Game {
                id: 2,
                host: 3,
                guest: 2,
                match_index: 1,
                day: 3,
                win_prob: 0.5,
            },
        ];
        let state = LeagueState::new(teams, games, 5, 7).unwrap();
        let schedule = Schedule::integral(vec![true, false, false]);
        let report = strength_of_schedule(&state, Some(&schedule)).unwrap();
        assert_eq!(report.flagged, vec![2, 3]);
        assert_eq!(report.ow[2], 0.0);
        assert_eq!(report.ow[3], 0.0);
        assert!(report.ssd.is_finite());
    }

    #[test]
    fn backtest_counts_the_single_path_by_hand() {
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let schedule = Schedule::integral(vec![
            true, true, true, true, false, false, false, false,
        ]);
        // Hosts win games 0, 2, 4, 6; guests win the rest. Shortened wins:
        // team 0 takes g0 and g1, team 2 takes g2 and g3. Short numerators
        // (5, 2, 3, 0) order teams 0 > 2 > 1 > 3; full numerators
        // (7, 4, 3, 0) order 0 > 1 > 2 > 3. Only the pair (1, 2) disagrees.
        let actual = Scenario::binary(vec![true, false, true, false, true, false, true, false]);
        let report = backtest(&state, &schedule, &actual).unwrap();
        assert_eq!(report.concordance, 5.0);
        assert_eq!(report.max_concordance, 6.0);
        assert!(report.single_path);
        assert!(report.agreement.is_none());

        let short = Scenario::binary(vec![true; 7]);
        assert!(matches!(
            backtest(&state, &schedule, &short),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn backtest_with_the_whole_season_is_perfectly_concordant() {
        let state = full_length_league(38);
        let schedule = Schedule::integral(vec![true; state.n_games()]);
        let mut r = rng::stream(39, 0);
        let actual = Scenario::binary((0..state.n_games()).map(|_| r.random_bool(0.5)).collect());
        let report = backtest(&state, &schedule, &actual).unwrap();
        assert_eq!(report.concordance, report.max_concordance);
        let agreement = report.agreement.unwrap();
        assert_eq!(agreement.playoff, 100.0);
        assert_eq!(agreement.home_court, 100.0);
        assert_eq!(agreement.lottery, 100.0);
    }

    #[test]
    fn coin_flip_games_have_quarter_variance_and_half_sharpness() {
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let schedule = Schedule::integral(vec![
            true, true, true, true, false, false, false, false,
        ]);
        let report = variance_sharpness(&state, &schedule).unwrap();
        assert_eq!(report.selected_variance, Some(0.25));
        assert_eq!(report.excluded_variance, Some(0.25));
        assert_eq!(report.selected_sharpness, Some(0.5));
        assert_eq!(report.excluded_sharpness, Some(0.5));
        // alpha = 1 - 2*6/8 = -1/2; G1 = 4; coefficient = 2*(-1/2)*4/36.
        assert!((report.coefficient - (-1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn coefficient_sign_follows_the_season_length() {
        // A short shortened season (m < m_hat/2) rewards one-sided games.
        let teams = vec![
            Team {
                id: 0,
                name: "A".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 0,
                pre_home_played: 0,
                pre_away_played: 0,
                home_target: 1,
                away_target: 0,
            },
            Team {
                id: 1,
                name: "B".into(),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: 0,
                pre_home_played: 0,
                pre_away_played: 0,
                home_target: 0,
                away_target: 1,
            },
        ];
        let games = vec![
            Game {
                id: 0,
                host: 0,
                guest: 1,
                match_index: 1,
                day: 1,
                win_prob: 0.6,
            },
            Game {
                id: 1,
                host: 0,
                guest: 1,
                match_index: 2,
                day: 2,
                win_prob: 0.6,
            },
            Game {
                id: 2,
                host: 1,
                guest: 0,
                match_index: 1,
                day: 3,
                win_prob: 0.6,
            },
            Game {
                id: 3,
                host: 1,
                guest: 0,
                match_index: 2,
                day: 4,
                win_prob: 0.6,
            },
        ];
        let state = LeagueState::new(teams, games, 1, 4).unwrap();
        let schedule = Schedule::integral(vec![true, false, false, false]);
        let short = variance_sharpness(&state, &schedule).unwrap();
        assert!(short.coefficient > 0.0);

        // A long one (m > m_hat/2) rewards evenly matched games.
        let long_state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let long_schedule = Schedule::integral(vec![
            true, true, true, true, false, false, false, false,
        ]);
        let long = variance_sharpness(&long_state, &long_schedule).unwrap();
        assert!(long.coefficient < 0.0);
    }

    #[test]
    fn optimized_long_seasons_prefer_high_variance_games() {
        // With m > m_hat/2 the objective rewards variance, so over a batch
        // the optimizer's selected games should average at least the
        // excluded games' variance.
        let mut selected_minus_excluded = 0.0;
        for seed in 50..56 {
            let state = synth::league(&synth::SynthConfig::day100_analogue(seed)).unwrap();
            let model = crate::objective::PwObjectiveModel::new(&state);
            let result = fw::solve(&model, &fw::FwConfig::default()).unwrap();
            let report = variance_sharpness(&state, &result.best_atom).unwrap();
            selected_minus_excluded +=
                report.selected_variance.unwrap() - report.excluded_variance.unwrap();
        }
        assert!(
            selected_minus_excluded / 6.0 >= 0.0,
            "batch mean difference {selected_minus_excluded}"
        );
    }
}
