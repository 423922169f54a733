//! League instances: teams, remaining games, selection targets, and the
//! win-percentage bookkeeping built on top of them.
//!
//! An instance describes a season that was suspended partway through a
//! round-robin: every team has a pre-suspension record, a set of remaining
//! games (a bipartite multigraph of host/guest pairings), and per-team
//! targets saying how many of its remaining home and away games a shortened
//! season must include. A [`Schedule`] selects a subset of the remaining
//! games; a [`Scenario`] fixes (or averages) the outcomes of all remaining
//! games; together they determine the shortened-season and full-season
//! win-percentage vectors that all solvers and evaluators in this crate
//! compare.
//!
//! Win percentages are kept as explicit numerator/denominator pairs
//! ([`ScoreVector`]) rather than pre-divided floats. With binary outcomes the
//! numerators are small integers, so equality of two teams' percentages is
//! detected exactly — ties matter both to the concordance metric (ties are
//! neither concordant nor discordant) and to ranking construction (ties fall
//! through to the deterministic tie-break rule).

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::error::{Error, Result};

/// Hard bounds applied when out-of-range win probabilities are clamped at
/// ingest instead of rejected.
pub const PROB_CLAMP: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// A team and its pre-suspension record plus shortened-season targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Team {
    /// External identifier (as it appears in input files).
    pub id: u32,
    pub name: String,
    /// Conference label; agreement metrics group playoff/seeding cutoffs by
    /// this value.
    pub conference: String,
    /// Division label (informational).
    pub division: String,
    /// Games won before the suspension.
    pub pre_wins: u32,
    /// Home games played before the suspension.
    pub pre_home_played: u32,
    /// Away games played before the suspension.
    pub pre_away_played: u32,
    /// Remaining home games the shortened season must select for this team.
    pub home_target: u32,
    /// Remaining away games the shortened season must select for this team.
    pub away_target: u32,
}

impl Team {
    /// Games played before the suspension.
    pub fn pre_games(&self) -> u32 {
        self.pre_home_played + self.pre_away_played
    }
}

/// One remaining game. `host`/`guest` are dense team indices into
/// [`LeagueState::teams`]; `id` is the external identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    pub id: u32,
    pub host: usize,
    pub guest: usize,
    /// Distinguishes repeated pairings of the same host and guest (1-based).
    pub match_index: u32,
    /// Calendar slot used by day-ordered heuristics.
    pub day: u32,
    /// Model probability that the host wins, strictly inside (0, 1).
    pub win_prob: f64,
}

/// A suspended season: teams, remaining games, and season lengths.
///
/// `m` is the shortened-season length every team must reach (pre-suspension
/// games plus selected remaining games); `m_hat` is the original full-season
/// length used for the "what would have happened" comparison.
#[derive(Debug, Clone)]
pub struct LeagueState {
    teams: Vec<Team>,
    games: Vec<Game>,
    m: u32,
    m_hat: u32,
    home_games: Vec<Vec<usize>>,
    away_games: Vec<Vec<usize>>,
}

impl LeagueState {
    /// Validates and builds an instance.
    ///
    /// Checks, per team: `pre_wins <= pre_games`, `pre_games + home_target +
    /// away_target == m`, and that each target is within the number of
    /// remaining games on that side. Globally: at least two teams, `m <=
    /// m_hat`, total home targets equal total away targets, game endpoints
    /// distinct and in range, probabilities strictly inside `(0, 1)`, and
    /// game ids and `(host, guest, match_index)` triples unique.
    pub fn new(teams: Vec<Team>, games: Vec<Game>, m: u32, m_hat: u32) -> Result<Self> {
        if teams.len() < 2 {
            return Err(Error::Config(format!(
                "a league needs at least two teams, got {}",
                teams.len()
            )));
        }
        if m > m_hat {
            return Err(Error::Config(format!(
                "shortened season m={m} exceeds full season m_hat={m_hat}"
            )));
        }
        let n = teams.len();
        let mut home_games: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut away_games: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut ids = HashSet::new();
        let mut pairings = HashSet::new();
        for (g, game) in games.iter().enumerate() {
            if game.host >= n || game.guest >= n {
                return Err(Error::Config(format!(
                    "game {} references team index out of range",
                    game.id
                )));
            }
            if game.host == game.guest {
                return Err(Error::Config(format!(
                    "game {} has identical host and guest",
                    game.id
                )));
            }
            if !(game.win_prob > 0.0 && game.win_prob < 1.0) {
                return Err(Error::Domain(format!(
                    "game {}: win probability {} must lie strictly inside (0, 1)",
                    game.id, game.win_prob
                )));
            }
            if !ids.insert(game.id) {
                return Err(Error::Config(format!("duplicate game id {}", game.id)));
            }
            if !pairings.insert((game.host, game.guest, game.match_index)) {
                return Err(Error::Config(format!(
                    "game {}: duplicate (host, guest, match_index) pairing",
                    game.id
                )));
            }
            home_games[game.host].push(g);
            away_games[game.guest].push(g);
        }
        let mut total_home = 0u64;
        let mut total_away = 0u64;
        for (i, team) in teams.iter().enumerate() {
            if team.pre_wins > team.pre_games() {
                return Err(Error::Config(format!(
                    "team {}: pre_wins {} exceeds games played {}",
                    team.name,
                    team.pre_wins,
                    team.pre_games()
                )));
            }
            let reach = team.pre_games() + team.home_target + team.away_target;
            if reach != m {
                return Err(Error::Config(format!(
                    "team {}: played {} plus targets {}+{} must equal m={m}, got {reach}",
                    team.name,
                    team.pre_games(),
                    team.home_target,
                    team.away_target
                )));
            }
            if team.home_target as usize > home_games[i].len()
                || team.away_target as usize > away_games[i].len()
            {
                return Err(Error::Config(format!(
                    "team {}: targets {}+{} exceed remaining games {}+{}",
                    team.name,
                    team.home_target,
                    team.away_target,
                    home_games[i].len(),
                    away_games[i].len()
                )));
            }
            total_home += u64::from(team.home_target);
            total_away += u64::from(team.away_target);
        }
        if total_home != total_away {
            return Err(Error::Config(format!(
                "total home targets {total_home} != total away targets {total_away}"
            )));
        }
        Ok(LeagueState {
            teams,
            games,
            m,
            m_hat,
            home_games,
            away_games,
        })
    }

    pub fn teams(&self) -> &[Team] {
        &self.teams
    }

    pub fn games(&self) -> &[Game] {
        &self.games
    }

    pub fn n_teams(&self) -> usize {
        self.teams.len()
    }

    pub fn n_games(&self) -> usize {
        self.games.len()
    }

    /// Shortened-season length.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Full-season length.
    pub fn m_hat(&self) -> u32 {
        self.m_hat
    }

    /// Variance weight `1 - 2m/m_hat` of the deterministic-equivalent
    /// objective. Negative when more than half the season must be played.
    pub fn alpha(&self) -> f64 {
        1.0 - 2.0 * f64::from(self.m) / f64::from(self.m_hat)
    }

    /// Indices of remaining games hosted by team `i`.
    pub fn home_games(&self, i: usize) -> &[usize] {
        &self.home_games[i]
    }

    /// Indices of remaining games where team `i` is the guest.
    pub fn away_games(&self, i: usize) -> &[usize] {
        &self.away_games[i]
    }

    /// Host-win probabilities of the remaining games, in game order.
    pub fn win_probs(&self) -> Vec<f64> {
        self.games.iter().map(|g| g.win_prob).collect()
    }

    /// Checks that `schedule` is integral and meets every team's home and
    /// away targets exactly.
    pub fn check_feasible(&self, schedule: &Schedule) -> Result<()> {
        if schedule.len() != self.n_games() {
            return Err(Error::Dimension {
                expected: self.n_games(),
                got: schedule.len(),
            });
        }
        if !schedule.is_integral() {
            return Err(Error::Infeasible(
                "schedule is fractional; an implementable schedule must be 0/1".into(),
            ));
        }
        let mut home = vec![0u32; self.n_teams()];
        let mut away = vec![0u32; self.n_teams()];
        for (g, game) in self.games.iter().enumerate() {
            if schedule.selected()[g] {
                home[game.host] += 1;
                away[game.guest] += 1;
            }
        }
        for (i, team) in self.teams.iter().enumerate() {
            if home[i] != team.home_target || away[i] != team.away_target {
                return Err(Error::Infeasible(format!(
                    "team {}: selection gives {} home / {} away games, targets are {} / {}",
                    team.name, home[i], away[i], team.home_target, team.away_target
                )));
            }
        }
        Ok(())
    }

    /// Shortened-season win percentages under `schedule` and `scenario`:
    /// `y_i = (pre_wins_i + sum of selected wins) / m`.
    ///
    /// The schedule must be integral and feasible.
    pub fn short_scores(&self, schedule: &Schedule, scenario: &Scenario) -> Result<ScoreVector> {
        self.check_feasible(schedule)?;
        self.expect_scenario(scenario)?;
        Ok(self.short_scores_unchecked(schedule, scenario))
    }

    /// `short_scores` without the feasibility re-check; callers must have
    /// validated the schedule once up front.
    pub(crate) fn short_scores_unchecked(
        &self,
        schedule: &Schedule,
        scenario: &Scenario,
    ) -> ScoreVector {
        let mut wins: Vec<f64> = self.teams.iter().map(|t| f64::from(t.pre_wins)).collect();
        for (g, game) in self.games.iter().enumerate() {
            if schedule.selected()[g] {
                let w = scenario.outcome(g);
                wins[game.host] += w;
                wins[game.guest] += 1.0 - w;
            }
        }
        ScoreVector::uniform(wins, f64::from(self.m))
    }

    /// Full-season win percentages under `scenario`: every remaining game is
    /// played, and the divisor is `m_hat`.
    pub fn full_scores(&self, scenario: &Scenario) -> Result<ScoreVector> {
        self.expect_scenario(scenario)?;
        Ok(self.full_scores_unchecked(scenario))
    }

    pub(crate) fn full_scores_unchecked(&self, scenario: &Scenario) -> ScoreVector {
        let mut wins: Vec<f64> = self.teams.iter().map(|t| f64::from(t.pre_wins)).collect();
        for (g, game) in self.games.iter().enumerate() {
            let w = scenario.outcome(g);
            wins[game.host] += w;
            wins[game.guest] += 1.0 - w;
        }
        ScoreVector::uniform(wins, f64::from(self.m_hat))
    }

    /// Pre-suspension win percentages `pre_wins_i / pre_games_i`.
    ///
    /// Fails with [`Error::DegenerateInstance`] if any team has not played.
    pub fn pre_win_percentages(&self) -> Result<Vec<f64>> {
        self.teams
            .iter()
            .map(|t| {
                if t.pre_games() == 0 {
                    Err(Error::DegenerateInstance(format!(
                        "team {} has no pre-suspension games; its win percentage is undefined",
                        t.name
                    )))
                } else {
                    Ok(f64::from(t.pre_wins) / f64::from(t.pre_games()))
                }
            })
            .collect()
    }

    /// Converts scores into a strict ranking (1 = best). Ties in score fall
    /// through to the tie-break rule; the result is always a permutation.
    pub fn rank_from_scores(&self, scores: &ScoreVector, tie_break: TieBreak) -> Result<Ranking> {
        if scores.len() != self.n_teams() {
            return Err(Error::Dimension {
                expected: self.n_teams(),
                got: scores.len(),
            });
        }
        let TieBreak::PreWinPctThenIndex = tie_break;
        let mut order: Vec<usize> = (0..self.n_teams()).collect();
        order.sort_by(|&a, &b| {
            scores
                .compare(b, a) // higher score first
                .then_with(|| self.compare_pre_win_pct(b, a))
                .then_with(|| a.cmp(&b))
        });
        let mut ranks = vec![0usize; self.n_teams()];
        for (pos, &team) in order.iter().enumerate() {
            ranks[team] = pos + 1;
        }
        Ok(Ranking::new(ranks).expect("sorted order yields a permutation"))
    }

    /// Exact comparison of two teams' pre-suspension win percentages via
    /// integer cross-multiplication. A 0/0 record counts as zero.
    fn compare_pre_win_pct(&self, a: usize, b: usize) -> Ordering {
        let ta = &self.teams[a];
        let tb = &self.teams[b];
        let lhs = u64::from(ta.pre_wins) * u64::from(tb.pre_games().max(1));
        let rhs = u64::from(tb.pre_wins) * u64::from(ta.pre_games().max(1));
        lhs.cmp(&rhs)
    }

    fn expect_scenario(&self, scenario: &Scenario) -> Result<()> {
        if scenario.len() != self.n_games() {
            return Err(Error::Dimension {
                expected: self.n_games(),
                got: scenario.len(),
            });
        }
        Ok(())
    }
}

/// Which games of the remaining slate a shortened season plays.
///
/// Solver iterates can be fractional (a point of the transportation
/// polytope); implementable schedules are 0/1. `selected` is always
/// available — for a fractional schedule it is the rounded view — but
/// feasibility and scoring demand integrality.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    selected: Vec<bool>,
    fractional: Option<Vec<f64>>,
}

impl Schedule {
    /// An integral schedule from selection flags.
    pub fn integral(selected: Vec<bool>) -> Self {
        Schedule {
            selected,
            fractional: None,
        }
    }

    /// A (possibly) fractional schedule from values in `[0, 1]`. Exact 0/1
    /// vectors collapse to the integral representation.
    pub fn fractional(values: Vec<f64>) -> Result<Self> {
        for (g, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!(
                    "schedule entry {g} is {v}, outside [0, 1]"
                )));
            }
        }
        if values.iter().all(|&v| v == 0.0 || v == 1.0) {
            return Ok(Schedule::integral(values.iter().map(|&v| v == 1.0).collect()));
        }
        let selected = values.iter().map(|&v| v > 0.5).collect();
        Ok(Schedule {
            selected,
            fractional: Some(values),
        })
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.fractional.is_none()
    }

    /// Selection flags (rounded at 0.5 for fractional schedules).
    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    /// Value of game `g` in `[0, 1]`.
    pub fn value(&self, g: usize) -> f64 {
        match &self.fractional {
            Some(x) => x[g],
            None => {
                if self.selected[g] {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Dense value vector.
    pub fn values(&self) -> Vec<f64> {
        match &self.fractional {
            Some(x) => x.clone(),
            None => self
                .selected
                .iter()
                .map(|&s| if s { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Number of selected games (integral schedules only count exact picks).
    pub fn n_selected(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }
}

/// Outcomes of all remaining games: `outcomes[g]` is the host's win
/// indicator, or its expectation for averaged pseudo-scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    outcomes: Vec<f64>,
}

impl Scenario {
    /// A realized scenario: `true` means the host won game `g`.
    pub fn binary(outcomes: Vec<bool>) -> Self {
        Scenario {
            outcomes: outcomes
                .into_iter()
                .map(|w| if w { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// The averaged pseudo-scenario in which game `g` "resolves" to its host
    /// win probability. Values must lie in `[0, 1]`.
    pub fn expected(probs: &[f64]) -> Result<Self> {
        for (g, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!(
                    "scenario entry {g} is {p}, outside [0, 1]"
                )));
            }
        }
        Ok(Scenario {
            outcomes: probs.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Host win value for game `g` (0/1 for realized scenarios).
    pub fn outcome(&self, g: usize) -> f64 {
        self.outcomes[g]
    }

    /// Whether every outcome is an exact 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.outcomes.iter().all(|&w| w == 0.0 || w == 1.0)
    }
}

/// Win percentages as numerator/denominator pairs.
///
/// Comparisons cross-multiply, so they are exact whenever numerators and
/// denominators are integer-valued (binary scenarios, integral schedules) —
/// the products stay far below 2^53.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    nums: Vec<f64>,
    dens: Vec<f64>,
}

impl ScoreVector {
    /// Scores sharing one denominator (season-length divisors).
    pub fn uniform(nums: Vec<f64>, den: f64) -> Self {
        let dens = vec![den; nums.len()];
        ScoreVector { nums, dens }
    }

    /// Scores with per-team denominators (pre-suspension records). All
    /// denominators must be positive.
    pub fn per_team(nums: Vec<f64>, dens: Vec<f64>) -> Result<Self> {
        if nums.len() != dens.len() {
            return Err(Error::Dimension {
                expected: nums.len(),
                got: dens.len(),
            });
        }
        if let Some(i) = dens.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::Domain(format!(
                "score denominator {i} is {}, must be positive",
                dens[i]
            )));
        }
        Ok(ScoreVector { nums, dens })
    }

    pub fn len(&self) -> usize {
        self.nums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    /// Win percentage of team `i` as a float.
    pub fn value(&self, i: usize) -> f64 {
        self.nums[i] / self.dens[i]
    }

    /// All win percentages as floats.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Numerator of team `i` (wins, possibly fractional for averaged
    /// scenarios).
    pub fn numerator(&self, i: usize) -> f64 {
        self.nums[i]
    }

    /// Exact order comparison of teams `a` and `b` by win percentage.
    pub fn compare(&self, a: usize, b: usize) -> Ordering {
        let lhs = self.nums[a] * self.dens[b];
        let rhs = self.nums[b] * self.dens[a];
        lhs.partial_cmp(&rhs).expect("scores are finite")
    }
}

/// A strict ranking: `rank(i)` is team `i`'s position, 1 = best, and the
/// ranks form a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    ranks: Vec<usize>,
}

impl Ranking {
    /// Validates that `ranks` is a permutation of `1..=n`.
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n + 1];
        for &r in &ranks {
            if r == 0 || r > n || seen[r] {
                return Err(Error::Config(format!(
                    "ranks must form a permutation of 1..={n}"
                )));
            }
            seen[r] = true;
        }
        Ok(Ranking { ranks })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Rank of team `i` (1 = best).
    pub fn rank(&self, i: usize) -> usize {
        self.ranks[i]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Team indices from best to worst.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| self.ranks[i]);
        order
    }
}

/// How score ties are resolved when building a strict ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Higher pre-suspension win percentage first, then lower team index.
    PreWinPctThenIndex,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Symmetric league: every team hosts `home` and visits `away` of the
    /// remaining games against a ring of opponents.
    pub(crate) fn ring_league(n: usize, m: u32, m_hat: u32) -> LeagueState {
        let mut games = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            games.push(Game {
                id: games.len() as u32,
                host: i,
                guest: j,
                match_index: 1,
                day: games.len() as u32 + 1,
                win_prob: 0.5,
            });
        }
        // Each team hosts one game and guests one game; targets 1/1 need
        // pre_games = m - 2.
        let teams = (0..n)
            .map(|i| Team {
                id: i as u32,
                name: format!("T{i}"),
                conference: if i < n / 2 { "East" } else { "West" }.into(),
                division: "D1".into(),
                pre_wins: (m - 2).min(i as u32),
                pre_home_played: (m - 2) / 2,
                pre_away_played: (m - 2) - (m - 2) / 2,
                home_target: 1,
                away_target: 1,
            })
            .collect();
        LeagueState::new(teams, games, m, m_hat).unwrap()
    }

    #[test]
    fn construction_validates_target_arithmetic() {
        // A team that has played 33 home and 31 away games of an m = 72
        // shortened season still owes 3 home and 5 away games.
        let team = Team {
            id: 0,
            name: "A".into(),
            conference: "East".into(),
            division: "D1".into(),
            pre_wins: 40,
            pre_home_played: 33,
            pre_away_played: 31,
            home_target: 72 / 2 - 33,
            away_target: 72 / 2 - 31,
        };
        assert_eq!(team.home_target, 3);
        assert_eq!(team.away_target, 5);
        assert_eq!(team.pre_games() + team.home_target + team.away_target, 72);
    }

    #[test]
    fn short_and_full_scores_follow_the_definitions() {
        // Team 0: 10 wins from 10 games, one remaining home game, m = 11,
        // m_hat = 20. Winning the selected game gives y = 11/11 and
        // y_hat = 11/20.
        let teams = vec![
            Team {
                id: 0,
                name: "A".into(),
                conference: "East".into(),
                division: "D1".into(),
                pre_wins: 10,
                pre_home_played: 5,
                pre_away_played: 5,
                home_target: 1,
                away_target: 0,
            },
            Team {
                id: 1,
                name: "B".into(),
                conference: "West".into(),
                division: "D2".into(),
                pre_wins: 4,
                pre_home_played: 5,
                pre_away_played: 5,
                home_target: 0,
                away_target: 1,
            },
        ];
        let games = vec![Game {
            id: 7,
            host: 0,
            guest: 1,
            match_index: 1,
            day: 1,
            win_prob: 0.7,
        }];
        let state = LeagueState::new(teams, games, 11, 20).unwrap();
        let schedule = Schedule::integral(vec![true]);
        let scenario = Scenario::binary(vec![true]);

        let short = state.short_scores(&schedule, &scenario).unwrap();
        assert_eq!(short.value(0), 1.0);
        assert_eq!(short.value(1), 4.0 / 11.0);

        let full = state.full_scores(&scenario).unwrap();
        assert_eq!(full.value(0), 11.0 / 20.0);
        assert_eq!(full.value(1), 4.0 / 20.0);
    }

    #[test]
    fn infeasible_schedules_are_rejected() {
        let state = ring_league(4, 6, 10);
        // Selecting nothing misses every target.
        let none = Schedule::integral(vec![false; state.n_games()]);
        assert!(matches!(
            state.short_scores(&none, &Scenario::binary(vec![true; 4])),
            Err(Error::Infeasible(_))
        ));
        // Wrong dimension.
        let short = Schedule::integral(vec![true; 3]);
        assert!(matches!(
            state.check_feasible(&short),
            Err(Error::Dimension { expected: 4, got: 3 })
        ));
        // Fractional schedules are not implementable.
        let frac = Schedule::fractional(vec![0.5; 4]).unwrap();
        assert!(matches!(
            state.check_feasible(&frac),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_instances() {
        let mk_team = |home_target: u32| Team {
            id: 0,
            name: "A".into(),
            conference: "E".into(),
            division: "D".into(),
            pre_wins: 0,
            pre_home_played: 1,
            pre_away_played: 1,
            home_target,
            away_target: 0,
        };
        let mk_game = |p: f64| Game {
            id: 0,
            host: 0,
            guest: 1,
            match_index: 1,
            day: 1,
            win_prob: p,
        };
        let other = Team {
            id: 1,
            name: "B".into(),
            conference: "W".into(),
            division: "D".into(),
            pre_wins: 1,
            pre_home_played: 1,
            pre_away_played: 1,
            home_target: 0,
            away_target: 1,
        };

        // Boundary probability.
        let err = LeagueState::new(
            vec![mk_team(1), other.clone()],
            vec![mk_game(1.0)],
            3,
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "got {err:?}");

        // Target arithmetic must reach m.
        let err = LeagueState::new(
            vec![mk_team(1), other.clone()],
            vec![mk_game(0.5)],
            5,
            6,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));

        // Duplicate game ids.
        let err = LeagueState::new(
            vec![
                Team {
                    home_target: 2,
                    ..mk_team(2)
                },
                Team {
                    away_target: 2,
                    ..other.clone()
                },
            ],
            vec![mk_game(0.5), mk_game(0.5)],
            4,
            6,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(msg) if msg.contains("duplicate game id")));
    }

    #[test]
    fn ranking_breaks_ties_by_pre_record_then_index() {
        let state = ring_league(4, 6, 10);
        // ring_league gives pre_wins (0, 1, 2, 3) on equal pre_games, so a
        // four-way score tie ranks teams 3, 2, 1, 0.
        let scores = ScoreVector::uniform(vec![2.0; 4], 6.0);
        let ranking = state
            .rank_from_scores(&scores, TieBreak::PreWinPctThenIndex)
            .unwrap();
        assert_eq!(ranking.ranks(), &[4, 3, 2, 1]);

        // Equal pre records fall back to the lower index.
        let scores = ScoreVector::uniform(vec![3.0, 3.0, 2.0, 5.0], 6.0);
        let mut teams = state.teams().to_vec();
        for t in &mut teams {
            t.pre_wins = 2;
        }
        let state =
            LeagueState::new(teams, state.games().to_vec(), state.m(), state.m_hat()).unwrap();
        let ranking = state
            .rank_from_scores(&scores, TieBreak::PreWinPctThenIndex)
            .unwrap();
        assert_eq!(ranking.ranks(), &[2, 3, 4, 1]);
    }

    #[test]
    fn ranks_are_always_a_permutation() {
        let state = ring_league(6, 6, 10);
        let scores = ScoreVector::uniform(vec![1.0, 1.0, 1.0, 2.0, 2.0, 0.0], 6.0);
        let ranking = state
            .rank_from_scores(&scores, TieBreak::PreWinPctThenIndex)
            .unwrap();
        let mut sorted = ranking.ranks().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn score_comparisons_are_exact_across_denominators() {
        // 3/6 == 5/10, 4/6 > 6/10.
        let v = ScoreVector::per_team(vec![3.0, 5.0, 4.0, 6.0], vec![6.0, 10.0, 6.0, 10.0])
            .unwrap();
        assert_eq!(v.compare(0, 1), Ordering::Equal);
        assert_eq!(v.compare(2, 3), Ordering::Greater);
        assert_eq!(v.compare(3, 2), Ordering::Less);
    }

    #[test]
    fn fractional_schedule_collapses_when_binary() {
        let s = Schedule::fractional(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(s.is_integral());
        assert_eq!(s.selected(), &[true, false, true]);
        let f = Schedule::fractional(vec![0.25, 1.0, 0.75]).unwrap();
        assert!(!f.is_integral());
        assert_eq!(f.selected(), &[false, true, true]);
        assert!(Schedule::fractional(vec![1.5]).is_err());
    }
}
