//! Concordance-objective schedule search.
//!
//! Instead of matching win percentages, this family scores a shortened
//! season by how many *pairs* of teams finish in the same relative order as
//! the full season, averaged over outcome scenarios. Two instantiations are
//! provided: a mean-value instance that replaces every random game outcome
//! with its expected value (one deterministic pseudo-scenario), and a
//! sampled instance that averages over independently drawn binary outcome
//! scenarios.
//!
//! The objective is a count, not a smooth function, so the solver here is a
//! feasibility-preserving local search over the schedule polytope's edge
//! moves (parallel-game swaps and alternating 4-cycles), accelerated by
//! sound pair fixing: pairs whose order no feasible selection can change are
//! proven constant up front and skipped during move evaluation.

use crate::error::{Error, Result};
use crate::fw;
use crate::league::{LeagueState, Ranking, Scenario, Schedule, ScoreVector, TieBreak};
use crate::rng;
use rand::Rng;
use std::collections::HashMap;

/// Default number of sampled scenarios: beyond this, sampling error shrinks
/// slower than the search slows down, so quality and runtime balance here.
pub const DEFAULT_SCENARIOS: usize = 50;

/// Index of pair `(i, j)` with `i < j` in a flattened upper triangle.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Contribution of one pair `(i, j)` with `i < j`: 1 when the shortened
/// season agrees with the reference order, with score ties credited (the
/// order variable is free under equality, so it is set to match).
fn pair_agreement(num_i: f64, num_j: f64, i_above_j: bool) -> i64 {
    match num_i.partial_cmp(&num_j).expect("scores are finite") {
        std::cmp::Ordering::Greater => i64::from(i_above_j),
        std::cmp::Ordering::Less => i64::from(!i_above_j),
        std::cmp::Ordering::Equal => 1,
    }
}

/// Number of pairs on which a shortened-season score vector agrees with a
/// full-season reference order, ties in the shortened scores credited. The
/// exact cross-multiplied comparison handles per-team denominators.
pub(crate) fn count_pair_agreements(short: &ScoreVector, reference: &Ranking) -> i64 {
    let n = short.len();
    let mut total = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += match short.compare(i, j) {
                std::cmp::Ordering::Greater => i64::from(reference.rank(i) < reference.rank(j)),
                std::cmp::Ordering::Less => i64::from(reference.rank(i) > reference.rank(j)),
                std::cmp::Ordering::Equal => 1,
            };
        }
    }
    total
}

/// A concordance problem: a league plus the outcome scenarios to average
/// over, with each scenario's full-season reference order precomputed.
#[derive(Debug, Clone)]
pub struct ConcordanceInstance {
    state: LeagueState,
    scenarios: Vec<Scenario>,
    /// Per scenario, flattened upper triangle: does team `i` finish above
    /// team `j` when every remaining game is played? Full-season score ties
    /// are broken deterministically (pre-suspension win percentage, then
    /// team index) so the reference order is reproducible.
    reference: Vec<Vec<bool>>,
}

impl ConcordanceInstance {
    /// Deterministic instance with one pseudo-scenario whose "outcomes" are
    /// the games' win probabilities. No sampling noise: building it twice
    /// gives identical objectives.
    pub fn mean_value(state: &LeagueState) -> Result<Self> {
        let pseudo = Scenario::expected(&state.win_probs())?;
        Self::from_scenarios(state, vec![pseudo])
    }

    /// Instance averaging over `count` independently sampled binary outcome
    /// scenarios (see [`sample_scenarios`]).
    pub fn sampled(state: &LeagueState, count: usize, seed: u64) -> Result<Self> {
        Self::from_scenarios(state, sample_scenarios(state, count, seed))
    }

    /// Builds an instance from caller-supplied scenarios.
    pub fn from_scenarios(state: &LeagueState, scenarios: Vec<Scenario>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::Config(
                "at least one outcome scenario is required".into(),
            ));
        }
        let n = state.n_teams();
        let mut reference = Vec::with_capacity(scenarios.len());
        for scenario in &scenarios {
            let full = state.full_scores(scenario)?;
            let rank = state.rank_from_scores(&full, TieBreak::PreWinPctThenIndex)?;
            let mut above = vec![false; n * (n - 1) / 2];
            for i in 0..n {
                for j in (i + 1)..n {
                    above[pair_index(n, i, j)] = rank.rank(i) < rank.rank(j);
                }
            }
            reference.push(above);
        }
        Ok(ConcordanceInstance {
            state: state.clone(),
            scenarios,
            reference,
        })
    }

    pub fn state(&self) -> &LeagueState {
        &self.state
    }

    pub fn n_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    /// Whether team `i` finishes above team `j` (`i < j`) in scenario `s`'s
    /// full-season reference order.
    pub fn reference_above(&self, s: usize, i: usize, j: usize) -> bool {
        assert!(i < j, "reference order is stored for i < j");
        self.reference[s][pair_index(self.state.n_teams(), i, j)]
    }

    /// Upper bound on the objective: the number of team pairs, attained only
    /// when every pair agrees (or is tie-credited) in every scenario.
    pub fn max_pairs(&self) -> f64 {
        let n = self.state.n_teams();
        (n * (n - 1) / 2) as f64
    }

    /// Number of agreeing pairs in each scenario under `schedule`.
    ///
    /// The schedule must be integral and feasible.
    pub fn per_scenario_counts(&self, schedule: &Schedule) -> Result<Vec<f64>> {
        self.state.check_feasible(schedule)?;
        let n = self.state.n_teams();
        Ok(self
            .scenarios
            .iter()
            .zip(&self.reference)
            .map(|(scenario, above)| {
                let scores = self.state.short_scores_unchecked(schedule, scenario);
                let mut count = 0i64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        count += pair_agreement(
                            scores.numerator(i),
                            scores.numerator(j),
                            above[pair_index(n, i, j)],
                        );
                    }
                }
                count as f64
            })
            .collect())
    }

    /// Expected number of pairs finishing in the same relative order as the
    /// full season: the per-scenario agreement count, averaged.
    pub fn objective(&self, schedule: &Schedule) -> Result<f64> {
        let counts = self.per_scenario_counts(schedule)?;
        Ok(counts.iter().sum::<f64>() / counts.len() as f64)
    }
}

/// Draws `count` binary outcome scenarios, one win/loss per remaining game
/// with the game's model probability.
///
/// Scenario `s` uses its own RNG stream derived from `(seed, s)`, so a
/// sample is reproducible and extending `count` leaves earlier scenarios
/// unchanged.
pub fn sample_scenarios(state: &LeagueState, count: usize, seed: u64) -> Vec<Scenario> {
    (0..count)
        .map(|s| {
            let mut r = rng::stream(seed, s as u64);
            Scenario::binary(
                state
                    .games()
                    .iter()
                    .map(|g| r.random_bool(g.win_prob))
                    .collect(),
            )
        })
        .collect()
}

/// Which pair orders are already decided before any schedule is chosen.
///
/// For scenario outcomes `W`, team `i`'s shortened-season win count lies
/// between a pessimistic and an optimistic bound obtained by letting it keep
/// its worst or best target-sized subset of home and away games. Whenever
/// one team's pessimistic bound strictly exceeds another's optimistic bound,
/// their relative order is the same under every feasible selection.
#[derive(Debug, Clone)]
pub struct FixingReport {
    scenario: usize,
    n_teams: usize,
    optimistic: Vec<f64>,
    pessimistic: Vec<f64>,
    fixed: Vec<Option<bool>>,
}

impl FixingReport {
    /// Index of the scenario this report was computed for.
    pub fn scenario(&self) -> usize {
        self.scenario
    }

    /// Per-team upper bounds on the shortened-season win percentage.
    pub fn optimistic(&self) -> &[f64] {
        &self.optimistic
    }

    /// Per-team lower bounds on the shortened-season win percentage.
    pub fn pessimistic(&self) -> &[f64] {
        &self.pessimistic
    }

    /// `Some(true)` if team `i` finishes strictly above team `j` (`i < j`)
    /// under every feasible schedule, `Some(false)` if strictly below,
    /// `None` if the pair is still undecided.
    pub fn fixed(&self, i: usize, j: usize) -> Option<bool> {
        self.fixed[pair_index(self.n_teams, i, j)]
    }

    /// Pairs fixed with `i` above `j`.
    pub fn fixed_above(&self) -> Vec<(usize, usize)> {
        self.collect_fixed(true)
    }

    /// Pairs fixed with `i` below `j`.
    pub fn fixed_below(&self) -> Vec<(usize, usize)> {
        self.collect_fixed(false)
    }

    fn collect_fixed(&self, above: bool) -> Vec<(usize, usize)> {
        let n = self.n_teams;
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.fixed[pair_index(n, i, j)] == Some(above) {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// Number of pairs whose order is not decided in advance.
    pub fn free_pairs(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_none()).count()
    }

    /// Number of pairs decided in advance.
    pub fn fixed_pairs(&self) -> usize {
        self.fixed.len() - self.free_pairs()
    }

    /// Percentage of pairs decided in advance (0–100).
    pub fn elimination_pct(&self) -> f64 {
        if self.fixed.is_empty() {
            return 0.0;
        }
        100.0 * self.fixed_pairs() as f64 / self.fixed.len() as f64
    }
}

/// Computes the pair-fixing report for one scenario of `instance`.
///
/// The scenario index must be in range. Bounds are sharp: each is attained
/// by some target-sized subset of the team's games (though not necessarily
/// by a jointly feasible schedule), so fixing uses strict inequalities only.
pub fn variable_fixing(instance: &ConcordanceInstance, scenario: usize) -> FixingReport {
    let state = &instance.state;
    let outcomes = &instance.scenarios[scenario];
    let n = state.n_teams();
    let m = f64::from(state.m());
    let mut optimistic = vec![0.0; n];
    let mut pessimistic = vec![0.0; n];
    for (i, team) in state.teams().iter().enumerate() {
        let mut home: Vec<f64> = state
            .home_games(i)
            .iter()
            .map(|&g| outcomes.outcome(g))
            .collect();
        home.sort_by(f64::total_cmp);
        let h = team.home_target as usize;
        let best_home: f64 = home.iter().rev().take(h).sum();
        let worst_home: f64 = home.iter().take(h).sum();

        let mut away: Vec<f64> = state
            .away_games(i)
            .iter()
            .map(|&g| outcomes.outcome(g))
            .collect();
        away.sort_by(f64::total_cmp);
        let a = team.away_target as usize;
        // An away win is one minus the host outcome, so the best away slate
        // keeps the games with the smallest host outcomes.
        let best_away = a as f64 - away.iter().take(a).sum::<f64>();
        let worst_away = a as f64 - away.iter().rev().take(a).sum::<f64>();

        let base = f64::from(team.pre_wins);
        optimistic[i] = (base + best_home + best_away) / m;
        pessimistic[i] = (base + worst_home + worst_away) / m;
    }

    let mut fixed = vec![None; n * (n - 1) / 2];
    for i in 0..n {
        for j in (i + 1)..n {
            let k = pair_index(n, i, j);
            if pessimistic[i] - optimistic[j] > 0.0 {
                fixed[k] = Some(true);
            } else if optimistic[i] - pessimistic[j] < 0.0 {
                fixed[k] = Some(false);
            }
        }
    }
    FixingReport {
        scenario,
        n_teams: n,
        optimistic,
        pessimistic,
        fixed,
    }
}

/// Per-scenario team numerators (win counts) and the total agreement count
/// over all scenarios for a selection.
fn evaluate_selection(
    instance: &ConcordanceInstance,
    selection: &[bool],
) -> (Vec<Vec<f64>>, i64) {
    let state = &instance.state;
    let n = state.n_teams();
    let schedule = Schedule::integral(selection.to_vec());
    let mut nums = Vec::with_capacity(instance.scenarios.len());
    let mut total = 0i64;
    for (scenario, above) in instance.scenarios.iter().zip(&instance.reference) {
        let scores = state.short_scores_unchecked(&schedule, scenario);
        let row: Vec<f64> = (0..n).map(|i| scores.numerator(i)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                total += pair_agreement(row[i], row[j], above[pair_index(n, i, j)]);
            }
        }
        nums.push(row);
    }
    (nums, total)
}

/// A feasibility-preserving move: swap `removed` selected games for `added`
/// unselected ones with matching host/guest structure.
struct Move {
    removed: [usize; 2],
    added: [usize; 2],
    /// 1 for a parallel-game swap (second slots unused), 2 for a 4-cycle.
    len: usize,
}

/// Change in the total agreement count if `mv` were applied. Only pairs
/// touching an affected team can change, and among those only pairs not
/// proven constant by `reports` are evaluated.
#[allow(clippy::too_many_arguments)]
fn move_delta(
    instance: &ConcordanceInstance,
    nums: &[Vec<f64>],
    reports: &[FixingReport],
    free_partners: &[Vec<Vec<(usize, usize)>>],
    mv: &Move,
) -> i64 {
    let state = &instance.state;
    let n = state.n_teams();
    let games = state.games();
    let mut delta = 0i64;
    for (s, scenario) in instance.scenarios.iter().enumerate() {
        let above = &instance.reference[s];
        // New numerators of the affected teams (2 for a swap, 4 for a
        // cycle; the teams are always distinct by construction).
        let mut affected: Vec<(usize, f64)> = Vec::with_capacity(4);
        {
            let mut apply = |team: usize, change: f64| {
                if let Some(entry) = affected.iter_mut().find(|(t, _)| *t == team) {
                    entry.1 += change;
                } else {
                    affected.push((team, nums[s][team] + change));
                }
            };
            for &g in &mv.removed[..mv.len] {
                let w = scenario.outcome(g);
                apply(games[g].host, -w);
                apply(games[g].guest, -(1.0 - w));
            }
            for &g in &mv.added[..mv.len] {
                let w = scenario.outcome(g);
                apply(games[g].host, w);
                apply(games[g].guest, 1.0 - w);
            }
        }
        for (p, &(t, new_t)) in affected.iter().enumerate() {
            for &(u, k) in &free_partners[s][t] {
                if affected.iter().any(|&(v, _)| v == u) {
                    continue; // both ends affected: handled below, once
                }
                let old_t = nums[s][t];
                let old_u = nums[s][u];
                if t < u {
                    delta += pair_agreement(new_t, old_u, above[k])
                        - pair_agreement(old_t, old_u, above[k]);
                } else {
                    delta += pair_agreement(old_u, new_t, above[k])
                        - pair_agreement(old_u, old_t, above[k]);
                }
            }
            for &(u, new_u) in &affected[p + 1..] {
                let (i, j, ni, nj) = if t < u {
                    (t, u, new_t, new_u)
                } else {
                    (u, t, new_u, new_t)
                };
                if reports[s].fixed(i, j).is_some() {
                    continue;
                }
                let k = pair_index(n, i, j);
                delta += pair_agreement(ni, nj, above[k])
                    - pair_agreement(nums[s][i], nums[s][j], above[k]);
            }
        }
    }
    delta
}

/// First strictly improving move in deterministic scan order, or `None` at a
/// local optimum. Scans parallel-game swaps for each selected game, then
/// alternating 4-cycles over pairs of selected games.
fn find_improving_move(
    instance: &ConcordanceInstance,
    selection: &[bool],
    slot_index: &HashMap<(usize, usize), Vec<usize>>,
    nums: &[Vec<f64>],
    reports: &[FixingReport],
    free_partners: &[Vec<Vec<(usize, usize)>>],
) -> Option<(Move, i64)> {
    let games = instance.state.games();
    let selected: Vec<usize> = (0..games.len()).filter(|&g| selection[g]).collect();
    for &g1 in &selected {
        let slot = (games[g1].host, games[g1].guest);
        for &g2 in &slot_index[&slot] {
            if selection[g2] {
                continue;
            }
            let mv = Move {
                removed: [g1, 0],
                added: [g2, 0],
                len: 1,
            };
            let delta = move_delta(instance, nums, reports, free_partners, &mv);
            if delta > 0 {
                return Some((mv, delta));
            }
        }
    }
    for (a_pos, &g1) in selected.iter().enumerate() {
        let (a, b) = (games[g1].host, games[g1].guest);
        for &g3 in &selected[a_pos + 1..] {
            let (c, d) = (games[g3].host, games[g3].guest);
            if a == c || b == d {
                continue; // covered by compositions of parallel swaps
            }
            let (Some(ad), Some(cb)) = (slot_index.get(&(a, d)), slot_index.get(&(c, b)))
            else {
                continue;
            };
            for &g2 in ad {
                if selection[g2] {
                    continue;
                }
                for &g4 in cb {
                    if selection[g4] {
                        continue;
                    }
                    let mv = Move {
                        removed: [g1, g3],
                        added: [g2, g4],
                        len: 2,
                    };
                    let delta = move_delta(instance, nums, reports, free_partners, &mv);
                    if delta > 0 {
                        return Some((mv, delta));
                    }
                }
            }
        }
    }
    None
}

/// Hill-climbs the concordance objective from `start` with seeded restarts.
///
/// Moves preserve feasibility exactly: swapping two parallel games keeps
/// every team's home and away counts, and an alternating 4-cycle rewires two
/// selected games across two hosts and two guests. Each budget unit is one
/// accepted improving move, or one full scan that proves a local optimum and
/// restarts from a random vertex of the schedule polytope (the minimizer of
/// random linear costs). Returns the best schedule seen, which is never
/// worse than `start`.
pub fn local_search(
    instance: &ConcordanceInstance,
    start: &Schedule,
    budget: usize,
    seed: u64,
) -> Result<Schedule> {
    let state = &instance.state;
    state.check_feasible(start)?;
    if budget == 0 {
        return Ok(start.clone());
    }

    let reports: Vec<FixingReport> = (0..instance.n_scenarios())
        .map(|s| variable_fixing(instance, s))
        .collect();
    let n = state.n_teams();
    let free_partners: Vec<Vec<Vec<(usize, usize)>>> = reports
        .iter()
        .map(|report| {
            let mut partners = vec![Vec::new(); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let k = pair_index(n, i, j);
                    if report.fixed(i, j).is_none() {
                        partners[i].push((j, k));
                        partners[j].push((i, k));
                    }
                }
            }
            partners
        })
        .collect();
    let mut slot_index: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (g, game) in state.games().iter().enumerate() {
        slot_index.entry((game.host, game.guest)).or_default().push(g);
    }

    let mut selection = start.selected().to_vec();
    let (mut nums, mut total) = evaluate_selection(instance, &selection);
    let mut best_selection = selection.clone();
    let mut best_total = total;
    let mut restart_rng = rng::stream(seed, 0);

    for _ in 0..budget {
        match find_improving_move(
            instance,
            &selection,
            &slot_index,
            &nums,
            &reports,
            &free_partners,
        ) {
            Some((mv, delta)) => {
                for &g in &mv.removed[..mv.len] {
                    selection[g] = false;
                }
                for &g in &mv.added[..mv.len] {
                    selection[g] = true;
                }
                let before = total;
                (nums, total) = evaluate_selection(instance, &selection);
                debug_assert_eq!(total, before + delta, "move delta must match recount");
                if total > best_total {
                    best_total = total;
                    best_selection = selection.clone();
                }
            }
            None => {
                let costs: Vec<f64> = (0..state.n_games())
                    .map(|_| restart_rng.random_range(-1.0..1.0))
                    .collect();
                let fresh = fw::transportation_subproblem(state, &costs)?;
                selection = fresh.selected().to_vec();
                (nums, total) = evaluate_selection(instance, &selection);
                if total > best_total {
                    best_total = total;
                    best_selection = selection.clone();
                }
            }
        }
    }
    Ok(Schedule::integral(best_selection))
}
