//! Synthetic league instances for tests, examples, and benchmarks.
//!
//! Two generators live here. [`tiny_league`] builds 4-team instances small
//! enough that every feasible schedule can be enumerated — the workhorse for
//! oracle tests. [`league`] builds full-size instances (30 teams by default)
//! with latent team strengths, a balanced remaining slate, and records
//! correlated with strength, mimicking a major-league season suspended
//! partway through.
//!
//! Both generators derive targets from construction so instances are always
//! feasible, and both are deterministic functions of their seed.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{Error, Result};
use crate::flow::min_cost_selection;
use crate::league::{Game, LeagueState, Schedule, Team};
use crate::rng::stream;

/// Configuration for the full-size generator.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Number of teams (even; split into two conferences).
    pub teams: usize,
    /// Number of remaining games.
    pub remaining_games: usize,
    /// Shortened-season length.
    pub m: u32,
    /// Full-season length.
    pub m_hat: u32,
    /// Standard deviation of latent team strengths on the logit scale.
    pub strength_spread: f64,
    /// Host bump on the logit scale.
    pub home_advantage: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// A 30-team league suspended about 100 games into its calendar:
    /// roughly 500 games remain and the shortened season keeps 66 of the 82
    /// scheduled games per team.
    pub fn day100_analogue(seed: u64) -> Self {
        SynthConfig {
            teams: 30,
            remaining_games: 500,
            m: 66,
            m_hat: 82,
            strength_spread: 0.8,
            home_advantage: 0.25,
            seed,
        }
    }

    /// A 30-team league suspended late in its calendar, with 259 games left
    /// to place and 72 of 82 games kept per team.
    pub fn late_season_analogue(seed: u64) -> Self {
        SynthConfig {
            teams: 30,
            remaining_games: 259,
            m: 72,
            m_hat: 82,
            strength_spread: 0.8,
            home_advantage: 0.25,
            seed,
        }
    }
}

/// Generates a full-size league instance.
///
/// Teams get latent strengths `N(0, spread^2)`; the remaining slate spreads
/// games evenly across teams (degree difference at most one) with hosts
/// chosen to balance home/away counts; game probabilities are
/// `sigmoid(strength difference + home advantage)` clamped away from the
/// extremes; pre-suspension records are binomial draws tied to strength.
/// Targets are split between home and away within each team's remaining
/// slate and verified feasible with a transportation solve.
pub fn league(cfg: &SynthConfig) -> Result<LeagueState> {
    if cfg.teams < 4 || cfg.teams % 2 != 0 {
        return Err(Error::Config(format!(
            "synthetic league needs an even team count of at least 4, got {}",
            cfg.teams
        )));
    }
    let per_team = 2 * cfg.remaining_games / cfg.teams;
    if per_team + 2 > cfg.m_hat as usize {
        return Err(Error::Config(format!(
            "{} remaining games over {} teams exceeds the full season length {}",
            cfg.remaining_games, cfg.teams, cfg.m_hat
        )));
    }
    if cfg.m > cfg.m_hat {
        return Err(Error::Config(format!(
            "shortened season {} exceeds full season {}",
            cfg.m, cfg.m_hat
        )));
    }
    // Small structural adjustments can make a particular draw infeasible;
    // retry with fresh sub-streams rather than patching the draw.
    for attempt in 0..32 {
        if let Some(state) = try_league(cfg, attempt)? {
            return Ok(state);
        }
    }
    Err(Error::Config(
        "could not draw a feasible synthetic league; targets too tight for the slate".into(),
    ))
}

fn try_league(cfg: &SynthConfig, attempt: u64) -> Result<Option<LeagueState>> {
    let n = cfg.teams;
    let mut rng = stream(cfg.seed, 1000 + attempt);
    let strength_dist = Normal::new(0.0, cfg.strength_spread.max(1e-9))
        .map_err(|e| Error::Config(format!("bad strength spread: {e}")))?;
    let strengths: Vec<f64> = (0..n).map(|_| strength_dist.sample(&mut rng)).collect();

    // Remaining slate: repeatedly match the two teams with the largest
    // outstanding degree need, breaking ties at random for variety.
    let mut need: Vec<i64> = {
        let base = (2 * cfg.remaining_games / n) as i64;
        let extra = 2 * cfg.remaining_games - n * base as usize;
        let mut need = vec![base; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for &i in order.iter().take(extra) {
            need[i] += 1;
        }
        need
    };
    let mut home_deg = vec![0u32; n];
    let mut away_deg = vec![0u32; n];
    let mut pair_count: HashMap<(usize, usize), u32> = HashMap::new();
    let mut games = Vec::with_capacity(cfg.remaining_games);
    for g in 0..cfg.remaining_games {
        let (a, b) = top_two(&need, &mut rng);
        need[a] -= 1;
        need[b] -= 1;
        // The team further behind on home games hosts.
        let (host, guest) = if i64::from(home_deg[a]) - i64::from(away_deg[a])
            <= i64::from(home_deg[b]) - i64::from(away_deg[b])
        {
            (a, b)
        } else {
            (b, a)
        };
        home_deg[host] += 1;
        away_deg[guest] += 1;
        let k = pair_count.entry((host, guest)).or_insert(0);
        *k += 1;
        let p = sigmoid(strengths[host] - strengths[guest] + cfg.home_advantage)
            .clamp(0.05, 0.95);
        games.push(Game {
            id: g as u32,
            host,
            guest,
            match_index: *k,
            day: rng.random_range(1..=90),
            win_prob: p,
        });
    }

    // Records: every team has played m_hat - degree games.
    let mut teams = Vec::with_capacity(n);
    let mut home_targets = vec![0u32; n];
    let mut away_targets = vec![0u32; n];
    for i in 0..n {
        let deg = home_deg[i] + away_deg[i];
        let pre_games = cfg.m_hat - deg;
        let t_i = cfg.m.checked_sub(pre_games).ok_or_else(|| {
            Error::Config(format!(
                "team {i} has already played {pre_games} games, more than m = {}",
                cfg.m
            ))
        })?;
        if t_i > deg {
            return Err(Error::Config(format!(
                "team {i} must play {t_i} more games but only {deg} remain"
            )));
        }
        // Split the target between home and away proportionally, inside the
        // feasible box.
        let lo = t_i.saturating_sub(away_deg[i]);
        let hi = t_i.min(home_deg[i]);
        let mid = ((f64::from(t_i) * f64::from(home_deg[i]) / f64::from(deg.max(1))).round()
            as u32)
            .clamp(lo, hi);
        home_targets[i] = mid;
        away_targets[i] = t_i - mid;

        let win_rate = sigmoid(0.9 * strengths[i]).clamp(0.05, 0.95);
        let pre_wins = Binomial::new(u64::from(pre_games), win_rate)
            .map_err(|e| Error::Config(format!("bad binomial: {e}")))?
            .sample(&mut rng) as u32;
        let pre_home = (pre_games / 2).min(pre_games);
        teams.push(Team {
            id: i as u32,
            name: format!("T{i:02}"),
            conference: if i < n / 2 { "East" } else { "West" }.into(),
            division: format!("D{}", i / 5),
            pre_wins,
            pre_home_played: pre_home,
            pre_away_played: pre_games - pre_home,
            home_target: home_targets[i],
            away_target: away_targets[i],
        });
    }

    // Home and away target totals must match; shift surplus between sides
    // where the per-team box allows it.
    balance_targets(&mut teams, &home_deg, &away_deg, &mut rng);

    let pairs: Vec<(usize, usize)> = games.iter().map(|g| (g.host, g.guest)).collect();
    let ht: Vec<u32> = teams.iter().map(|t| t.home_target).collect();
    let at: Vec<u32> = teams.iter().map(|t| t.away_target).collect();
    if min_cost_selection(n, &pairs, &ht, &at, &vec![0.0; pairs.len()]).is_err() {
        return Ok(None); // retry with a fresh draw
    }
    LeagueState::new(teams, games, cfg.m, cfg.m_hat).map(Some)
}

/// Moves single target units between the home and away side of individual
/// teams until total home targets equal total away targets.
fn balance_targets<R: Rng>(teams: &mut [Team], home_deg: &[u32], away_deg: &[u32], rng: &mut R) {
    loop {
        let home_sum: i64 = teams.iter().map(|t| i64::from(t.home_target)).sum();
        let away_sum: i64 = teams.iter().map(|t| i64::from(t.away_target)).sum();
        if home_sum == away_sum {
            return;
        }
        let candidates: Vec<usize> = (0..teams.len())
            .filter(|&i| {
                if home_sum > away_sum {
                    // Shift one unit home -> away.
                    teams[i].home_target > 0 && teams[i].away_target < away_deg[i]
                } else {
                    teams[i].away_target > 0 && teams[i].home_target < home_deg[i]
                }
            })
            .collect();
        if candidates.is_empty() {
            return; // leave it; the feasibility check will trigger a retry
        }
        let pick = candidates[rng.random_range(0..candidates.len())];
        if home_sum > away_sum {
            teams[pick].home_target -= 1;
            teams[pick].away_target += 1;
        } else {
            teams[pick].away_target -= 1;
            teams[pick].home_target += 1;
        }
    }
}

/// Indices of the two largest entries, ties broken at random.
fn top_two<R: Rng>(need: &[i64], rng: &mut R) -> (usize, usize) {
    let max1 = *need.iter().max().unwrap();
    let firsts: Vec<usize> = (0..need.len()).filter(|&i| need[i] == max1).collect();
    let a = firsts[rng.random_range(0..firsts.len())];
    let max2 = need
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(_, &v)| v)
        .max()
        .unwrap();
    let seconds: Vec<usize> = (0..need.len())
        .filter(|&i| i != a && need[i] == max2)
        .collect();
    let b = seconds[rng.random_range(0..seconds.len())];
    (a, b)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// A random 4-team instance with 6-10 remaining games, feasible by
/// construction (targets are read off a random witness selection). Small
/// enough to enumerate every feasible schedule and every scenario.
pub fn tiny_league<R: Rng>(rng: &mut R) -> LeagueState {
    loop {
        let n = 4usize;
        let n_games = rng.random_range(6..=10);
        let mut pair_count: HashMap<(usize, usize), u32> = HashMap::new();
        let mut games = Vec::with_capacity(n_games);
        for g in 0..n_games {
            let host = rng.random_range(0..n);
            let guest = (host + rng.random_range(1..n)) % n;
            let k = pair_count.entry((host, guest)).or_insert(0);
            *k += 1;
            games.push(Game {
                id: g as u32,
                host,
                guest,
                match_index: *k,
                day: g as u32 + 1,
                win_prob: rng.random_range(0.05..0.95),
            });
        }
        let witness: Vec<bool> = (0..n_games).map(|_| rng.random_bool(0.5)).collect();
        if witness.iter().filter(|&&s| s).count() < 2 {
            continue;
        }
        let mut home_targets = vec![0u32; n];
        let mut away_targets = vec![0u32; n];
        for (g, game) in games.iter().enumerate() {
            if witness[g] {
                home_targets[game.host] += 1;
                away_targets[game.guest] += 1;
            }
        }
        let t_max = (0..n)
            .map(|i| home_targets[i] + away_targets[i])
            .max()
            .unwrap();
        let m = t_max + rng.random_range(0..=3);
        let m_hat = m + rng.random_range(1..=4);
        let teams = (0..n)
            .map(|i| {
                let pre_games = m - home_targets[i] - away_targets[i];
                let pre_home = rng.random_range(0..=pre_games);
                Team {
                    id: i as u32,
                    name: format!("T{i}"),
                    conference: if i < n / 2 { "East" } else { "West" }.into(),
                    division: "D0".into(),
                    pre_wins: rng.random_range(0..=pre_games),
                    pre_home_played: pre_home,
                    pre_away_played: pre_games - pre_home,
                    home_target: home_targets[i],
                    away_target: away_targets[i],
                }
            })
            .collect();
        return LeagueState::new(teams, games, m, m_hat).expect("witness makes instance valid");
    }
}

/// Every feasible 0/1 schedule of a small instance, by direct enumeration.
///
/// Intended for oracle tests; fails if the instance has more than 20
/// remaining games.
pub fn enumerate_feasible(state: &LeagueState) -> Result<Vec<Schedule>> {
    let n_games = state.n_games();
    if n_games > 20 {
        return Err(Error::Config(format!(
            "enumeration over {n_games} games is too large; this helper is for tiny instances"
        )));
    }
    let mut feasible = Vec::new();
    for mask in 0..(1u64 << n_games) {
        let schedule =
            Schedule::integral((0..n_games).map(|g| mask >> g & 1 == 1).collect());
        if state.check_feasible(&schedule).is_ok() {
            feasible.push(schedule);
        }
    }
    Ok(feasible)
}

/// A uniformly random feasible schedule of a small instance.
pub fn random_feasible<R: Rng>(state: &LeagueState, rng: &mut R) -> Schedule {
    let all = enumerate_feasible(state).expect("tiny instance");
    assert!(!all.is_empty(), "instance has no feasible schedule");
    all[rng.random_range(0..all.len())].clone()
}

/// Four teams with a fixed eight-game slate: both orders of the pairs
/// (0,1), (2,3), (0,2), (1,3). Every team hosts twice and visits twice;
/// pre-suspension games fill the difference to `m`. Handy when a test needs
/// full control over records, targets, and win probabilities.
pub fn four_team_league(
    pre_wins: [u32; 4],
    targets: [(u32, u32); 4],
    m: u32,
    m_hat: u32,
    probs: &[f64; 8],
) -> Result<LeagueState> {
    let pairs = [(0, 1), (1, 0), (2, 3), (3, 2), (0, 2), (2, 0), (1, 3), (3, 1)];
    let games: Vec<Game> = pairs
        .iter()
        .zip(probs)
        .enumerate()
        .map(|(id, (&(host, guest), &p))| Game {
            id: id as u32,
            host,
            guest,
            match_index: 0,
            day: id as u32 + 1,
            win_prob: p,
        })
        .collect();
    let teams: Vec<Team> = (0..4)
        .map(|i| {
            let (th, ta) = targets[i];
            let pre = m - th - ta;
            Team {
                id: i as u32,
                name: format!("T{i}"),
                conference: "C".into(),
                division: "D".into(),
                pre_wins: pre_wins[i],
                pre_home_played: pre / 2,
                pre_away_played: pre - pre / 2,
                home_target: th,
                away_target: ta,
            }
        })
        .collect();
    LeagueState::new(teams, games, m, m_hat)
}
