//! Closed-form expected squared distance between shortened- and full-season
//! win percentages.
//!
//! With independent Bernoulli game outcomes, the expectation
//! `E[sum_i (y_i(x) - y_hat_i)^2]` over season realizations collapses to a
//! deterministic convex quadratic in the selection vector `x`:
//!
//! ```text
//! f(x) = sum_i [ (mu_i(x) - mu_hat_i)^2 + alpha * v_i(x) + v_hat_i ]
//! ```
//!
//! where `mu_i` / `v_i` are the mean and variance of team `i`'s shortened-
//! season win percentage, `mu_hat_i` / `v_hat_i` the full-season analogues,
//! and `alpha = 1 - 2m/m_hat`. The identity is exact for 0/1 selections;
//! solvers minimize the same expression over the fractional relaxation.
//!
//! Both `mu` terms are affine in `x` and the variance terms are linear, so
//! the objective evaluates in `O(|G| + n)`, has a closed-form gradient, and
//! restricted to any line has *exact* quadratic curvature — which is what
//! gives the Frank-Wolfe solver its closed-form line search.

use crate::error::{Error, Result};
use crate::league::{LeagueState, Scenario, Schedule};
use crate::metrics;
use crate::rng::stream;
use rand::Rng;

/// Precomputed coefficients of the deterministic-equivalent objective for
/// one league instance and one probability vector.
///
/// The model copies the slices of league state it needs (targets, records,
/// game endpoints), so it stays valid independently of the originating
/// [`LeagueState`].
#[derive(Debug, Clone)]
pub struct PwObjectiveModel {
    n_teams: usize,
    m: f64,
    m_hat: f64,
    alpha: f64,
    /// Pre-suspension wins per team.
    y0: Vec<f64>,
    home_targets: Vec<u32>,
    away_targets: Vec<u32>,
    /// Per game: host, guest, host-win probability, outcome variance
    /// `p(1-p)`.
    host: Vec<usize>,
    guest: Vec<usize>,
    p: Vec<f64>,
    var: Vec<f64>,
    /// Full-season win-percentage means `mu_hat_i`.
    mu_hat: Vec<f64>,
    /// Sum of full-season variances `sum_i v_hat_i` (constant term).
    v_hat_sum: f64,
}

impl PwObjectiveModel {
    /// Builds the model using each game's own win probability.
    pub fn new(state: &LeagueState) -> Self {
        Self::with_probs(state, &state.win_probs()).expect("state probabilities are valid")
    }

    /// Builds the model with an alternative host-win probability vector
    /// (candidate models, hold-out evaluation probabilities, ...).
    pub fn with_probs(state: &LeagueState, probs: &[f64]) -> Result<Self> {
        if probs.len() != state.n_games() {
            return Err(Error::Dimension {
                expected: state.n_games(),
                got: probs.len(),
            });
        }
        for (g, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain(format!(
                    "game {g}: probability {p} must lie strictly inside (0, 1)"
                )));
            }
        }
        let n = state.n_teams();
        let m = f64::from(state.m());
        let m_hat = f64::from(state.m_hat());
        let y0: Vec<f64> = state.teams().iter().map(|t| f64::from(t.pre_wins)).collect();
        let mut mu_hat = y0.iter().map(|&w| w / m_hat).collect::<Vec<_>>();
        let mut v_hat_sum = 0.0;
        let mut host = Vec::with_capacity(state.n_games());
        let mut guest = Vec::with_capacity(state.n_games());
        let mut var = Vec::with_capacity(state.n_games());
        for (game, &p) in state.games().iter().zip(probs) {
            host.push(game.host);
            guest.push(game.guest);
            let v = p * (1.0 - p);
            var.push(v);
            mu_hat[game.host] += p / m_hat;
            mu_hat[game.guest] += (1.0 - p) / m_hat;
            // Each game contributes its outcome variance to both teams.
            v_hat_sum += 2.0 * v / (m_hat * m_hat);
        }
        Ok(PwObjectiveModel {
            n_teams: n,
            m,
            m_hat,
            alpha: state.alpha(),
            y0,
            home_targets: state.teams().iter().map(|t| t.home_target).collect(),
            away_targets: state.teams().iter().map(|t| t.away_target).collect(),
            host,
            guest,
            p: probs.to_vec(),
            var,
            mu_hat,
            v_hat_sum,
        })
    }

    pub fn n_teams(&self) -> usize {
        self.n_teams
    }

    pub fn n_games(&self) -> usize {
        self.host.len()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn m_hat(&self) -> f64 {
        self.m_hat
    }

    /// Variance weight `1 - 2m/m_hat`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Host-win probabilities the model was built with.
    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Per-game outcome variances `p_g(1 - p_g)`.
    pub fn game_variances(&self) -> &[f64] {
        &self.var
    }

    pub(crate) fn host_of(&self, g: usize) -> usize {
        self.host[g]
    }

    pub(crate) fn guest_of(&self, g: usize) -> usize {
        self.guest[g]
    }

    pub(crate) fn home_targets(&self) -> &[u32] {
        &self.home_targets
    }

    pub(crate) fn away_targets(&self) -> &[u32] {
        &self.away_targets
    }

    /// Shortened-season win-percentage means `mu_i(x)`.
    fn mu(&self, x: &[f64]) -> Vec<f64> {
        let mut mu: Vec<f64> = self.y0.iter().map(|&w| w / self.m).collect();
        for g in 0..self.n_games() {
            mu[self.host[g]] += self.p[g] * x[g] / self.m;
            mu[self.guest[g]] += (1.0 - self.p[g]) * x[g] / self.m;
        }
        mu
    }

    /// Objective value at a (possibly fractional) selection vector.
    pub fn evaluate(&self, x: &Schedule) -> Result<f64> {
        self.evaluate_values(&x.values())
    }

    /// [`evaluate`](Self::evaluate) on a raw value vector in `[0, 1]^|G|`.
    pub fn evaluate_values(&self, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        let mu = self.mu(x);
        let mut f = self.v_hat_sum;
        for i in 0..self.n_teams {
            let d = mu[i] - self.mu_hat[i];
            f += d * d;
        }
        let mut var_sum = 0.0;
        for g in 0..self.n_games() {
            var_sum += self.var[g] * x[g];
        }
        // Each selected game's variance hits both participants.
        f += self.alpha * 2.0 * var_sum / (self.m * self.m);
        Ok(f)
    }

    /// Gradient of the objective at `x`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        let mu = self.mu(x);
        let mut grad = Vec::with_capacity(self.n_games());
        for g in 0..self.n_games() {
            let dh = mu[self.host[g]] - self.mu_hat[self.host[g]];
            let dg = mu[self.guest[g]] - self.mu_hat[self.guest[g]];
            let mean_term = 2.0 / self.m * (dh * self.p[g] + dg * (1.0 - self.p[g]));
            // x_g appears in the variance of both the host and the guest.
            let var_term = self.alpha * 2.0 / (self.m * self.m) * self.var[g];
            grad.push(mean_term + var_term);
        }
        Ok(grad)
    }

    /// Exact quadratic coefficient of the objective along `direction`:
    /// `f(x + t*d) = f(x) + t * grad(x)'d + t^2 * directional_curvature(d)`.
    pub fn directional_curvature(&self, direction: &[f64]) -> Result<f64> {
        if direction.len() != self.n_games() {
            return Err(Error::Dimension {
                expected: self.n_games(),
                got: direction.len(),
            });
        }
        let mut a = vec![0.0; self.n_teams];
        for g in 0..self.n_games() {
            a[self.host[g]] += self.p[g] * direction[g] / self.m;
            a[self.guest[g]] += (1.0 - self.p[g]) * direction[g] / self.m;
        }
        Ok(a.iter().map(|ai| ai * ai).sum())
    }

    /// Monte Carlo estimate of `E[sum_i (y_i(x) - y_hat_i)^2]` with its
    /// standard error; the sanity check the closed form is tested against.
    ///
    /// Replication `r` draws from stream `r` of `seed`, so estimates are
    /// independent of iteration order.
    pub fn mc_estimate(
        &self,
        state: &LeagueState,
        x: &Schedule,
        samples: usize,
        seed: u64,
    ) -> Result<(f64, f64)> {
        if samples == 0 {
            return Err(Error::Domain("mc_estimate needs at least one sample".into()));
        }
        state.check_feasible(x)?;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut outcomes = vec![false; self.n_games()];
        for r in 0..samples {
            let mut rng = stream(seed, r as u64);
            for (g, o) in outcomes.iter_mut().enumerate() {
                *o = rng.random_bool(self.p[g]);
            }
            let scenario = Scenario::binary(outcomes.clone());
            let short = state.short_scores_unchecked(x, &scenario);
            let full = state.full_scores_unchecked(&scenario);
            let mut dist = 0.0;
            for i in 0..self.n_teams {
                let d = short.value(i) - full.value(i);
                dist += d * d;
            }
            sum += dist;
            sum_sq += dist * dist;
        }
        let n = samples as f64;
        let mean = sum / n;
        let stderr = if samples > 1 {
            ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Ok((mean, stderr))
    }

    /// Upper bound on the squared-Euclidean rank distance implied by an
    /// objective value `f`, via the win-percentage grid: ranks can differ
    /// only if percentages differ by at least `1/lcm(m, m_hat)`.
    pub fn rank_distance_bound(&self, objective: f64) -> f64 {
        let m = self.m as u64;
        let m_hat = self.m_hat as u64;
        let l = (m * m_hat / gcd(m, m_hat)) as f64;
        metrics::max_euclidean_distance(self.n_teams as u64) as f64 * l * l * objective
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_games() {
            return Err(Error::Dimension {
                expected: self.n_games(),
                got: x.len(),
            });
        }
        for (g, &v) in x.iter().enumerate() {
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::Domain(format!(
                    "selection value {v} for game {g} lies outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
