//! Min-max regret planning over an ensemble of win-probability candidates.
//!
//! Different predictive models produce different win-probability vectors for
//! the same remaining slate, and committing to a single one bakes its bias
//! into the chosen schedule. This module instead minimizes the worst *regret*
//! across a set of candidates: the regret against candidate `l` is how much
//! worse a schedule scores under `l`'s objective than a certified lower
//! bound on `l`'s own optimum, so regrets are never negative on the feasible
//! set and the min-max value itself is bounded below by zero.
//!
//! The pointwise maximum of quadratics is non-smooth, which breaks the plain
//! linearize-and-step scheme, so [`solve_mmr`] minimizes the log-sum-exp
//! smoothing
//!
//! ```text
//! F_tau(x) = tau * ln( sum_l exp(regret_l(x) / tau) )
//! ```
//!
//! whose error is bracketed by `max_l regret_l(x) <= F_tau(x) <= max_l
//! regret_l(x) + tau * ln|L|`. The temperature anneals downward across outer
//! rounds while every round runs the usual loop: smoothed gradient,
//! transportation subproblem, golden-section line search (the smoothed
//! objective is convex along segments but no longer quadratic, so the
//! closed-form step does not apply). Every integral atom the subproblem
//! emits is scored by its *exact* max regret, and the best one is returned
//! together with a zero-clamped lower bound derived from the smoothed dual
//! gap.

use crate::error::{Error, Result};
use crate::fw::{self, FwConfig};
use crate::league::{LeagueState, Schedule};
use crate::objective::PwObjectiveModel;

/// An ensemble of candidate win-probability vectors, each with a label, an
/// objective model, and a reference value `theta` that lower-bounds the
/// candidate's own optimum.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    labels: Vec<String>,
    models: Vec<PwObjectiveModel>,
    thetas: Vec<f64>,
}

impl CandidateSet {
    /// Builds the ensemble, solving each candidate's own planning problem to
    /// obtain its reference value (the certified lower bound, not the atom
    /// value, so regrets stay non-negative over the whole relaxed polytope).
    pub fn build(
        state: &LeagueState,
        candidates: Vec<(String, Vec<f64>)>,
        config: &FwConfig,
    ) -> Result<Self> {
        let (labels, models) = Self::assemble(state, candidates)?;
        let mut thetas = Vec::with_capacity(models.len());
        for model in &models {
            thetas.push(fw::solve(model, config)?.lower_bound);
        }
        Ok(CandidateSet {
            labels,
            models,
            thetas,
        })
    }

    /// Builds the ensemble with caller-supplied reference values.
    ///
    /// Each `theta` must lower-bound the corresponding candidate's optimal
    /// objective; a value above it makes regrets negative and invalidates
    /// the zero-clamped lower bound reported by [`solve_mmr`]. Intended for
    /// tests and for replaying previously computed bounds.
    pub fn with_thetas(
        state: &LeagueState,
        candidates: Vec<(String, Vec<f64>)>,
        thetas: Vec<f64>,
    ) -> Result<Self> {
        let (labels, models) = Self::assemble(state, candidates)?;
        if thetas.len() != models.len() {
            return Err(Error::Dimension {
                expected: models.len(),
                got: thetas.len(),
            });
        }
        for (l, &t) in thetas.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::Domain(format!(
                    "candidate {}: reference value {t} must be finite",
                    labels[l]
                )));
            }
        }
        Ok(CandidateSet {
            labels,
            models,
            thetas,
        })
    }

    fn assemble(
        state: &LeagueState,
        candidates: Vec<(String, Vec<f64>)>,
    ) -> Result<(Vec<String>, Vec<PwObjectiveModel>)> {
        if candidates.is_empty() {
            return Err(Error::Config("candidate set is empty".into()));
        }
        let mut labels = Vec::with_capacity(candidates.len());
        let mut models = Vec::with_capacity(candidates.len());
        for (label, probs) in candidates {
            if labels.contains(&label) {
                return Err(Error::Config(format!("duplicate candidate label {label}")));
            }
            models.push(PwObjectiveModel::with_probs(state, &probs)?);
            labels.push(label);
        }
        Ok((labels, models))
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Reference value (lower bound on the candidate's own optimum).
    pub fn theta(&self, l: usize) -> f64 {
        self.thetas[l]
    }

    pub fn model(&self, l: usize) -> &PwObjectiveModel {
        &self.models[l]
    }

    /// Index of a candidate by label.
    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownKey(format!("candidate label {label}")))
    }

    /// Regret of selection `x` against the labeled candidate: the
    /// candidate-specific objective at `x` minus the candidate's reference
    /// value.
    pub fn regret(&self, label: &str, x: &Schedule) -> Result<f64> {
        let l = self.index_of(label)?;
        self.regret_values(l, &x.values())
    }

    fn regret_values(&self, l: usize, values: &[f64]) -> Result<f64> {
        Ok(self.models[l].evaluate_values(values)? - self.thetas[l])
    }

    /// Regrets of `values` against every candidate, in label order.
    fn all_regrets(&self, values: &[f64]) -> Result<Vec<f64>> {
        (0..self.len()).map(|l| self.regret_values(l, values)).collect()
    }

    fn n_games(&self) -> usize {
        self.models[0].n_games()
    }
}

/// Knobs for the smoothed min-max regret solver.
#[derive(Debug, Clone)]
pub struct MmrConfig {
    /// Number of annealing rounds; the temperature is interpolated
    /// geometrically from `tau_start` to `tau_end` across them.
    pub outer_rounds: usize,
    /// Cap on linearize/step iterations within one round.
    pub inner_iterations: usize,
    /// Smoothing temperature of the first round.
    pub tau_start: f64,
    /// Smoothing temperature of the last round.
    pub tau_end: f64,
    /// A round stops once its smoothed dual gap falls below this fraction of
    /// the smoothed objective.
    pub rel_gap_tol: f64,
    /// A round stops when one iteration decreases the smoothed objective by
    /// less than this.
    pub stall_tol: f64,
    /// Interval width at which the golden-section line search stops.
    pub line_search_tol: f64,
}

impl Default for MmrConfig {
    fn default() -> Self {
        MmrConfig {
            outer_rounds: 7,
            inner_iterations: 80,
            tau_start: 1.0,
            tau_end: 1e-3,
            rel_gap_tol: 1e-6,
            stall_tol: 1e-12,
            line_search_tol: 1e-8,
        }
    }
}

impl MmrConfig {
    fn validate(&self) -> Result<()> {
        if self.outer_rounds == 0 || self.inner_iterations == 0 {
            return Err(Error::Config(
                "outer_rounds and inner_iterations must be positive".into(),
            ));
        }
        if !(self.tau_end > 0.0) || !(self.tau_start >= self.tau_end) {
            return Err(Error::Config(format!(
                "temperatures must satisfy tau_start >= tau_end > 0, got {} and {}",
                self.tau_start, self.tau_end
            )));
        }
        if !self.tau_start.is_finite() {
            return Err(Error::Config("tau_start must be finite".into()));
        }
        if !(self.rel_gap_tol > 0.0) || !(self.stall_tol > 0.0) || !(self.line_search_tol > 0.0) {
            return Err(Error::Config(
                "rel_gap_tol, stall_tol, and line_search_tol must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The temperature schedule, geometric from `tau_start` to `tau_end`.
    fn temperatures(&self) -> Vec<f64> {
        if self.outer_rounds == 1 {
            return vec![self.tau_end];
        }
        let ratio = self.tau_end / self.tau_start;
        (0..self.outer_rounds)
            .map(|k| {
                let t = k as f64 / (self.outer_rounds - 1) as f64;
                self.tau_start * ratio.powf(t)
            })
            .collect()
    }
}

/// One row of the solver's convergence trace.
#[derive(Debug, Clone)]
pub struct MmrIteration {
    /// Annealing round (0-based) and its temperature.
    pub round: usize,
    pub tau: f64,
    /// Global iteration counter across rounds (1-based).
    pub iteration: usize,
    /// Smoothed objective at the current fractional point.
    pub smoothed: f64,
    /// Exact max regret at the same point (sandwiched below `smoothed`).
    pub exact: f64,
    /// Exact max regret of the integral atom harvested this iteration.
    pub atom_regret: f64,
    /// Best zero-clamped lower bound on the min-max regret seen so far.
    pub lower_bound: f64,
    /// Line-search step taken along `atom - x`.
    pub step: f64,
}

/// Outcome of the smoothed min-max regret solve.
#[derive(Debug, Clone)]
pub struct MmrResult {
    /// Harvested integral schedule with the smallest exact max regret.
    pub best_atom: Schedule,
    /// Final fractional iterate (solution of the relaxed smoothed problem).
    pub fractional: Schedule,
    /// Exact max regret of `best_atom`; the quantity being minimized.
    pub max_regret: f64,
    /// Regret of `best_atom` against each candidate, in label order.
    pub per_candidate_regrets: Vec<f64>,
    /// Valid lower bound on the min-max regret over feasible schedules
    /// (never below zero).
    pub lower_bound: f64,
    /// `max_regret - lower_bound`.
    pub abs_gap: f64,
    /// Total inner iterations across all rounds.
    pub iterations: usize,
    /// Whether the final round stopped on its gap or stall criterion rather
    /// than the iteration cap.
    pub converged: bool,
    pub trace: Vec<MmrIteration>,
}

/// Stable log-sum-exp of `regrets / tau`, scaled back by `tau`.
fn smoothed_max(regrets: &[f64], tau: f64) -> f64 {
    let m = regrets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = regrets.iter().map(|r| ((r - m) / tau).exp()).sum();
    m + tau * sum.ln()
}

/// Softmax weights of `regrets / tau`: non-negative, summing to one.
fn softmax(regrets: &[f64], tau: f64) -> Vec<f64> {
    let m = regrets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = regrets.iter().map(|r| ((r - m) / tau).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn bools_to_values(selected: &[bool]) -> Vec<f64> {
    selected.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

/// Worst regret of `values` across all candidates.
fn exact_max_regret(set: &CandidateSet, values: &[f64]) -> Result<f64> {
    Ok(set
        .all_regrets(values)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Frank-Wolfe descent on the fixed-weight mixture `sum_l w_l * regret_l`.
///
/// For fixed simplex weights the mixture is an ordinary quadratic, so the
/// exact step along each atom direction is closed-form. Starts cold, from
/// the vertex minimizing the mixture's own linear coefficients (a warm start
/// at another objective's optimum can sit on a degenerate segment whose
/// endpoints are the only atoms ever harvested). Returns the atoms visited
/// and the best linearization bound on the mixture minimum, which by weak
/// duality is also a valid lower bound on the min-max regret.
fn mixture_descent(
    set: &CandidateSet,
    state: &LeagueState,
    weights: &[f64],
    max_iterations: usize,
) -> Result<(Vec<Vec<bool>>, f64)> {
    let n_games = set.n_games();
    let mut costs = vec![0.0; n_games];
    for (l, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let model = &set.models[l];
        let m2 = model.m() * model.m();
        for (c, &v) in costs.iter_mut().zip(model.game_variances()) {
            *c += w * model.alpha() * 2.0 * v / m2;
        }
    }
    let start = fw::transportation_subproblem(state, &costs)?;
    let mut x = start.values();
    let mut atoms = vec![start.selected().to_vec()];
    let mut bound = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    for _ in 0..max_iterations {
        let mut value = 0.0;
        let mut grad = vec![0.0; n_games];
        for (l, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            value += w * (set.models[l].evaluate_values(&x)? - set.thetas[l]);
            let g = set.models[l].gradient(&x)?;
            for (gg, gi) in grad.iter_mut().zip(&g) {
                *gg += w * gi;
            }
        }
        let atom_schedule = fw::transportation_subproblem(state, &grad)?;
        let atom = atom_schedule.values();
        let delta: Vec<f64> = atom.iter().zip(&x).map(|(a, b)| a - b).collect();
        let slope: f64 = grad.iter().zip(&delta).map(|(g, d)| g * d).sum();
        if atoms.last().map(Vec::as_slice) != Some(atom_schedule.selected()) {
            atoms.push(atom_schedule.selected().to_vec());
        }
        bound = bound.max(value + slope);
        if -slope <= 1e-13 || prev - value < 1e-12 {
            break;
        }
        prev = value;
        let mut curvature = 0.0;
        for (l, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            curvature += w * set.models[l].directional_curvature(&delta)?;
        }
        let step = if curvature > 0.0 {
            (-slope / (2.0 * curvature)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi = (*xi + step * di).clamp(0.0, 1.0);
        }
    }
    Ok((atoms, bound))
}

/// Golden-section search for the minimizer of a unimodal `phi` on `[0, 1]`.
fn golden_section<F>(mut phi: F, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = phi(c)?;
    let mut fd = phi(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = phi(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = phi(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimizes the worst regret across the candidate ensemble.
///
/// `state` must be the league instance the candidate set was built from; it
/// drives the transportation subproblem that generates integral atoms. The
/// candidate-wise gradient evaluations inside each iteration are independent
/// of one another, but at the ensemble sizes this library targets a
/// sequential sweep is already cheap, and it keeps the solver deterministic.
pub fn solve_mmr(set: &CandidateSet, state: &LeagueState, config: &MmrConfig) -> Result<MmrResult> {
    config.validate()?;
    let n_games = state.n_games();
    if set.n_games() != n_games {
        return Err(Error::Dimension {
            expected: n_games,
            got: set.n_games(),
        });
    }
    let n_l = set.len();
    let log_l = (n_l as f64).ln();

    // Start from the vertex minimizing the ensemble-average linearization at
    // the origin; for quadratics the gradient there is exactly the linear
    // coefficient vector, variance term included.
    let origin = vec![0.0; n_games];
    let mut costs = vec![0.0; n_games];
    for l in 0..n_l {
        let g = set.models[l].gradient(&origin)?;
        for (c, gi) in costs.iter_mut().zip(&g) {
            *c += gi / n_l as f64;
        }
    }
    let start = fw::transportation_subproblem(state, &costs)?;
    let mut x = start.values();

    let mut best = (start.selected().to_vec(), exact_max_regret(set, &x)?);
    let mut lower_bound = 0.0_f64;
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    // The smoothed trajectory settles into the relaxed optimum, whose nearby
    // extreme points need not include good *integral* answers. Descend each
    // fixed-weight mixture as well — every candidate alone, plus the
    // balanced blend — harvesting their atoms; these include each
    // candidate's own optimum, and each mixture's linearization bound is a
    // valid lower bound on the min-max regret by weak duality.
    let mut pulse_weights: Vec<Vec<f64>> = (0..n_l)
        .map(|l| (0..n_l).map(|k| f64::from(u8::from(k == l))).collect())
        .collect();
    if n_l > 1 {
        pulse_weights.push(vec![1.0 / n_l as f64; n_l]);
    }
    for weights in &pulse_weights {
        let (atoms, bound) = mixture_descent(set, state, weights, config.inner_iterations)?;
        lower_bound = lower_bound.max(bound.max(0.0));
        for key in atoms {
            let regret = exact_max_regret(set, &bools_to_values(&key))?;
            if regret < best.1 {
                best = (key, regret);
            }
        }
    }

    for (round, &tau) in config.temperatures().iter().enumerate() {
        let mut prev = f64::INFINITY;
        converged = false;
        for _ in 0..config.inner_iterations {
            iterations += 1;
            let regrets = set.all_regrets(&x)?;
            let smoothed = smoothed_max(&regrets, tau);
            let exact = regrets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights = softmax(&regrets, tau);

            let mut grad = vec![0.0; n_games];
            for (l, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let g = set.models[l].gradient(&x)?;
                for (gg, gi) in grad.iter_mut().zip(&g) {
                    *gg += w * gi;
                }
            }

            let atom_schedule = fw::transportation_subproblem(state, &grad)?;
            let atom = atom_schedule.values();
            // Non-negative by optimality of the atom; the floor only
            // suppresses cancellation noise once the iterate sits on a
            // vertex.
            let lin_gap: f64 = grad
                .iter()
                .zip(&x)
                .zip(&atom)
                .map(|((g, xi), ai)| g * (xi - ai))
                .sum::<f64>()
                .max(0.0);

            // Convexity gives `smoothed - lin_gap` as a bound on the relaxed
            // smoothed optimum; subtracting the smoothing error bounds the
            // true min-max regret, which is itself never negative.
            lower_bound = lower_bound.max((smoothed - lin_gap - tau * log_l).max(0.0));

            let atom_regret = exact_max_regret(set, &atom)?;
            if atom_regret < best.1 {
                best = (atom_schedule.selected().to_vec(), atom_regret);
            }

            let step = {
                let mut xt = vec![0.0; n_games];
                golden_section(
                    |t| {
                        for ((v, xi), ai) in xt.iter_mut().zip(&x).zip(&atom) {
                            *v = (xi + t * (ai - xi)).clamp(0.0, 1.0);
                        }
                        Ok(smoothed_max(&set.all_regrets(&xt)?, tau))
                    },
                    config.line_search_tol,
                )?
            };

            trace.push(MmrIteration {
                round,
                tau,
                iteration: iterations,
                smoothed,
                exact,
                atom_regret,
                lower_bound,
                step,
            });

            for (xi, ai) in x.iter_mut().zip(&atom) {
                *xi = (*xi + step * (ai - *xi)).clamp(0.0, 1.0);
            }

            // The smoothed objective sits within tau*ln|L| of a non-negative
            // function, so a relative gap test against max(|F|, tau) behaves
            // like the base solver's relative criterion without degenerating
            // when F approaches zero.
            if lin_gap <= config.rel_gap_tol * smoothed.abs().max(tau) {
                converged = true;
                break;
            }
            if prev - smoothed < config.stall_tol && prev.is_finite() {
                converged = true;
                break;
            }
            prev = smoothed;
        }

        if n_l > 1 {
            // Refresh the harvest at this round's effective weighting.
            let weights = softmax(&set.all_regrets(&x)?, tau);
            let (atoms, bound) =
                mixture_descent(set, state, &weights, config.inner_iterations)?;
            lower_bound = lower_bound.max(bound.max(0.0));
            for key in atoms {
                let regret = exact_max_regret(set, &bools_to_values(&key))?;
                if regret < best.1 {
                    best = (key, regret);
                }
            }
        }
    }

    let (best_key, max_regret) = best;
    let best_atom = Schedule::integral(best_key);
    let per_candidate_regrets = set.all_regrets(&best_atom.values())?;
    // The best atom is feasible, so the true min-max regret sits between the
    // two certificates; when they coincide, rounding can leave the lower one
    // a last-bit above the upper, which the min repairs.
    let lower_bound = lower_bound.min(max_regret);
    Ok(MmrResult {
        fractional: Schedule::fractional(x)?,
        best_atom,
        max_regret,
        per_candidate_regrets,
        lower_bound,
        abs_gap: max_regret - lower_bound,
        iterations,
        converged,
        trace,
    })
}
