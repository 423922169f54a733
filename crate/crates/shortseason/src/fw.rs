//! Frank-Wolfe solver for the continuous relaxation of the expected-distance
//! objective, plus the Lagrangian strength-of-schedule variant.
//!
//! Every linear subproblem over the relaxed feasible set is a transportation
//! problem on the bipartite team/game multigraph, so each iteration produces
//! an *integral* vertex ("atom"). The solver therefore yields two things at
//! once: a fractional iterate that certifies a lower bound, and a pool of
//! feasible integral schedules from which the best is kept.
//!
//! Because the objective is an exact quadratic along any segment, the line
//! search is closed form: with `g = grad(x)' (atom - x)` and curvature `c`,
//! the minimizing step is `clamp(-g / 2c, 0, 1)`.
//!
//! The strength-of-schedule variant ([`solve_sos`]) dualizes the per-team
//! constraints `(OW_i(x) - OW_hat_i) / OW_hat_i <= eps` with multipliers
//! `lambda >= 0`. The penalty is linear in `x`, so the inner problem keeps
//! the same transportation structure; the outer loop runs a projected
//! subgradient ascent on `lambda`.

use crate::error::{Error, Result};
use crate::flow::{min_cost_selection, TransportationSolver};
use crate::league::{LeagueState, Schedule};
use crate::objective::PwObjectiveModel;
use std::collections::HashSet;

/// Termination and dual-loop controls for the solver.
#[derive(Debug, Clone)]
pub struct FwConfig {
    /// Cap on Frank-Wolfe iterations (per inner solve in the SoS variant).
    pub max_iterations: usize,
    /// Stop when `(upper - lower) / lower` drops to this value.
    pub rel_gap_tol: f64,
    /// Stop when one iteration decreases the objective by less than this.
    pub stall_tol: f64,
    /// Relative strength-of-schedule slack; `None` means unconstrained.
    pub sos_epsilon: Option<f64>,
    /// Cap on projected-subgradient updates of the SoS multipliers.
    pub sos_max_dual_iters: usize,
}

impl Default for FwConfig {
    fn default() -> Self {
        FwConfig {
            max_iterations: 500,
            rel_gap_tol: 1e-6,
            stall_tol: 1e-12,
            sos_epsilon: None,
            sos_max_dual_iters: 100,
        }
    }
}

impl FwConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.rel_gap_tol > 0.0) || !(self.stall_tol > 0.0) {
            return Err(Error::Config(
                "rel_gap_tol and stall_tol must be positive".into(),
            ));
        }
        if let Some(eps) = self.sos_epsilon {
            if !(eps >= 0.0) {
                return Err(Error::Config(format!(
                    "sos_epsilon must be non-negative, got {eps}"
                )));
            }
        }
        if self.sos_max_dual_iters == 0 {
            return Err(Error::Config("sos_max_dual_iters must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the per-iteration convergence trace.
#[derive(Debug, Clone)]
pub struct FwIteration {
    pub iteration: usize,
    /// Objective at the fractional iterate after this iteration's step.
    pub objective: f64,
    /// Objective of the atom harvested this iteration.
    pub atom_objective: f64,
    pub lower_bound: f64,
    pub rel_gap: f64,
    /// Line-search step taken toward the atom.
    pub step: f64,
}

/// Solver output: the best integral schedule found, the final fractional
/// iterate, and the bound certificates around them.
#[derive(Debug, Clone)]
pub struct FwResult {
    /// Best feasible integral schedule among all harvested atoms.
    pub best_atom: Schedule,
    /// Final fractional iterate of the relaxation.
    pub fractional: Schedule,
    /// Objective of `best_atom`.
    pub upper_bound: f64,
    /// Best linearization bound: a certified lower bound on the optimum.
    pub lower_bound: f64,
    pub abs_gap: f64,
    /// `(upper - lower) / lower`; `0` when the gap closes, `inf` when the
    /// lower bound is non-positive and the gap is open.
    pub rel_gap: f64,
    pub iterations: usize,
    /// Whether the gap tolerance was reached (as opposed to stalling or
    /// running out of iterations).
    pub converged: bool,
    /// Largest positive excess over the strength-of-schedule slack, when the
    /// SoS variant produced this result.
    pub sos_violation: Option<f64>,
    pub trace: Vec<FwIteration>,
}

/// Minimizes `sum_g costs[g] * x_g` over the relaxed schedule polytope.
///
/// The constraint matrix is the incidence structure of a bipartite multigraph
/// (totally unimodular), so the minimum is attained at an integral vertex,
/// which is what the underlying min-cost-flow solve returns.
pub fn transportation_subproblem(state: &LeagueState, costs: &[f64]) -> Result<Schedule> {
    if costs.len() != state.n_games() {
        return Err(Error::Dimension {
            expected: state.n_games(),
            got: costs.len(),
        });
    }
    let endpoints: Vec<(usize, usize)> = state.games().iter().map(|g| (g.host, g.guest)).collect();
    let home: Vec<u32> = state.teams().iter().map(|t| t.home_target).collect();
    let away: Vec<u32> = state.teams().iter().map(|t| t.away_target).collect();
    let selected = min_cost_selection(state.n_teams(), &endpoints, &home, &away, costs)?;
    Ok(Schedule::integral(selected))
}

/// Same linear subproblem, driven off the objective model's own copy of the
/// instance (endpoints and targets), so the solver needs no league handle.
/// The returned solver is reused across a whole Frank-Wolfe run.
fn lmo_for(model: &PwObjectiveModel) -> Result<TransportationSolver> {
    let endpoints: Vec<(usize, usize)> = (0..model.n_games())
        .map(|g| (model.host_of(g), model.guest_of(g)))
        .collect();
    TransportationSolver::new(
        model.n_teams(),
        &endpoints,
        model.home_targets(),
        model.away_targets(),
    )
}

/// Panics in debug builds if `atom` misses any home/away target.
fn debug_check_atom(model: &PwObjectiveModel, atom: &[bool]) {
    if cfg!(debug_assertions) {
        let mut home = vec![0u32; model.n_teams()];
        let mut away = vec![0u32; model.n_teams()];
        for g in 0..model.n_games() {
            if atom[g] {
                home[model.host_of(g)] += 1;
                away[model.guest_of(g)] += 1;
            }
        }
        debug_assert_eq!(home, model.home_targets());
        debug_assert_eq!(away, model.away_targets());
    }
}

/// Closed-form exact line search along `atom - x` for the quadratic
/// objective: returns the step in `[0, 1]` minimizing `f(x + step * d)`.
pub fn line_search(model: &PwObjectiveModel, x: &[f64], atom: &[f64]) -> Result<f64> {
    let grad = model.gradient(x)?;
    let delta: Vec<f64> = atom.iter().zip(x).map(|(a, b)| a - b).collect();
    let g: f64 = grad.iter().zip(&delta).map(|(gi, di)| gi * di).sum();
    let c = model.directional_curvature(&delta)?;
    Ok(step_from(g, c))
}

/// `argmin_{t in [0,1]} g t + c t^2` for curvature `c >= 0`.
fn step_from(g: f64, c: f64) -> f64 {
    if c > 0.0 {
        (-g / (2.0 * c)).clamp(0.0, 1.0)
    } else if g < 0.0 {
        1.0
    } else {
        0.0
    }
}

fn relative_gap(upper: f64, lower: f64) -> f64 {
    let abs = upper - lower;
    if abs <= 0.0 {
        0.0
    } else if lower <= 0.0 {
        f64::INFINITY
    } else {
        abs / lower
    }
}

/// Minimizes the expected-distance objective over feasible schedules.
///
/// Starts from the variance-aware integral point (transportation solve on
/// the objective's linear-in-`x` coefficients), then iterates: linearize,
/// solve the transportation subproblem, harvest the integral atom, take the
/// exact line-search step. Stops on the relative-gap tolerance, an objective
/// stall, or the iteration cap. Deterministic for a given instance.
pub fn solve(model: &PwObjectiveModel, config: &FwConfig) -> Result<FwResult> {
    let zeros = vec![0.0; model.n_games()];
    let run = fw_loop(model, config, &zeros)?;
    Ok(FwResult {
        best_atom: Schedule::integral(run.best_atom),
        fractional: Schedule::fractional(run.values)?,
        upper_bound: run.best_atom_objective,
        lower_bound: run.lower_bound,
        abs_gap: run.best_atom_objective - run.lower_bound,
        rel_gap: relative_gap(run.best_atom_objective, run.lower_bound),
        iterations: run.iterations,
        converged: run.converged,
        sos_violation: None,
        trace: run.trace,
    })
}

/// Raw output of one Frank-Wolfe run on the (possibly penalized) objective
/// `f(x) + linear' x`. All objective values include the linear offset.
struct PenalizedRun {
    values: Vec<f64>,
    best_atom: Vec<bool>,
    best_atom_objective: f64,
    lower_bound: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<FwIteration>,
    /// Distinct atoms in harvest order (consecutive repeats dropped).
    atoms: Vec<Vec<bool>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn atom_values(atom: &[bool]) -> Vec<f64> {
    atom.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
}

fn fw_loop(model: &PwObjectiveModel, config: &FwConfig, linear: &[f64]) -> Result<PenalizedRun> {
    config.validate()?;
    let evaluate = |x: &[f64]| -> Result<f64> { Ok(model.evaluate_values(x)? + dot(linear, x)) };

    // Deterministic feasible start: optimize the objective's exact
    // linear-in-x component (variance term plus any penalty).
    let m2 = model.m() * model.m();
    let start_costs: Vec<f64> = model
        .game_variances()
        .iter()
        .zip(linear)
        .map(|(&v, &q)| model.alpha() * 2.0 * v / m2 + q)
        .collect();
    let mut lmo = lmo_for(model)?;
    let x0 = lmo.solve(&start_costs)?;
    debug_check_atom(model, &x0);

    let mut x = atom_values(&x0);
    let mut f_x = evaluate(&x)?;
    let mut best_atom = x0.clone();
    let mut best_atom_objective = f_x;
    let mut lower_bound = f64::NEG_INFINITY;
    let mut atoms = vec![x0];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for t in 1..=config.max_iterations {
        iterations = t;
        let mut grad = model.gradient(&x)?;
        for (gi, &qi) in grad.iter_mut().zip(linear) {
            *gi += qi;
        }
        let atom = lmo.solve(&grad)?;
        debug_check_atom(model, &atom);
        let av = atom_values(&atom);
        let f_atom = evaluate(&av)?;
        if f_atom < best_atom_objective {
            best_atom_objective = f_atom;
            best_atom = atom.clone();
        }
        if atoms.last() != Some(&atom) {
            atoms.push(atom.clone());
        }

        // Linearization bound: f(x) + grad'(atom - x) is a global lower
        // bound because the atom minimizes the tangent plane over the
        // polytope and f is convex.
        let delta: Vec<f64> = av.iter().zip(&x).map(|(a, b)| a - b).collect();
        let g = dot(&grad, &delta);
        lower_bound = lower_bound.max(f_x + g);

        let c = model.directional_curvature(&delta)?;
        let step = step_from(g, c);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi = (*xi + step * di).clamp(0.0, 1.0);
        }
        let f_new = evaluate(&x)?;
        let decrease = f_x - f_new;
        f_x = f_new;

        let rel_gap = relative_gap(best_atom_objective, lower_bound);
        trace.push(FwIteration {
            iteration: t,
            objective: f_x,
            atom_objective: f_atom,
            lower_bound,
            rel_gap,
            step,
        });
        if rel_gap <= config.rel_gap_tol {
            converged = true;
            break;
        }
        if decrease < config.stall_tol {
            break;
        }
    }

    Ok(PenalizedRun {
        values: x,
        best_atom,
        best_atom_objective,
        lower_bound,
        iterations,
        converged,
        trace,
        atoms,
    })
}

/// Per-team opponents' win percentage of a selection `x`: for team `i`, the
/// selection-weighted mean pre-suspension win percentage of the opponents in
/// its games, `sum_{g in G_i} x_g * pre_pct[opp(i,g)] / denom_i`.
fn opponent_win_pct(
    model: &PwObjectiveModel,
    pre_win_pct: &[f64],
    x: &[f64],
    denoms: &[f64],
) -> Vec<f64> {
    let mut ow = vec![0.0; model.n_teams()];
    for g in 0..model.n_games() {
        let (h, a) = (model.host_of(g), model.guest_of(g));
        ow[h] += x[g] * pre_win_pct[a];
        ow[a] += x[g] * pre_win_pct[h];
    }
    for (o, &d) in ow.iter_mut().zip(denoms) {
        *o = if d > 0.0 { *o / d } else { 0.0 };
    }
    ow
}

/// Minimizes the expected-distance objective subject to per-team
/// strength-of-schedule constraints `(OW_i(x) - OW_hat_i)/OW_hat_i <= eps`,
/// where `OW_hat` is the opponents' win percentage of the full remaining
/// slate and `pre_win_pct` supplies each team's pre-suspension record.
///
/// The constraints are dualized: multipliers `lambda_i >= 0` add a linear
/// cost to each game (host and guest share), the inner solve stays a plain
/// Frank-Wolfe run, and `lambda` follows projected subgradient steps
/// `eta_k = 1/sqrt(k)`. Among all harvested atoms, returns the best one that
/// satisfies the constraints (within `1e-6`), or the least-violating one if
/// none does; `sos_violation` reports its worst excess over `eps`.
pub fn solve_sos(
    model: &PwObjectiveModel,
    config: &FwConfig,
    pre_win_pct: &[f64],
) -> Result<FwResult> {
    config.validate()?;
    if pre_win_pct.len() != model.n_teams() {
        return Err(Error::Dimension {
            expected: model.n_teams(),
            got: pre_win_pct.len(),
        });
    }
    let eps = config.sos_epsilon.unwrap_or(f64::INFINITY);
    let n = model.n_teams();

    // Reference point: opponents' win percentage over the full remaining
    // slate (x = 1), averaged over each team's own remaining games.
    let mut full_counts = vec![0.0; n];
    for g in 0..model.n_games() {
        full_counts[model.host_of(g)] += 1.0;
        full_counts[model.guest_of(g)] += 1.0;
    }
    let ones = vec![1.0; model.n_games()];
    let ow_hat = opponent_win_pct(model, pre_win_pct, &ones, &full_counts);
    // Short-season game counts per team (every feasible selection hits the
    // home/away targets exactly). Teams that select no games have no
    // strength-of-schedule constraint.
    let short_counts: Vec<f64> = (0..n)
        .map(|i| f64::from(model.home_targets()[i] + model.away_targets()[i]))
        .collect();
    let active: Vec<usize> = (0..n).filter(|&i| short_counts[i] > 0.0).collect();
    for &i in &active {
        if ow_hat[i] <= 0.0 {
            return Err(Error::DegenerateInstance(format!(
                "team {i} has zero full-slate opponents' win percentage; \
                 the relative strength-of-schedule constraint is undefined"
            )));
        }
    }

    let violation_of = |x: &[f64]| -> f64 {
        let ow = opponent_win_pct(model, pre_win_pct, x, &short_counts);
        active
            .iter()
            .map(|&i| ((ow[i] - ow_hat[i]) / ow_hat[i] - eps).max(0.0))
            .fold(0.0, f64::max)
    };

    // One inner Frank-Wolfe run on the Lagrangian: lambda_i * OW_i(x) /
    // OW_hat_i expands to a per-game cost paid by both participating teams.
    let penalized_inner = |lambda: &[f64]| -> Result<PenalizedRun> {
        let mut penalty = vec![0.0; model.n_games()];
        for (g, q) in penalty.iter_mut().enumerate() {
            let (h, a) = (model.host_of(g), model.guest_of(g));
            if short_counts[h] > 0.0 {
                *q += lambda[h] * pre_win_pct[a] / (short_counts[h] * ow_hat[h]);
            }
            if short_counts[a] > 0.0 {
                *q += lambda[a] * pre_win_pct[h] / (short_counts[a] * ow_hat[a]);
            }
        }
        fw_loop(model, config, &penalty)
    };

    let mut pool = AtomPool::default();
    let mut best_dual = f64::NEG_INFINITY;
    let mut lambda = vec![0.0; n];
    let mut last_inner: Option<PenalizedRun> = None;
    let mut total_inner_iterations = 0;

    for k in 1..=config.sos_max_dual_iters {
        let run = penalized_inner(&lambda)?;
        total_inner_iterations += run.iterations;
        for atom in &run.atoms {
            if pool.is_new(atom) {
                let av = atom_values(atom);
                pool.consider(atom, model.evaluate_values(&av)?, violation_of(&av));
            }
        }

        // Weak duality: for any lambda >= 0, the inner lower bound minus
        // the constant lambda'(1 + eps) never exceeds the constrained
        // optimum.
        best_dual = best_dual.max(run.lower_bound - dual_constant(&lambda, eps));

        // Surrogate subgradient at the inner *integral* minimizer. The
        // fractional iterate can mix violating extremes into a compliant
        // average, which would freeze lambda while every deliverable atom
        // stays infeasible; the atom's excess is the signal that matters.
        let ow = opponent_win_pct(
            model,
            pre_win_pct,
            &atom_values(&run.best_atom),
            &short_counts,
        );
        let mut max_violation: f64 = 0.0;
        let eta = 1.0 / (k as f64).sqrt();
        for &i in &active {
            let excess = (ow[i] - ow_hat[i]) / ow_hat[i] - eps;
            max_violation = max_violation.max(excess.max(0.0));
            lambda[i] = (lambda[i] + eta * excess).max(0.0);
        }
        last_inner = Some(run);
        if max_violation <= FEAS_TOL {
            break;
        }
    }

    // Escalation: the subgradient path only samples vertices that are
    // optimal for its particular multiplier trajectory. If none of them was
    // feasible, force constraint costs to dominate for the still-violating
    // teams; each boosted multiplier vector yields another valid dual bound.
    if !pool.has_feasible() {
        let mut boost = lambda.clone();
        for _ in 0..8 {
            let reference = atom_values(&pool.best_atom());
            let ow = opponent_win_pct(model, pre_win_pct, &reference, &short_counts);
            for &i in &active {
                if (ow[i] - ow_hat[i]) / ow_hat[i] - eps > FEAS_TOL {
                    boost[i] = (boost[i] * 4.0).max(1.0);
                }
            }
            let run = penalized_inner(&boost)?;
            total_inner_iterations += run.iterations;
            for atom in &run.atoms {
                if pool.is_new(atom) {
                    let av = atom_values(atom);
                    pool.consider(atom, model.evaluate_values(&av)?, violation_of(&av));
                }
            }
            best_dual = best_dual.max(run.lower_bound - dual_constant(&boost, eps));
            last_inner = Some(run);
            if pool.has_feasible() {
                break;
            }
        }
    }

    let run = last_inner.expect("at least one dual iteration runs");
    let (best_f, best_atom) = pool.into_best();
    let violation = violation_of(&atom_values(&best_atom));
    Ok(FwResult {
        best_atom: Schedule::integral(best_atom),
        fractional: Schedule::fractional(run.values)?,
        upper_bound: best_f,
        lower_bound: best_dual,
        abs_gap: best_f - best_dual,
        rel_gap: relative_gap(best_f, best_dual),
        iterations: total_inner_iterations,
        converged: run.converged,
        sos_violation: Some(violation),
        trace: run.trace,
    })
}

/// Constraint tolerance under which an atom counts as satisfying the
/// strength-of-schedule limits.
const FEAS_TOL: f64 = 1e-6;

/// `lambda'(1 + eps)`, skipping zero multipliers so an infinite `eps`
/// contributes nothing instead of NaN.
fn dual_constant(lambda: &[f64], eps: f64) -> f64 {
    lambda
        .iter()
        .map(|&l| if l > 0.0 { l * (1.0 + eps) } else { 0.0 })
        .sum()
}

/// Harvested-atom ranking for the constrained solve: a feasible atom always
/// beats an infeasible one; feasible atoms compare on objective, infeasible
/// ones on (violation, objective).
#[derive(Default)]
struct AtomPool {
    seen: HashSet<Vec<bool>>,
    best: Option<(bool, f64, f64, Vec<bool>)>, // (feasible, key, objective, atom)
}

impl AtomPool {
    fn is_new(&mut self, atom: &[bool]) -> bool {
        if self.seen.contains(atom) {
            false
        } else {
            self.seen.insert(atom.to_vec());
            true
        }
    }

    fn consider(&mut self, atom: &[bool], objective: f64, violation: f64) {
        let feasible = violation <= FEAS_TOL;
        let key = if feasible { objective } else { violation };
        let better = match &self.best {
            None => true,
            Some((bf, bk, bobj, _)) => match (feasible, *bf) {
                (true, false) => true,
                (false, true) => false,
                _ => key < *bk || (key == *bk && objective < *bobj),
            },
        };
        if better {
            self.best = Some((feasible, key, objective, atom.to_vec()));
        }
    }

    fn has_feasible(&self) -> bool {
        self.best.as_ref().is_some_and(|b| b.0)
    }

    fn best_atom(&self) -> Vec<bool> {
        self.best
            .as_ref()
            .map(|b| b.3.clone())
            .expect("every inner run harvests at least one atom")
    }

    fn into_best(self) -> (f64, Vec<bool>) {
        let (_, _, objective, atom) = self
            .best
            .expect("every inner run harvests at least one atom");
        (objective, atom)
    }
}
