//! Hedge a shortened-season schedule across several candidate probability
//! models instead of committing to one, and compare the worst-case regret of
//! each choice.
//!
//! ```text
//! cargo run --release --example min_max_regret
//! ```

use anyhow::Result;
use shortseason::fw::{self, FwConfig};
use shortseason::mmr::{solve_mmr, CandidateSet, MmrConfig};
use shortseason::synth::{league, SynthConfig};
use std::time::Instant;

/// Shift every probability on the log-odds scale (positive favors home).
fn logit_shift(probs: &[f64], delta: f64) -> Vec<f64> {
    probs
        .iter()
        .map(|&p| {
            let odds = (p / (1.0 - p)).ln() + delta;
            1.0 / (1.0 + (-odds).exp())
        })
        .collect()
}

/// Shrink every probability toward a coin flip by factor `kappa`.
fn shrink(probs: &[f64], kappa: f64) -> Vec<f64> {
    probs.iter().map(|&p| 0.5 + kappa * (p - 0.5)).collect()
}

fn main() -> Result<()> {
    let state = league(&SynthConfig::late_season_analogue(11))?;
    println!(
        "instance: {} teams, {} remaining games, m={} of m_hat={}",
        state.n_teams(),
        state.n_games(),
        state.m(),
        state.m_hat(),
    );

    // Three plausible stories about what happens after the suspension: the
    // fitted model holds, home advantage swells with a compressed calendar,
    // or pre-break form regresses toward a coin flip.
    let fitted = state.win_probs().to_vec();
    let candidates = vec![
        ("fitted".to_string(), fitted.clone()),
        ("home-heavy".to_string(), logit_shift(&fitted, 0.35)),
        ("regressed".to_string(), shrink(&fitted, 0.55)),
    ];

    let fw_config = FwConfig::default();
    let set = CandidateSet::build(&state, candidates, &fw_config)?;

    // Committing to one model means playing that model's own optimal
    // schedule; its exposure is the worst regret any rival model assigns it.
    println!("\ncommitting to a single model:");
    println!("  model        own bound      worst-case regret");
    let mut committed = Vec::new();
    for label in set.labels().to_vec() {
        let l = set.index_of(&label)?;
        let atom = fw::solve(set.model(l), &fw_config)?.best_atom;
        let worst = set
            .labels()
            .to_vec()
            .iter()
            .map(|other| set.regret(other, &atom))
            .collect::<shortseason::Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        println!("  {:<11}  {:<12.6e}   {:.6e}", label, set.theta(l), worst);
        committed.push((atom, worst));
    }

    let start = Instant::now();
    let result = solve_mmr(&set, &state, &MmrConfig::default())?;
    let elapsed = start.elapsed();

    println!("\nannealed smoothed descent (last iteration of each round):");
    println!("  round   tau        smoothed       exact max      lower bound");
    for window in result.trace.windows(2) {
        if window[0].round != window[1].round {
            let row = &window[0];
            println!(
                "  {:>5}   {:<8.1e}  {:<12.6e}   {:<12.6e}   {:.6e}",
                row.round, row.tau, row.smoothed, row.exact, row.lower_bound
            );
        }
    }
    if let Some(row) = result.trace.last() {
        println!(
            "  {:>5}   {:<8.1e}  {:<12.6e}   {:<12.6e}   {:.6e}",
            row.round, row.tau, row.smoothed, row.exact, row.lower_bound
        );
    }

    println!(
        "\nsolved in {elapsed:.2?}: {} iterations, converged = {}",
        result.iterations, result.converged
    );
    println!(
        "hedged schedule: {} of {} games, worst-case regret {:.6e}",
        result.best_atom.n_selected(),
        state.n_games(),
        result.max_regret
    );
    for (label, regret) in set.labels().iter().zip(&result.per_candidate_regrets) {
        println!("  regret vs {label:<11} {regret:.6e}");
    }
    println!(
        "certificates: lower bound {:.6e}, absolute gap {:.3e}",
        result.lower_bound, result.abs_gap
    );

    // The ensemble harvests every candidate's own optimal schedule along the
    // way, so its pick can never be worse than the best commitment.
    let best_commit = committed
        .iter()
        .map(|(_, w)| *w)
        .fold(f64::INFINITY, f64::min);
    println!(
        "\nhedging saves {:.1}% of the best single commitment's exposure",
        100.0 * (1.0 - result.max_regret / best_commit)
    );
    for (label, (atom, _)) in set.labels().iter().zip(&committed) {
        let differs = atom
            .selected()
            .iter()
            .zip(result.best_atom.selected())
            .filter(|(a, b)| a != b)
            .count();
        println!("  differs from {label}'s schedule on {differs} games");
    }

    Ok(())
}
