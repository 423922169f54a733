//! Temporary probe: plain FW convergence trace on a 30-team league.
use shortseason::fw::{self, FwConfig};
use shortseason::objective::PwObjectiveModel;
use shortseason::synth;
use std::time::Instant;

fn main() {
    for seed in [42u64, 43, 44] {
        let state = synth::league(&synth::SynthConfig::day100_analogue(seed)).unwrap();
        let model = PwObjectiveModel::new(&state);
        let t = Instant::now();
        let r = fw::solve(&model, &FwConfig::default()).unwrap();
        println!(
            "seed {seed}: {:?} iters={} converged={} f*={:.9} lb={:.9} rel_gap={:.3e}",
            t.elapsed(), r.iterations, r.converged, r.upper_bound, r.lower_bound, r.rel_gap
        );
        for want in [25usize, 50, 100, 200, 300, 400, 500] {
            if let Some(row) = r.trace.iter().find(|row| row.iteration == want) {
                println!(
                    "  it {:3}: atom_f={:.9} lb={:.9} rel_gap={:.3e} step={:.2e}",
                    row.iteration, row.atom_objective, row.lower_bound, row.rel_gap, row.step
                );
            }
        }
        let best = r.upper_bound;
        let hit = r.trace.iter().find(|row| row.atom_objective <= best + 1e-15);
        println!("  best atom first found at iteration {:?}", hit.map(|row| row.iteration));
    }
}
