//! Deterministic random-number streams.
//!
//! Everything stochastic in this crate (scenario sampling, Monte Carlo
//! replications, cross-validation splits, restart schedules) draws from a
//! ChaCha stream derived from a user-supplied base seed plus a stream index.
//! Stream `k` is independent of stream `j != k`, so work can be re-ordered or
//! parallelized across indices without changing any result: replication `r`
//! always sees the same bits no matter which thread runs it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the RNG for stream `stream` of the generator seeded by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.into());
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible() {
        let mut ra = stream(42, 3);
        let mut rb = stream(42, 3);
        let a: Vec<u64> = (0..8).map(|_| ra.random()).collect();
        let b: Vec<u64> = (0..8).map(|_| rb.random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ_by_index_and_seed() {
        let base: u64 = stream(42, 0).random();
        assert_ne!(base, stream(42, 1).random::<u64>());
        assert_ne!(base, stream(43, 0).random::<u64>());
    }

    #[test]
    fn drawing_from_one_stream_does_not_disturb_another() {
        let mut r0 = stream(7, 0);
        for _ in 0..100 {
            let _: f64 = r0.random();
        }
        let fresh: u64 = stream(7, 1).random();
        let mut r1 = stream(7, 1);
        assert_eq!(fresh, r1.random::<u64>());
    }
}
