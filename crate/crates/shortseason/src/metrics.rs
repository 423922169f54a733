//! Similarity metrics between rankings (and between raw score vectors).
//!
//! The headline metric is the number of concordant pairs: team pairs ordered
//! the same way by both inputs. Ties count as neither concordant nor
//! discordant, which is why the score-vector variant exists — comparing
//! scores directly preserves genuine ties that a tie-broken ranking would
//! hide. Two rank-distance metrics (squared-Euclidean and Manhattan)
//! complete the suite; the inequalities connecting all three are exercised
//! in the tests and the acceptance suite.

use crate::error::{Error, Result};
use crate::league::{Ranking, ScoreVector};

/// Largest possible number of concordant pairs among `n` teams: `n(n-1)/2`.
pub fn max_concordant_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Number of pairs `(i, j)` ranked in the same order by `a` and `b`.
pub fn concordance(a: &Ranking, b: &Ranking) -> Result<usize> {
    check_len(a.len(), b.len())?;
    let mut count = 0usize;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let da = a.rank(i) as i64 - a.rank(j) as i64;
            let db = b.rank(i) as i64 - b.rank(j) as i64;
            if da * db > 0 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Number of pairs `(i, j)` ordered the same way by both score vectors.
/// Pairs tied in either vector are neither concordant nor discordant.
pub fn concordance_scores(a: &ScoreVector, b: &ScoreVector) -> Result<usize> {
    check_len(a.len(), b.len())?;
    let mut count = 0usize;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let oa = a.compare(i, j);
            let ob = b.compare(i, j);
            if oa != std::cmp::Ordering::Equal && oa == ob {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Squared-Euclidean rank distance `sum_i (a_i - b_i)^2`.
pub fn euclidean_distance(a: &Ranking, b: &Ranking) -> Result<u64> {
    check_len(a.len(), b.len())?;
    Ok((0..a.len())
        .map(|i| {
            let d = a.rank(i) as i64 - b.rank(i) as i64;
            (d * d) as u64
        })
        .sum())
}

/// Manhattan rank distance `sum_i |a_i - b_i|`.
pub fn manhattan_distance(a: &Ranking, b: &Ranking) -> Result<u64> {
    check_len(a.len(), b.len())?;
    Ok((0..a.len())
        .map(|i| a.rank(i).abs_diff(b.rank(i)) as u64)
        .sum())
}

/// Largest squared-Euclidean distance between two rankings of `n` teams:
/// `n(n^2 - 1)/3`, attained by a ranking and its reversal.
pub fn max_euclidean_distance(n: u64) -> u64 {
    n * (n * n - 1) / 3
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension { expected: a, got: b });
    }
    Ok(())
}
