//! End-to-end solvers: a model-specific partition oracle drives the
//! pivot recursion to a linear extension, and the insertion pass lifts the
//! extension to the full poset.

use crate::bipartite::BipartitePartition;
use crate::er::{ErPartition, SkipBfsConfig};
use crate::framework::{gps_from_le, part_to_le, NaivePartition, PartitionOracle};
use crate::instance::mix_seed;
use crate::oracle::OracleSession;
use crate::poset::Poset;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solve_with<P: PartitionOracle>(
    session: &mut OracleSession<'_>,
    partition: &mut P,
    seed: u64,
) -> Result<Poset> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x9e37));
    let le = part_to_le(session, partition, &mut rng)?;
    gps_from_le(session, &le)
}

/// Recover the poset behind an Erdős–Rényi style query graph of known
/// width `k`. Returns the recovered poset and the number of skip events.
pub fn solve_er(
    session: &mut OracleSession<'_>,
    k: usize,
    cfg: &SkipBfsConfig,
    seed: u64,
) -> Result<(Poset, usize)> {
    let n = session.graph().n();
    let mut partition = ErPartition::new(k, n, cfg.clone(), mix_seed(seed, 1));
    let poset = solve_with(session, &mut partition, mix_seed(seed, 2))?;
    Ok((poset, partition.skipped_events()))
}

/// Width-oblivious variant: the width guess doubles until two consecutive
/// guesses recover posets of the same width. Queries from early rounds stay
/// cached, so over-paying is bounded by the final round.
pub fn solve_er_unknown_k(
    session: &mut OracleSession<'_>,
    cfg: &SkipBfsConfig,
    seed: u64,
) -> Result<Poset> {
    let n = session.graph().n();
    let mut guess = 1usize;
    let mut previous: Option<(usize, Poset)> = None;
    let mut round = 0u64;
    loop {
        round += 1;
        match solve_er(session, guess, cfg, mix_seed(seed, round)) {
            Ok((poset, _)) => {
                if guess >= n {
                    // The skip threshold covers every vertex, so no skip can
                    // fire and the recursion is plain exhaustive BFS.
                    return Ok(poset);
                }
                let width = poset.width();
                if let Some((prev_width, prev)) = previous.take() {
                    if prev_width == width {
                        return Ok(prev);
                    }
                }
                previous = Some((width, poset));
            }
            // An under-guessed threshold can leave the linear extension
            // inconsistent; that only means the guess must grow.
            Err(Error::InconsistentExtension { .. }) if guess < n => {
                previous = None;
            }
            Err(e) => return Err(e),
        }
        guess *= 2;
    }
}

/// Recover the poset behind a complete bipartite query graph. Returns the
/// recovered poset and the number of minimal-vertex searches.
pub fn solve_bipartite(session: &mut OracleSession<'_>, seed: u64) -> Result<(Poset, usize)> {
    let mut partition = BipartitePartition::new(mix_seed(seed, 1));
    let poset = solve_with(session, &mut partition, mix_seed(seed, 2))?;
    Ok((poset, partition.find_min_calls()))
}

/// Baseline for complete query graphs: every partition queries the pivot
/// against everything visible.
pub fn solve_naive(session: &mut OracleSession<'_>, seed: u64) -> Result<Poset> {
    let mut partition = NaivePartition;
    solve_with(session, &mut partition, seed)
}
