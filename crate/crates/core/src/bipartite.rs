//! Exact partition for complete bipartite query graphs.
//!
//! [`find_min`] walks a random descending path: starting from a random
//! A-side vertex it repeatedly draws a random unseen vertex from the side
//! opposite the current candidate and moves to it when it is smaller. Every
//! opposite-side vertex is consumed, which makes the returned vertex minimal
//! in the induced order on the two working sets, always (Las Vegas, not just
//! with high probability). [`find_large`] recovers everything above a pivot
//! by repeatedly extracting minimal vertices of the remaining unexplained
//! up-set; [`partition_bipartite`] runs it in both directions (the downward
//! pass through the relation-negating [`Flipped`] adapter) and takes the
//! complement for the incomparable part.

use crate::framework::{PartitionOracle, PartitionResult};
use crate::oracle::{Flipped, RelOracle, Relation, SessionView};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Counters from one [`find_large`] run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FindLargeStats {
    /// How many times the inner minimal-vertex search ran.
    pub find_min_calls: usize,
}

/// Return a vertex of `a_active` ∪ `b_active` that is minimal in the induced
/// order, consuming at most |A′| + |B′| queries. The search starts on the A
/// side; when the result lies on the B side, some A′ vertex is known to sit
/// above it (the candidate it displaced).
pub fn find_min<O: RelOracle, R: Rng>(
    oracle: &mut O,
    a_active: &[u32],
    b_active: &[u32],
    rng: &mut R,
) -> Result<u32> {
    find_min_traced(oracle, a_active, b_active, rng).map(|(best, _)| best)
}

/// [`find_min`] plus the sequence of successive best candidates it held,
/// starting pivot first and final answer last. The trail is the statistic
/// the descending-walk analysis bounds, so audits read it directly.
pub fn find_min_traced<O: RelOracle, R: Rng>(
    oracle: &mut O,
    a_active: &[u32],
    b_active: &[u32],
    rng: &mut R,
) -> Result<(u32, Vec<u32>)> {
    if a_active.is_empty() {
        return Err(Error::EmptyInput);
    }
    let start = rng.gen_range(0..a_active.len());
    let mut best = a_active[start];
    let mut best_on_a = true;
    let mut trail = vec![best];
    let mut pool_a: Vec<u32> = a_active
        .iter()
        .copied()
        .filter(|&v| v != best)
        .collect();
    let mut pool_b: Vec<u32> = b_active.to_vec();
    loop {
        let pool = if best_on_a { &mut pool_b } else { &mut pool_a };
        if pool.is_empty() {
            return Ok((best, trail));
        }
        let u = pool.swap_remove(rng.gen_range(0..pool.len()));
        if oracle.query(u, best)? == Relation::Less {
            best = u;
            best_on_a = !best_on_a;
            trail.push(best);
        }
    }
}

/// Everything strictly above `pivot` (which must sit on the edge-free side
/// of every member it has no edge to, i.e. sides are read off the edge
/// pattern). Exact on every run.
pub fn find_large<O: RelOracle, R: Rng>(
    oracle: &mut O,
    pivot: u32,
    rng: &mut R,
) -> Result<Vec<u32>> {
    Ok(find_large_with_stats(oracle, pivot, rng)?.0)
}

pub fn find_large_with_stats<O: RelOracle, R: Rng>(
    oracle: &mut O,
    pivot: u32,
    rng: &mut R,
) -> Result<(Vec<u32>, FindLargeStats)> {
    // In a complete bipartite graph the pivot's side is exactly the set of
    // members it has no edge to.
    let a_side = oracle.neighbors(pivot);
    let b_side: Vec<u32> = {
        let mut on_a = vec![false; oracle.n()];
        for &a in &a_side {
            on_a[a as usize] = true;
        }
        oracle
            .verts()
            .into_iter()
            .filter(|&v| v != pivot && !on_a[v as usize])
            .collect()
    };

    // Direct queries give the A-side up-set of the pivot.
    let mut a_up = Vec::new();
    for &a in &a_side {
        if oracle.query(a, pivot)? == Relation::Greater {
            a_up.push(a);
        }
    }

    let mut stats = FindLargeStats::default();
    let mut remaining = a_up.clone();
    let mut b_found: Vec<u32> = Vec::new();
    let mut in_b_found = vec![false; oracle.n()];
    while !remaining.is_empty() {
        stats.find_min_calls += 1;
        let v = find_min(oracle, &remaining, &b_found, rng)?;
        if let Some(pos) = remaining.iter().position(|&x| x == v) {
            // Minimal vertex on the A side: it explains its own B-side
            // up-set, then leaves the working set.
            remaining.swap_remove(pos);
            for &b in &b_side {
                if !in_b_found[b as usize] && oracle.query(b, v)? == Relation::Greater {
                    in_b_found[b as usize] = true;
                    b_found.push(b);
                }
            }
        } else {
            // Minimal vertex already explained on the B side: everything
            // above it on the A side is explained too. The displaced
            // candidate guarantees at least one removal.
            remaining.retain_mut_result(|&mut a| {
                Ok(oracle.query(a, v)? != Relation::Greater)
            })?;
        }
    }
    let mut out = a_up;
    out.extend(b_found);
    out.sort_unstable();
    Ok((out, stats))
}

/// `Vec::retain` with a fallible predicate.
trait RetainResult<T> {
    fn retain_mut_result<F: FnMut(&mut T) -> Result<bool>>(&mut self, f: F) -> Result<()>;
}

impl<T> RetainResult<T> for Vec<T> {
    fn retain_mut_result<F: FnMut(&mut T) -> Result<bool>>(&mut self, mut f: F) -> Result<()> {
        let mut err = None;
        self.retain_mut(|x| match f(x) {
            Ok(keep) => keep,
            Err(e) => {
                if err.is_none() {
                    err = Some(e);
                }
                true
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Exact three-way partition around `pivot` on a complete bipartite view.
pub fn partition_bipartite<O: RelOracle, R: Rng>(
    oracle: &mut O,
    pivot: u32,
    rng: &mut R,
) -> Result<PartitionResult> {
    let greater = find_large(oracle, pivot, rng)?;
    let less = find_large(&mut Flipped(&mut *oracle), pivot, rng)?;
    let mut placed = vec![false; oracle.n()];
    placed[pivot as usize] = true;
    for &v in less.iter().chain(&greater) {
        placed[v as usize] = true;
    }
    let incomparable = oracle
        .verts()
        .into_iter()
        .filter(|&v| !placed[v as usize])
        .collect();
    Ok(PartitionResult {
        less,
        incomparable,
        greater,
    })
}

/// [`PartitionOracle`] wrapper with its own seeded randomness.
#[derive(Clone, Debug)]
pub struct BipartitePartition {
    rng: ChaCha8Rng,
    find_min_calls: usize,
}

impl BipartitePartition {
    pub fn new(seed: u64) -> Self {
        BipartitePartition {
            rng: ChaCha8Rng::seed_from_u64(seed),
            find_min_calls: 0,
        }
    }

    /// Minimal-vertex searches accumulated over every partition call so far.
    pub fn find_min_calls(&self) -> usize {
        self.find_min_calls
    }
}

impl PartitionOracle for BipartitePartition {
    fn partition(&mut self, view: &mut SessionView<'_, '_>, pivot: u32) -> Result<PartitionResult> {
        let (greater, up_stats) = find_large_with_stats(view, pivot, &mut self.rng)?;
        let (less, down_stats) =
            find_large_with_stats(&mut Flipped(&mut *view), pivot, &mut self.rng)?;
        self.find_min_calls += up_stats.find_min_calls + down_stats.find_min_calls;
        let mut placed = vec![false; view.n()];
        placed[pivot as usize] = true;
        for &v in less.iter().chain(&greater) {
            placed[v as usize] = true;
        }
        let incomparable = view
            .verts()
            .into_iter()
            .filter(|&v| !placed[v as usize])
            .collect();
        Ok(PartitionResult {
            less,
            incomparable,
            greater,
        })
    }
}
