//! Vertex-skipping BFS partition for sparse random query graphs.
//!
//! [`skip_bfs`] explores the hidden down-set of a pivot level by level. Every
//! vertex starts with a budget of R = k + ⌈multiplier · ln N⌉ health points;
//! whenever an explored vertex finds a same-level in-neighbor, that
//! neighbor loses a point, and vertices at zero are skipped (their outgoing
//! exploration is provably redundant with high probability). Levels are
//! processed in a uniformly random order, which is what makes the counter
//! argument work. The reverse direction reuses the same code through the
//! [`Flipped`] adapter, and [`partition_er`] combines both passes with the
//! complement to produce a three-way partition.

use crate::framework::{PartitionOracle, PartitionResult};
use crate::oracle::{Flipped, RelOracle, Relation, SessionView};
use crate::Result;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Tunables for [`skip_bfs`].
#[derive(Clone, Copy, Debug)]
pub struct SkipBfsConfig {
    /// Multiplier on ln N in the skip threshold R = k + ⌈multiplier · ln N⌉.
    pub ln_multiplier: f64,
}

impl Default for SkipBfsConfig {
    fn default() -> Self {
        SkipBfsConfig { ln_multiplier: 18.0 }
    }
}

impl SkipBfsConfig {
    pub fn threshold(&self, k: usize, n_total: usize) -> u32 {
        let ln_n = (n_total.max(2) as f64).ln();
        k as u32 + (self.ln_multiplier * ln_n).ceil() as u32
    }
}

/// What happened to one frontier vertex when its turn came.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceAction {
    Explored,
    Skipped,
}

/// One line of the reveal trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub level: usize,
    pub vertex: u32,
    pub action: TraceAction,
    pub counter: u32,
}

/// Everything a [`skip_bfs`] run discovered.
#[derive(Clone, Debug)]
pub struct SkipBfsRun {
    /// All vertices placed below the pivot, ascending.
    pub result: Vec<u32>,
    /// Level sets: levels[0] is the pivot, levels[ℓ] the vertices first
    /// reached after ℓ steps.
    pub levels: Vec<Vec<u32>>,
    /// Per-vertex processing record in execution order.
    pub trace: Vec<TraceEvent>,
}

/// Estimate the down-set of `pivot` by level-by-level exploration with
/// vertex skipping. `k` is the width bound and `n_total` the size of the
/// original instance (the threshold stays fixed under recursion on induced
/// subgraphs). The answer is exact with high probability on random query
/// graphs; callers audit it externally.
pub fn skip_bfs<O: RelOracle, R: Rng>(
    oracle: &mut O,
    pivot: u32,
    k: usize,
    n_total: usize,
    cfg: &SkipBfsConfig,
    rng: &mut R,
) -> Result<SkipBfsRun> {
    let n = oracle.n();
    let threshold = cfg.threshold(k, n_total);
    let mut counter = vec![threshold; n];
    // level_of[v]: assigned level + 1, 0 meaning unassigned.
    let mut level_of = vec![0usize; n];
    level_of[pivot as usize] = 1;
    let mut levels: Vec<Vec<u32>> = vec![vec![pivot]];
    let mut trace = Vec::new();

    let mut depth = 0usize;
    while depth < levels.len() {
        let mut frontier = levels[depth].clone();
        frontier.shuffle(rng);
        let mut next: Vec<u32> = Vec::new();
        for v in frontier {
            let c = counter[v as usize];
            if c == 0 {
                trace.push(TraceEvent {
                    level: depth,
                    vertex: v,
                    action: TraceAction::Skipped,
                    counter: 0,
                });
                continue;
            }
            trace.push(TraceEvent {
                level: depth,
                vertex: v,
                action: TraceAction::Explored,
                counter: c,
            });
            for u in oracle.neighbors(v) {
                // Only vertices not settled into an earlier level.
                let lu = level_of[u as usize];
                if lu != 0 && lu <= depth {
                    continue;
                }
                if oracle.query(v, u)? == Relation::Greater {
                    // u sits below v, hence below the pivot.
                    if lu == depth + 1 {
                        counter[u as usize] = counter[u as usize].saturating_sub(1);
                    } else if lu == 0 {
                        level_of[u as usize] = depth + 2;
                        next.push(u);
                    }
                }
            }
        }
        if !next.is_empty() {
            levels.push(next);
        }
        depth += 1;
    }

    let mut result: Vec<u32> = levels[1..].iter().flatten().copied().collect();
    result.sort_unstable();
    Ok(SkipBfsRun {
        result,
        levels,
        trace,
    })
}

/// Ground-truth BFS levels of the pivot's down-set in the oriented query
/// graph (edges pointing from smaller to larger element, walked backwards
/// from the pivot). Test-side reference for level-fidelity audits.
pub fn oriented_bfs_levels(graph: &crate::oracle::QueryGraph, pivot: u32) -> Vec<Vec<u32>> {
    let truth = graph.ground_truth();
    let mut level_of = vec![0usize; graph.n()];
    level_of[pivot as usize] = 1;
    let mut levels = vec![vec![pivot]];
    let mut depth = 0;
    while depth < levels.len() {
        let mut next = Vec::new();
        for &v in &levels[depth] {
            for &u in graph.neighbors(v) {
                if level_of[u as usize] == 0 && truth.less(u, v) {
                    level_of[u as usize] = depth + 2;
                    next.push(u);
                }
            }
        }
        if !next.is_empty() {
            levels.push(next);
        }
        depth += 1;
    }
    for lvl in &mut levels {
        lvl.sort_unstable();
    }
    levels
}

/// Three-way partition around `pivot`: one skipping BFS per direction, the
/// incomparable set as the complement.
pub fn partition_er<O: RelOracle, R: Rng>(
    oracle: &mut O,
    pivot: u32,
    k: usize,
    n_total: usize,
    cfg: &SkipBfsConfig,
    rng: &mut R,
) -> Result<PartitionResult> {
    Ok(partition_er_traced(oracle, pivot, k, n_total, cfg, rng)?.0)
}

/// [`partition_er`] plus the number of skip events across both passes.
pub fn partition_er_traced<O: RelOracle, R: Rng>(
    oracle: &mut O,
    pivot: u32,
    k: usize,
    n_total: usize,
    cfg: &SkipBfsConfig,
    rng: &mut R,
) -> Result<(PartitionResult, usize)> {
    let below = skip_bfs(oracle, pivot, k, n_total, cfg, rng)?;
    let above = skip_bfs(&mut Flipped(&mut *oracle), pivot, k, n_total, cfg, rng)?;
    let skipped = below
        .trace
        .iter()
        .chain(&above.trace)
        .filter(|e| e.action == TraceAction::Skipped)
        .count();
    let (less, greater) = (below.result, above.result);
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
    Ok((
        PartitionResult {
            less,
            incomparable,
            greater,
        },
        skipped,
    ))
}

/// [`PartitionOracle`] running [`partition_er`] with its own seeded
/// randomness; `n_total` and the threshold stay fixed across recursion.
#[derive(Clone, Debug)]
pub struct ErPartition {
    pub k: usize,
    pub n_total: usize,
    pub cfg: SkipBfsConfig,
    rng: ChaCha8Rng,
    skipped_events: usize,
}

impl ErPartition {
    pub fn new(k: usize, n_total: usize, cfg: SkipBfsConfig, seed: u64) -> Self {
        ErPartition {
            k,
            n_total,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            skipped_events: 0,
        }
    }

    /// Skip events accumulated over every partition call so far.
    pub fn skipped_events(&self) -> usize {
        self.skipped_events
    }
}

impl PartitionOracle for ErPartition {
    fn partition(&mut self, view: &mut SessionView<'_, '_>, pivot: u32) -> Result<PartitionResult> {
        let (parts, skipped) =
            partition_er_traced(view, pivot, self.k, self.n_total, &self.cfg, &mut self.rng)?;
        self.skipped_events += skipped;
        Ok(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{er_query_graph, random_poset};
    use crate::oracle::OracleSession;
    use crate::poset::{transitive_closure, Dag};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn maximum_of_total_order_sees_everything() {
        let p = transitive_closure(&Dag::new(6, (0..5).map(|i| (i, i + 1))).unwrap()).unwrap();
        let g = er_query_graph(&p, 1.0, 0).unwrap();
        let mut s = OracleSession::new(&g);
        let run = skip_bfs(&mut s.view(), 5, 1, 6, &SkipBfsConfig::default(), &mut rng(1)).unwrap();
        assert_eq!(run.result, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn minimal_pivot_sees_nothing() {
        let p = random_poset(12, 2, 8).unwrap();
        let g = er_query_graph(&p, 0.5, 8).unwrap();
        let minimal = (0..12u32).find(|&v| p.down_set(v).is_empty()).unwrap();
        let mut s = OracleSession::new(&g);
        let run =
            skip_bfs(&mut s.view(), minimal, 2, 12, &SkipBfsConfig::default(), &mut rng(2)).unwrap();
        assert!(run.result.is_empty());
        assert_eq!(run.levels, vec![vec![minimal]]);
    }

    #[test]
    fn skip_bfs_recovers_down_set() {
        let p = random_poset(100, 3, 11).unwrap();
        let g = er_query_graph(&p, 0.2, 11).unwrap();
        let mut s = OracleSession::new(&g);
        for pivot in [0u32, 17, 55, 99] {
            let run =
                skip_bfs(&mut s.view(), pivot, 3, 100, &SkipBfsConfig::default(), &mut rng(3))
                    .unwrap();
            assert_eq!(run.result, p.down_set(pivot), "pivot {pivot}");
        }
    }

    #[test]
    fn levels_match_true_bfs() {
        let p = random_poset(80, 3, 13).unwrap();
        let g = er_query_graph(&p, 0.2, 13).unwrap();
        let mut s = OracleSession::new(&g);
        for pivot in [5u32, 40, 79] {
            let mut run =
                skip_bfs(&mut s.view(), pivot, 3, 80, &SkipBfsConfig::default(), &mut rng(4))
                    .unwrap();
            for lvl in &mut run.levels {
                lvl.sort_unstable();
            }
            assert_eq!(run.levels, oriented_bfs_levels(&g, pivot), "pivot {pivot}");
        }
    }

    #[test]
    fn partition_of_antichain_is_all_incomparable() {
        let p = transitive_closure(&Dag::new(8, []).unwrap()).unwrap();
        let g = er_query_graph(&p, 0.4, 5).unwrap();
        let mut s = OracleSession::new(&g);
        let parts =
            partition_er(&mut s.view(), 3, 8, 8, &SkipBfsConfig::default(), &mut rng(5)).unwrap();
        assert!(parts.less.is_empty() && parts.greater.is_empty());
        assert_eq!(parts.incomparable, vec![0, 1, 2, 4, 5, 6, 7]);
    }

    #[test]
    fn total_order_median_splits_by_rank() {
        let p = transitive_closure(&Dag::new(9, (0..8).map(|i| (i, i + 1))).unwrap()).unwrap();
        let g = er_query_graph(&p, 1.0, 6).unwrap();
        let mut s = OracleSession::new(&g);
        let parts =
            partition_er(&mut s.view(), 4, 1, 9, &SkipBfsConfig::default(), &mut rng(6)).unwrap();
        assert_eq!(parts.less, vec![0, 1, 2, 3]);
        assert_eq!(parts.greater, vec![5, 6, 7, 8]);
        assert!(parts.incomparable.is_empty());
    }

    #[test]
    fn partition_matches_truth_three_way_split() {
        let p = random_poset(100, 3, 11).unwrap();
        let g = er_query_graph(&p, 0.2, 11).unwrap();
        let mut s = OracleSession::new(&g);
        let pivot = 42;
        let parts =
            partition_er(&mut s.view(), pivot, 3, 100, &SkipBfsConfig::default(), &mut rng(7))
                .unwrap();
        assert_eq!(parts.less, p.down_set(pivot));
        assert_eq!(parts.greater, p.up_set(pivot));
        let all: Vec<u32> = (0..100).collect();
        assert!(parts.is_partition_of(&all, pivot));
    }

    #[test]
    fn skips_only_fire_after_enough_same_level_hits() {
        // A tiny threshold forces skips; every skip must be justified by at
        // least R strictly-greater same-level vertices explored beforehand.
        let p = random_poset(60, 1, 17).unwrap();
        let g = er_query_graph(&p, 1.0, 17).unwrap();
        let truth = g.ground_truth();
        let top = *p.total_order_sequence().unwrap().last().unwrap();
        let mut s = OracleSession::new(&g);
        let cfg = SkipBfsConfig { ln_multiplier: 0.0 };
        let run = skip_bfs(&mut s.view(), top, 1, 60, &cfg, &mut rng(8)).unwrap();
        let threshold = cfg.threshold(1, 60);
        let mut skips = 0;
        for (i, ev) in run.trace.iter().enumerate() {
            if ev.action != TraceAction::Skipped {
                continue;
            }
            skips += 1;
            let hits = run.trace[..i]
                .iter()
                .filter(|e| {
                    e.action == TraceAction::Explored
                        && e.level == ev.level
                        && truth.less(ev.vertex, e.vertex)
                        && g.has_edge(ev.vertex, e.vertex)
                })
                .count();
            assert!(
                hits >= threshold as usize,
                "vertex {} skipped after only {hits} hits",
                ev.vertex
            );
        }
        assert!(skips > 0, "tiny threshold should force skips");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn partition_is_exact_at_default_threshold(
                n in 4usize..40,
                p_edge in 0.2f64..1.0,
                seed in any::<u64>(),
            ) {
                let k = 1 + (seed as usize) % 4.min(n);
                let poset = random_poset(n, k, seed).unwrap();
                let g = er_query_graph(&poset, p_edge, seed).unwrap();
                let mut s = OracleSession::new(&g);
                let pivot = (seed % n as u64) as u32;
                let parts = partition_er(
                    &mut s.view(),
                    pivot,
                    k,
                    n,
                    &SkipBfsConfig::default(),
                    &mut ChaCha8Rng::seed_from_u64(seed),
                )
                .unwrap();
                prop_assert_eq!(parts.less, poset.down_set(pivot));
                prop_assert_eq!(parts.greater, poset.up_set(pivot));
            }
        }
    }
}
