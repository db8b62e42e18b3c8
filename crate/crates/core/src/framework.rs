//! The two reductions every sorter is built from: recover the full poset
//! from a linear extension ([`gps_from_le`]), and produce a linear extension
//! from any partition procedure ([`part_to_le`]).
//!
//! `gps_from_le` inserts vertices in extension order. For each prefix it
//! keeps a minimum chain cover of the already-known order (maintained
//! incrementally through a bipartite matcher) and locates, per chain, the
//! boundary of the relation pattern toward the new vertex by binary search.
//! Along an ascending chain that pattern is a Less-prefix, then an
//! Incomparable block, then a Greater-suffix; under a valid extension the
//! Greater-suffix is empty, so any Greater answer is reported as
//! [`Error::InconsistentExtension`]. Binary searches run over the
//! subsequence of chain positions that have a query-graph edge to the new
//! vertex (monotone patterns survive subsequencing); edge-free positions get
//! their relation from the closure, which the prefix property makes exact.

use crate::matching::BitMatcher;
use crate::bitset::BitSet;
use crate::oracle::{OracleSession, RelOracle, Relation, SessionView};
use crate::poset::{LinearExtension, Poset};
use crate::{Error, Result};
use rand::prelude::*;

/// Three-way split of a vertex set around a pivot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartitionResult {
    /// Elements below the pivot.
    pub less: Vec<u32>,
    /// Elements incomparable to the pivot.
    pub incomparable: Vec<u32>,
    /// Elements above the pivot.
    pub greater: Vec<u32>,
}

impl PartitionResult {
    /// Sanity check: the three parts plus the pivot partition `members`.
    pub fn is_partition_of(&self, members: &[u32], pivot: u32) -> bool {
        let mut all: Vec<u32> = self
            .less
            .iter()
            .chain(&self.incomparable)
            .chain(&self.greater)
            .copied()
            .chain(std::iter::once(pivot))
            .collect();
        all.sort_unstable();
        let mut want = members.to_vec();
        want.sort_unstable();
        all == want
    }
}

/// A partition procedure usable by [`part_to_le`]: given an induced view and
/// a pivot inside it, split the remaining members into less / incomparable /
/// greater.
pub trait PartitionOracle {
    fn partition(&mut self, view: &mut SessionView<'_, '_>, pivot: u32) -> Result<PartitionResult>;
}

/// Exact partition by querying the pivot against every other member; needs
/// the complete graph on the view (n - 1 queries).
pub fn naive_partition(view: &mut SessionView<'_, '_>, pivot: u32) -> Result<PartitionResult> {
    let mut out = PartitionResult::default();
    for v in view.verts() {
        if v == pivot {
            continue;
        }
        match view.query(v, pivot)? {
            Relation::Less => out.less.push(v),
            Relation::Incomparable => out.incomparable.push(v),
            Relation::Greater => out.greater.push(v),
        }
    }
    Ok(out)
}

/// [`PartitionOracle`] wrapper around [`naive_partition`].
#[derive(Clone, Copy, Debug, Default)]
pub struct NaivePartition;

impl PartitionOracle for NaivePartition {
    fn partition(&mut self, view: &mut SessionView<'_, '_>, pivot: u32) -> Result<PartitionResult> {
        naive_partition(view, pivot)
    }
}

/// Divide-and-conquer linear extension: pick a uniformly random pivot,
/// partition, and concatenate extension(L) ‖ pivot ‖ extension(M) ‖
/// extension(R). Any relation crossing the blocks is compatible with that
/// order, so the result is a linear extension whenever the partition
/// procedure is exact.
pub fn part_to_le<P: PartitionOracle, R: Rng>(
    session: &mut OracleSession<'_>,
    partition: &mut P,
    rng: &mut R,
) -> Result<LinearExtension> {
    let all: Vec<u32> = (0..session.graph().n() as u32).collect();
    let mut out = Vec::with_capacity(all.len());
    recurse(session, &all, partition, rng, &mut out)?;
    Ok(LinearExtension::new(out))
}

fn recurse<P: PartitionOracle, R: Rng>(
    session: &mut OracleSession<'_>,
    members: &[u32],
    partition: &mut P,
    rng: &mut R,
    out: &mut Vec<u32>,
) -> Result<()> {
    if members.is_empty() {
        return Ok(());
    }
    if members.len() == 1 {
        out.push(members[0]);
        return Ok(());
    }
    let pivot = *members.choose(rng).expect("nonempty");
    let parts = {
        let mut view = session.induced_session(members);
        partition.partition(&mut view, pivot)?
    };
    debug_assert!(parts.is_partition_of(members, pivot));
    recurse(session, &parts.less, partition, rng, out)?;
    out.push(pivot);
    recurse(session, &parts.incomparable, partition, rng, out)?;
    recurse(session, &parts.greater, partition, rng, out)?;
    Ok(())
}

/// Per-insertion record of the chain-edge subsequences binary searches ran
/// over, for structural audits.
#[derive(Clone, Debug)]
pub struct InsertionStep {
    pub vertex: u32,
    /// For each chain of the prefix cover: the members with an edge to
    /// `vertex`, in ascending chain order.
    pub edge_sequences: Vec<Vec<u32>>,
}

/// Recover the whole poset from a linear extension of it.
pub fn gps_from_le(session: &mut OracleSession<'_>, le: &LinearExtension) -> Result<Poset> {
    gps_from_le_traced(session, le, None)
}

/// [`gps_from_le`] that optionally records the per-insertion search inputs.
pub fn gps_from_le_traced(
    session: &mut OracleSession<'_>,
    le: &LinearExtension,
    mut trace: Option<&mut Vec<InsertionStep>>,
) -> Result<Poset> {
    let n = session.graph().n();
    let order = le.order();
    if order.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: order.len(),
        });
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v as usize >= n || seen[v as usize] {
            return Err(Error::InvalidParams(format!("not a permutation at {v}")));
        }
        seen[v as usize] = true;
    }

    // Closure of the known order over the inserted prefix, as up/down rows,
    // plus a chain cover of it kept current by incremental matching.
    let mut down: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
    let mut up: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
    let mut matcher = BitMatcher::new(n, n);
    let mut inserted: Vec<u32> = Vec::with_capacity(n);

    for &w in order {
        let chains = matcher.chains(inserted.iter().copied());
        let mut down_w = BitSet::new(n);
        let mut step = trace.as_ref().map(|_| InsertionStep {
            vertex: w,
            edge_sequences: Vec::new(),
        });
        for chain in &chains {
            let seq: Vec<u32> = chain
                .iter()
                .copied()
                .filter(|&x| session.graph().has_edge(x, w))
                .collect();
            if let Some(s) = step.as_mut() {
                s.edge_sequences.push(seq.clone());
            }
            if seq.is_empty() {
                continue;
            }
            // Less-prefix boundary: first position whose answer is not Less.
            let mut lo = 0usize;
            let mut hi = seq.len();
            while lo < hi {
                let mid = (lo + hi) / 2;
                match session.query(seq[mid], w)? {
                    Relation::Less => lo = mid + 1,
                    Relation::Incomparable => hi = mid,
                    Relation::Greater => {
                        return Err(Error::InconsistentExtension { u: seq[mid], v: w })
                    }
                }
            }
            let prefix_len = lo;
            // Greater-suffix boundary: first position answering Greater.
            // Under a valid extension the search must fall off the end.
            let mut lo2 = prefix_len;
            let hi2 = seq.len();
            while lo2 < hi2 {
                let mid = (lo2 + hi2) / 2;
                match session.query(seq[mid], w)? {
                    Relation::Greater => {
                        return Err(Error::InconsistentExtension { u: seq[mid], v: w })
                    }
                    _ => lo2 = mid + 1,
                }
            }
            if prefix_len > 0 {
                let b = seq[prefix_len - 1] as usize;
                down_w.union_with(&down[b]);
                down_w.insert(b);
            }
        }
        for x in down_w.iter() {
            up[x].insert(w as usize);
        }
        matcher.add_right_and_augment(w, &down_w);
        down[w as usize] = down_w;
        inserted.push(w);
        if let (Some(t), Some(s)) = (trace.as_deref_mut(), step) {
            t.push(s);
        }
    }
    Ok(Poset::from_up_rows(n, &up))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{er_query_graph, random_poset};
    use crate::oracle::QueryGraph;
    use crate::poset::{is_linear_extension, transitive_closure, Dag, Rel};
    use rand_chacha::ChaCha8Rng;

    fn le_of(poset: &Poset) -> LinearExtension {
        LinearExtension::new(poset.transitive_reduction().topo_order().unwrap())
    }

    #[test]
    fn naive_partition_of_total_order_minimum() {
        let p = transitive_closure(&Dag::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap()).unwrap();
        let g = er_query_graph(&p, 1.0, 0).unwrap();
        let mut s = OracleSession::new(&g);
        let mut view = s.view();
        let parts = naive_partition(&mut view, 0).unwrap();
        assert_eq!(parts, PartitionResult {
            less: vec![],
            incomparable: vec![],
            greater: vec![1, 2, 3],
        });
    }

    #[test]
    fn naive_partition_of_antichain() {
        let p = transitive_closure(&Dag::new(4, []).unwrap()).unwrap();
        let g = er_query_graph(&p, 1.0, 0).unwrap();
        let mut s = OracleSession::new(&g);
        let mut view = s.view();
        let parts = naive_partition(&mut view, 2).unwrap();
        assert_eq!(parts.incomparable, vec![0, 1, 3]);
        assert!(parts.less.is_empty() && parts.greater.is_empty());
    }

    #[test]
    fn naive_partition_matches_truth_split() {
        let p = random_poset(10, 3, 5).unwrap();
        let g = er_query_graph(&p, 1.0, 5).unwrap();
        let mut s = OracleSession::new(&g);
        let mut view = s.view();
        let parts = naive_partition(&mut view, 4).unwrap();
        assert_eq!(parts.less, p.down_set(4));
        assert_eq!(parts.greater, p.up_set(4));
        assert_eq!(s.report().query_count, 9);
    }

    #[test]
    fn part_to_le_empty_and_singleton() {
        let empty = transitive_closure(&Dag::new(0, []).unwrap()).unwrap();
        let g = QueryGraph::new([], None, empty).unwrap();
        let mut s = OracleSession::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let le = part_to_le(&mut s, &mut NaivePartition, &mut rng).unwrap();
        assert!(le.is_empty());

        let one = transitive_closure(&Dag::new(1, []).unwrap()).unwrap();
        let g1 = QueryGraph::new([], None, one).unwrap();
        let mut s1 = OracleSession::new(&g1);
        let le1 = part_to_le(&mut s1, &mut NaivePartition, &mut rng).unwrap();
        assert_eq!(le1.order(), [0]);
    }

    #[test]
    fn part_to_le_on_complete_graph_is_valid() {
        let p = random_poset(20, 4, 9).unwrap();
        let g = er_query_graph(&p, 1.0, 9).unwrap();
        let mut s = OracleSession::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let le = part_to_le(&mut s, &mut NaivePartition, &mut rng).unwrap();
        assert!(is_linear_extension(&le, &p).unwrap());
    }

    #[test]
    fn gps_recovers_small_total_order() {
        let p = transitive_closure(&Dag::new(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let g = er_query_graph(&p, 1.0, 0).unwrap();
        let mut s = OracleSession::new(&g);
        let got = gps_from_le(&mut s, &LinearExtension::new(vec![0, 1, 2])).unwrap();
        assert_eq!(got, p);
        assert!(s.report().query_count <= 6, "at most 3 per insertion");
    }

    #[test]
    fn gps_recovers_antichain_without_orientations() {
        let p = transitive_closure(&Dag::new(6, []).unwrap()).unwrap();
        let g = er_query_graph(&p, 0.5, 3).unwrap();
        let mut s = OracleSession::new(&g);
        let got = gps_from_le(&mut s, &LinearExtension::new((0..6).collect())).unwrap();
        assert_eq!(got, p);
    }

    #[test]
    fn gps_recovers_er_instance_exactly() {
        let p = random_poset(50, 3, 21).unwrap();
        let g = er_query_graph(&p, 0.2, 22).unwrap();
        let mut s = OracleSession::new(&g);
        let got = gps_from_le(&mut s, &le_of(&p)).unwrap();
        assert_eq!(got, p);
    }

    #[test]
    fn gps_rejects_wrong_extension() {
        let p = transitive_closure(&Dag::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap()).unwrap();
        let g = er_query_graph(&p, 1.0, 0).unwrap();
        let mut s = OracleSession::new(&g);
        let bad = LinearExtension::new(vec![3, 0, 1, 2]);
        assert!(matches!(
            gps_from_le(&mut s, &bad),
            Err(Error::InconsistentExtension { .. })
        ));
    }

    #[test]
    fn insertion_sequences_are_monotone_against_truth() {
        let p = random_poset(30, 4, 77).unwrap();
        let g = er_query_graph(&p, 0.3, 78).unwrap();
        let mut s = OracleSession::new(&g);
        let mut steps = Vec::new();
        let got = gps_from_le_traced(&mut s, &le_of(&p), Some(&mut steps)).unwrap();
        assert_eq!(got, p);
        assert_eq!(steps.len(), 30);
        for step in &steps {
            for seq in &step.edge_sequences {
                // Relation pattern along each searched subsequence must be a
                // Less-prefix then Incomparable; Greater never appears since
                // insertion follows a linear extension.
                let rels: Vec<Rel> = seq.iter().map(|&x| p.rel(x, step.vertex)).collect();
                assert!(!rels.contains(&Rel::Greater));
                let first_non_less = rels.iter().position(|&r| r != Rel::Less).unwrap_or(rels.len());
                assert!(
                    rels[first_non_less..].iter().all(|&r| r == Rel::Incomparable),
                    "vertex {}: pattern {:?}",
                    step.vertex,
                    rels
                );
            }
        }
    }

    #[test]
    fn gps_query_count_stays_logarithmic_per_chain() {
        let p = random_poset(100, 3, 4).unwrap();
        let g = er_query_graph(&p, 0.2, 4).unwrap();
        let mut s = OracleSession::new(&g);
        gps_from_le(&mut s, &le_of(&p)).unwrap();
        let n = 100f64;
        let bound = (4.0 * n * 3.0 * n.log2()).ceil() as usize;
        assert!(
            s.report().query_count <= bound,
            "{} > {}",
            s.report().query_count,
            bound
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn part_to_le_always_valid_on_complete_graphs(
                n in 1usize..16,
                seed in any::<u64>(),
            ) {
                let k = 1 + (seed as usize) % n;
                let p = random_poset(n, k, seed).unwrap();
                let g = er_query_graph(&p, 1.0, seed).unwrap();
                let mut s = OracleSession::new(&g);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
                let le = part_to_le(&mut s, &mut NaivePartition, &mut rng).unwrap();
                prop_assert!(is_linear_extension(&le, &p).unwrap());
            }

            #[test]
            fn gps_from_le_recovers_exactly(
                n in 1usize..16,
                p_edge in 0.0f64..1.0,
                seed in any::<u64>(),
            ) {
                let k = 1 + (seed as usize) % n;
                let poset = random_poset(n, k, seed).unwrap();
                let g = er_query_graph(&poset, p_edge, seed).unwrap();
                let mut s = OracleSession::new(&g);
                let le = le_of(&poset);
                prop_assert_eq!(gps_from_le(&mut s, &le).unwrap(), poset);
            }
        }
    }
}
