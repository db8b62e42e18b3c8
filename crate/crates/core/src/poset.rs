//! Ground-truth poset and DAG machinery: transitive closure and reduction,
//! width, chain decomposition, path cover, and linear-extension checking.
//!
//! Minimum chain covers are computed through maximum bipartite matching on
//! the comparability relation (the standard Dilworth construction), with ties
//! broken toward the lowest vertex id so decompositions are deterministic.

use crate::bitset::BitSet;
use crate::matching::BitMatcher;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A directed acyclic graph on vertices `0..n`.
///
/// Acyclicity is a usage invariant rather than a construction check: the
/// operations that need it ([`transitive_closure`] and friends) verify it and
/// report [`Error::CyclicInput`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Dag {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut edges: Vec<(u32, u32)> = edges.into_iter().collect();
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParams(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Dag { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
        }
        adj
    }

    /// Kahn topological order; `CyclicInput` if some vertex never drains.
    pub fn topo_order(&self) -> Result<Vec<u32>> {
        let adj = self.adjacency();
        let mut indeg = vec![0usize; self.n];
        for &(_, v) in &self.edges {
            indeg[v as usize] += 1;
        }
        let mut queue: Vec<u32> = (0..self.n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(u) = queue.pop() {
            order.push(u);
            for &v in &adj[u as usize] {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    queue.push(v);
                }
            }
        }
        if order.len() != self.n {
            return Err(Error::CyclicInput);
        }
        Ok(order)
    }
}

/// Relation of an ordered vertex pair inside a [`Poset`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    Less,
    Greater,
    Incomparable,
    /// Diagonal entries only.
    Equal,
}

/// A finite partial order stored as a dense relation matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    rel: Vec<Rel>,
}

impl std::fmt::Debug for Poset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Poset(n={}, reduction={:?})", self.n, self.transitive_reduction().edges())
    }
}

impl Poset {
    #[inline]
    fn idx(&self, u: u32, v: u32) -> usize {
        u as usize * self.n + v as usize
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn rel(&self, u: u32, v: u32) -> Rel {
        self.rel[self.idx(u, v)]
    }

    #[inline]
    pub fn less(&self, u: u32, v: u32) -> bool {
        self.rel(u, v) == Rel::Less
    }

    #[inline]
    pub fn comparable(&self, u: u32, v: u32) -> bool {
        matches!(self.rel(u, v), Rel::Less | Rel::Greater)
    }

    /// Build from per-vertex reachability rows: `up[u]` holds every v with u ≺ v.
    pub(crate) fn from_up_rows(n: usize, up: &[BitSet]) -> Self {
        let mut rel = vec![Rel::Incomparable; n * n];
        for u in 0..n {
            rel[u * n + u] = Rel::Equal;
            for v in up[u].iter() {
                rel[u * n + v] = Rel::Less;
                rel[v * n + u] = Rel::Greater;
            }
        }
        Poset { n, rel }
    }

    pub(crate) fn up_rows(&self) -> Vec<BitSet> {
        let mut rows = vec![BitSet::new(self.n); self.n];
        for u in 0..self.n as u32 {
            for v in 0..self.n as u32 {
                if self.less(u, v) {
                    rows[u as usize].insert(v as usize);
                }
            }
        }
        rows
    }

    pub fn down_set(&self, v: u32) -> Vec<u32> {
        (0..self.n as u32).filter(|&u| self.less(u, v)).collect()
    }

    pub fn up_set(&self, v: u32) -> Vec<u32> {
        (0..self.n as u32).filter(|&u| self.less(v, u)).collect()
    }

    /// Size of the maximum antichain, as n minus a maximum matching on the
    /// comparability relation (equivalently, the minimum chain cover size).
    pub fn width(&self) -> usize {
        if self.n == 0 {
            return 0;
        }
        self.n - self.comparability_matcher().solve()
    }

    /// A minimum chain cover; the number of chains equals [`Poset::width`].
    pub fn chain_decomposition(&self) -> ChainDecomposition {
        let mut m = self.comparability_matcher();
        m.solve();
        ChainDecomposition {
            chains: m.chains(0..self.n as u32),
        }
    }

    fn comparability_matcher(&self) -> BitMatcher {
        let mut m = BitMatcher::new(self.n, self.n);
        for u in 0..self.n as u32 {
            for v in 0..self.n as u32 {
                if self.less(u, v) {
                    m.add_pair(u, v);
                }
            }
        }
        m
    }

    /// The unique minimal DAG with this poset as its closure (cover pairs).
    pub fn transitive_reduction(&self) -> Dag {
        let up = self.up_rows();
        let mut down = vec![BitSet::new(self.n); self.n];
        for u in 0..self.n {
            for v in up[u].iter() {
                down[v].insert(u);
            }
        }
        let mut edges = Vec::new();
        for u in 0..self.n as u32 {
            for v in up[u as usize].iter() {
                if !up[u as usize].intersects(&down[v]) {
                    edges.push((u, v as u32));
                }
            }
        }
        Dag { n: self.n, edges }
    }

    /// For width-1 posets, the vertices in ascending order.
    pub fn total_order_sequence(&self) -> Option<Vec<u32>> {
        let mut order: Vec<u32> = (0..self.n as u32).collect();
        order.sort_by_key(|&v| self.down_set(v).len());
        for w in order.windows(2) {
            if !self.less(w[0], w[1]) {
                return None;
            }
        }
        Some(order)
    }
}

/// A partition of the vertex set into chains, each listed ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainDecomposition {
    chains: Vec<Vec<u32>>,
}

impl ChainDecomposition {
    pub fn new(chains: Vec<Vec<u32>>) -> Self {
        ChainDecomposition { chains }
    }

    pub fn chains(&self) -> &[Vec<u32>] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// A permutation of the vertices in which no later element precedes an
/// earlier one; validated against a poset by [`is_linear_extension`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearExtension {
    order: Vec<u32>,
}

impl LinearExtension {
    pub fn new(order: Vec<u32>) -> Self {
        LinearExtension { order }
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Reachability closure of a DAG as a poset: u ≺ v iff u reaches v.
pub fn transitive_closure(dag: &Dag) -> Result<Poset> {
    let order = dag.topo_order()?;
    let adj = dag.adjacency();
    let mut up = vec![BitSet::new(dag.n); dag.n];
    for &u in order.iter().rev() {
        // Split borrows: take u's row out, fold successors in, put it back.
        let mut row = std::mem::replace(&mut up[u as usize], BitSet::new(0));
        for &v in &adj[u as usize] {
            row.insert(v as usize);
            row.union_with(&up[v as usize]);
        }
        up[u as usize] = row;
    }
    Ok(Poset::from_up_rows(dag.n, &up))
}

/// Minimal DAG with the same closure as the input.
pub fn transitive_reduction(dag: &Dag) -> Result<Dag> {
    Ok(transitive_closure(dag)?.transitive_reduction())
}

/// Cover of all vertices by directed paths of the DAG, one path per chain of
/// a minimum chain cover of the closure. Consecutive chain elements are
/// joined by a shortest DAG path, so paths may share interior vertices; the
/// path count equals the width of the closure.
pub fn path_cover(dag: &Dag) -> Result<Vec<Vec<u32>>> {
    let closure = transitive_closure(dag)?;
    let adj = dag.adjacency();
    let mut paths = Vec::new();
    for chain in closure.chain_decomposition().chains {
        let mut path = vec![chain[0]];
        for pair in chain.windows(2) {
            let hop = shortest_dag_path(&adj, pair[0], pair[1]);
            path.extend_from_slice(&hop[1..]);
        }
        paths.push(path);
    }
    Ok(paths)
}

fn shortest_dag_path(adj: &[Vec<u32>], from: u32, to: u32) -> Vec<u32> {
    let mut parent: Vec<Option<u32>> = vec![None; adj.len()];
    let mut frontier = vec![from];
    'bfs: while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &adj[u as usize] {
                if v != from && parent[v as usize].is_none() {
                    parent[v as usize] = Some(u);
                    if v == to {
                        break 'bfs;
                    }
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[cur as usize].expect("closure pair must be DAG-reachable");
        path.push(cur);
    }
    path.reverse();
    path
}

/// True iff `le` never places a greater element before a smaller one.
pub fn is_linear_extension(le: &LinearExtension, poset: &Poset) -> Result<bool> {
    let order = le.order();
    if order.len() != poset.n() {
        return Err(Error::LengthMismatch {
            expected: poset.n(),
            got: order.len(),
        });
    }
    let mut seen = vec![false; poset.n()];
    for &v in order {
        if v as usize >= poset.n() || seen[v as usize] {
            return Err(Error::InvalidParams(format!("not a permutation at {v}")));
        }
        seen[v as usize] = true;
    }
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if poset.rel(order[i], order[j]) == Rel::Greater {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
