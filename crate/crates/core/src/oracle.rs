//! Metered comparison oracle over a restricted query graph.
//!
//! A [`QueryGraph`] couples an edge set (optionally weighted) with the hidden
//! ground-truth poset. An [`OracleSession`] answers relation queries for graph
//! edges only, counting each distinct edge once and charging its weight; a
//! [`SessionView`] restricts a session to an induced subgraph and/or a weight
//! cap while all metering flows to the parent. Algorithms are written against
//! the [`RelOracle`] trait so the [`Flipped`] adapter can reuse them on the
//! reversed order.

use crate::bitset::BitSet;
use crate::poset::{transitive_closure, Dag, Poset, Rel};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Answer to a relation query on an edge (u, v).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Less,
    Greater,
    Incomparable,
}

impl Relation {
    pub fn flip(self) -> Relation {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Greater => Relation::Less,
            Relation::Incomparable => Relation::Incomparable,
        }
    }
}

/// Undirected query graph plus the ground truth it is allowed to reveal.
///
/// Edges are stored normalized (`u < v`) and sorted; an `n × n` index table
/// gives O(1) edge lookup at desk scale.
#[derive(Clone, Debug)]
pub struct QueryGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    weights: Option<Vec<f64>>,
    ground_truth: Poset,
    edge_index: Vec<u32>,
    adj: Vec<Vec<u32>>,
}

const NO_EDGE: u32 = u32::MAX;

impl QueryGraph {
    pub fn new(
        edges: impl IntoIterator<Item = (u32, u32)>,
        weights: Option<Vec<f64>>,
        ground_truth: Poset,
    ) -> Result<Self> {
        let n = ground_truth.n();
        let mut norm: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        let keep_weights = match &weights {
            Some(w) => {
                if w.len() != norm.len() {
                    return Err(Error::LengthMismatch {
                        expected: norm.len(),
                        got: w.len(),
                    });
                }
                if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
                    return Err(Error::InvalidParams("weights must be finite and >= 0".into()));
                }
                // Re-sort weights alongside their (normalized) edges.
                let mut pairs: Vec<((u32, u32), f64)> =
                    norm.iter().copied().zip(w.iter().copied()).collect();
                pairs.sort_by_key(|&(e, _)| e);
                pairs.dedup_by_key(|&mut (e, _)| e);
                norm = pairs.iter().map(|&(e, _)| e).collect();
                Some(pairs.into_iter().map(|(_, w)| w).collect())
            }
            None => {
                norm.sort_unstable();
                norm.dedup();
                None
            }
        };
        let mut edge_index = vec![NO_EDGE; n * n];
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in norm.iter().enumerate() {
            if u == v || v as usize >= n {
                return Err(Error::InvalidParams(format!(
                    "edge ({u}, {v}) invalid for n = {n}"
                )));
            }
            edge_index[u as usize * n + v as usize] = i as u32;
            edge_index[v as usize * n + u as usize] = i as u32;
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Ok(QueryGraph {
            n,
            edges: norm,
            weights: keep_weights,
            ground_truth,
            edge_index,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn ground_truth(&self) -> &Poset {
        &self.ground_truth
    }

    fn edge_id(&self, u: u32, v: u32) -> Option<usize> {
        if u as usize >= self.n || v as usize >= self.n || u == v {
            return None;
        }
        match self.edge_index[u as usize * self.n + v as usize] {
            NO_EDGE => None,
            i => Some(i as usize),
        }
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Edge weight; unweighted graphs charge 1 per edge.
    pub fn weight(&self, u: u32, v: u32) -> Option<f64> {
        self.edge_id(u, v)
            .map(|i| self.weights.as_ref().map_or(1.0, |w| w[i]))
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    /// Sorted distinct weight values w_1 < … < w_W (`[1.0]` if unweighted).
    pub fn weight_values(&self) -> Vec<f64> {
        match &self.weights {
            None => vec![1.0],
            Some(w) => {
                let mut vals = w.clone();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                vals.dedup();
                vals
            }
        }
    }

    /// Checks that the edge set determines the order: the closure of the
    /// truth-oriented edge set must equal the ground truth itself.
    pub fn audit_determining(&self) -> Result<()> {
        let mut oriented = Vec::new();
        for &(u, v) in &self.edges {
            match self.ground_truth.rel(u, v) {
                Rel::Less => oriented.push((u, v)),
                Rel::Greater => oriented.push((v, u)),
                Rel::Incomparable => {}
                Rel::Equal => unreachable!("no self edges"),
            }
        }
        let closed = transitive_closure(&Dag::new(self.n, oriented)?)?;
        if closed != self.ground_truth {
            return Err(Error::Unsatisfiable(
                "oriented edge closure does not reproduce the ground truth".into(),
            ));
        }
        Ok(())
    }
}

/// Counter snapshot from [`OracleSession::report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub query_count: usize,
    pub cost: f64,
}

/// Query-answering session with distinct-edge metering.
///
/// Repeat queries of an edge (in either direction) answer from cache without
/// re-charging. With a budget set, a query whose charge would push `cost`
/// past the budget fails with [`Error::BudgetExceeded`] before answering.
pub struct OracleSession<'g> {
    graph: &'g QueryGraph,
    answered: Vec<bool>,
    query_count: usize,
    cost: f64,
    budget: Option<f64>,
}

/// Absolute slack for budget comparisons, so summing many equal weights never
/// trips the check through float rounding alone.
const BUDGET_SLACK: f64 = 1e-9;

impl<'g> OracleSession<'g> {
    pub fn new(graph: &'g QueryGraph) -> Self {
        OracleSession {
            graph,
            answered: vec![false; graph.edge_count()],
            query_count: 0,
            cost: 0.0,
            budget: None,
        }
    }

    pub fn with_budget(graph: &'g QueryGraph, budget: f64) -> Self {
        let mut s = OracleSession::new(graph);
        s.budget = Some(budget);
        s
    }

    pub fn graph(&self) -> &'g QueryGraph {
        self.graph
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn set_budget(&mut self, budget: Option<f64>) {
        self.budget = budget;
    }

    pub fn report(&self) -> OracleReport {
        OracleReport {
            query_count: self.query_count,
            cost: self.cost,
        }
    }

    pub fn query(&mut self, u: u32, v: u32) -> Result<Relation> {
        let id = self
            .graph
            .edge_id(u, v)
            .ok_or(Error::NotAnEdge { u, v })?;
        if !self.answered[id] {
            let w = self.graph.weights.as_ref().map_or(1.0, |ws| ws[id]);
            if let Some(b) = self.budget {
                if self.cost + w > b + BUDGET_SLACK {
                    return Err(Error::BudgetExceeded);
                }
            }
            self.answered[id] = true;
            self.query_count += 1;
            self.cost += w;
        }
        Ok(match self.graph.ground_truth.rel(u, v) {
            Rel::Less => Relation::Less,
            Rel::Greater => Relation::Greater,
            Rel::Incomparable => Relation::Incomparable,
            Rel::Equal => unreachable!("no self edges"),
        })
    }

    /// View over the whole vertex set (identity subgraph).
    pub fn view(&mut self) -> SessionView<'_, 'g> {
        let n = self.graph.n();
        let mut members = BitSet::new(n);
        for v in 0..n {
            members.insert(v);
        }
        SessionView {
            session: self,
            members,
            weight_cap: None,
        }
    }

    /// View of the induced subgraph on `subset`; metering stays on `self`.
    pub fn induced_session(&mut self, subset: &[u32]) -> SessionView<'_, 'g> {
        let mut members = BitSet::new(self.graph.n());
        for &v in subset {
            members.insert(v as usize);
        }
        SessionView {
            session: self,
            members,
            weight_cap: None,
        }
    }
}

/// Relation-query interface shared by sessions, induced views, and the
/// [`Flipped`] adapter; algorithms are generic over it.
pub trait RelOracle {
    /// Size of the ambient vertex-id space (not the member count).
    fn n(&self) -> usize;
    fn contains(&self, v: u32) -> bool;
    /// Member vertices, ascending.
    fn verts(&self) -> Vec<u32>;
    fn has_edge(&self, u: u32, v: u32) -> bool;
    /// Member neighbors of `v` through visible edges, ascending.
    fn neighbors(&self, v: u32) -> Vec<u32>;
    fn weight(&self, u: u32, v: u32) -> Option<f64>;
    fn query(&mut self, u: u32, v: u32) -> Result<Relation>;
}

impl<O: RelOracle + ?Sized> RelOracle for &mut O {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn contains(&self, v: u32) -> bool {
        (**self).contains(v)
    }
    fn verts(&self) -> Vec<u32> {
        (**self).verts()
    }
    fn has_edge(&self, u: u32, v: u32) -> bool {
        (**self).has_edge(u, v)
    }
    fn neighbors(&self, v: u32) -> Vec<u32> {
        (**self).neighbors(v)
    }
    fn weight(&self, u: u32, v: u32) -> Option<f64> {
        (**self).weight(u, v)
    }
    fn query(&mut self, u: u32, v: u32) -> Result<Relation> {
        (**self).query(u, v)
    }
}

/// Induced-subgraph (and optionally weight-capped) window onto a session.
pub struct SessionView<'s, 'g> {
    session: &'s mut OracleSession<'g>,
    members: BitSet,
    weight_cap: Option<f64>,
}

impl<'s, 'g> SessionView<'s, 'g> {
    /// Narrow to a further subset; metering still reaches the root session.
    pub fn induced(&mut self, subset: &[u32]) -> SessionView<'_, 'g> {
        let mut members = BitSet::new(self.session.graph.n());
        for &v in subset {
            debug_assert!(self.members.contains(v as usize), "subset must shrink the view");
            members.insert(v as usize);
        }
        SessionView {
            session: &mut *self.session,
            members,
            weight_cap: self.weight_cap,
        }
    }

    /// Hide all edges heavier than `cap`.
    pub fn with_weight_cap(mut self, cap: Option<f64>) -> Self {
        self.weight_cap = cap;
        self
    }

    pub fn report(&self) -> OracleReport {
        self.session.report()
    }

    fn visible(&self, u: u32, v: u32) -> bool {
        if !self.members.contains(u as usize) || !self.members.contains(v as usize) {
            return false;
        }
        match (self.session.graph.weight(u, v), self.weight_cap) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(w), Some(cap)) => w <= cap + BUDGET_SLACK,
        }
    }
}

impl RelOracle for SessionView<'_, '_> {
    fn n(&self) -> usize {
        self.session.graph.n()
    }

    fn contains(&self, v: u32) -> bool {
        self.members.contains(v as usize)
    }

    fn verts(&self) -> Vec<u32> {
        self.members.iter().map(|v| v as u32).collect()
    }

    fn has_edge(&self, u: u32, v: u32) -> bool {
        self.visible(u, v)
    }

    fn neighbors(&self, v: u32) -> Vec<u32> {
        if !self.members.contains(v as usize) {
            return Vec::new();
        }
        self.session
            .graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| self.visible(v, u))
            .collect()
    }

    fn weight(&self, u: u32, v: u32) -> Option<f64> {
        if self.visible(u, v) {
            self.session.graph.weight(u, v)
        } else {
            None
        }
    }

    fn query(&mut self, u: u32, v: u32) -> Result<Relation> {
        if !self.visible(u, v) {
            return Err(Error::NotAnEdge { u, v });
        }
        self.session.query(u, v)
    }
}

/// Order-reversing adapter: answers are flipped, everything else passes
/// through. Running an algorithm on `Flipped(view)` computes its result for
/// the dual poset.
pub struct Flipped<O>(pub O);

impl<O: RelOracle> RelOracle for Flipped<O> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn contains(&self, v: u32) -> bool {
        self.0.contains(v)
    }
    fn verts(&self) -> Vec<u32> {
        self.0.verts()
    }
    fn has_edge(&self, u: u32, v: u32) -> bool {
        self.0.has_edge(u, v)
    }
    fn neighbors(&self, v: u32) -> Vec<u32> {
        self.0.neighbors(v)
    }
    fn weight(&self, u: u32, v: u32) -> Option<f64> {
        self.0.weight(u, v)
    }
    fn query(&mut self, u: u32, v: u32) -> Result<Relation> {
        Ok(self.0.query(u, v)?.flip())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::transitive_closure;

    fn total_order_graph(n: usize) -> QueryGraph {
        let truth =
            transitive_closure(&Dag::new(n, (0..n as u32 - 1).map(|i| (i, i + 1))).unwrap())
                .unwrap();
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        QueryGraph::new(edges, None, truth).unwrap()
    }

    #[test]
    fn total_order_query_is_less() {
        let g = total_order_graph(4);
        let mut s = OracleSession::new(&g);
        assert_eq!(s.query(0, 1).unwrap(), Relation::Less);
        assert_eq!(s.query(3, 0).unwrap(), Relation::Greater);
    }

    #[test]
    fn reverse_query_hits_cache() {
        let g = total_order_graph(4);
        let mut s = OracleSession::new(&g);
        s.query(0, 1).unwrap();
        assert_eq!(s.query(1, 0).unwrap(), Relation::Greater);
        assert_eq!(s.report().query_count, 1);
    }

    #[test]
    fn full_scan_recovers_truth_on_edges() {
        let g = total_order_graph(6);
        let mut s = OracleSession::new(&g);
        for &(u, v) in g.edges() {
            let ans = s.query(u, v).unwrap();
            let want = match g.ground_truth().rel(u, v) {
                Rel::Less => Relation::Less,
                Rel::Greater => Relation::Greater,
                _ => Relation::Incomparable,
            };
            assert_eq!(ans, want);
        }
        assert_eq!(s.report().query_count, g.edge_count());
    }

    #[test]
    fn not_an_edge_is_reported() {
        let truth = transitive_closure(&Dag::new(3, [(0, 1)]).unwrap()).unwrap();
        let g = QueryGraph::new([(0, 1)], None, truth).unwrap();
        let mut s = OracleSession::new(&g);
        assert_eq!(s.query(1, 2), Err(Error::NotAnEdge { u: 1, v: 2 }));
    }

    #[test]
    fn fresh_report_is_zero() {
        let g = total_order_graph(3);
        let s = OracleSession::new(&g);
        assert_eq!(
            s.report(),
            OracleReport {
                query_count: 0,
                cost: 0.0
            }
        );
    }

    #[test]
    fn unit_weight_cost_counts_queries() {
        let g = total_order_graph(4);
        let mut s = OracleSession::new(&g);
        s.query(0, 1).unwrap();
        s.query(1, 2).unwrap();
        s.query(2, 3).unwrap();
        assert_eq!(
            s.report(),
            OracleReport {
                query_count: 3,
                cost: 3.0
            }
        );
    }

    #[test]
    fn weighted_cost_sums_charged_weights() {
        let truth =
            transitive_closure(&Dag::new(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let g = QueryGraph::new(
            [(0, 1), (1, 2), (0, 2)],
            Some(vec![0.25, 2.0, 8.0]),
            truth,
        )
        .unwrap();
        let mut s = OracleSession::new(&g);
        s.query(0, 1).unwrap();
        s.query(1, 2).unwrap();
        s.query(1, 0).unwrap();
        let r = s.report();
        assert_eq!(r.query_count, 2);
        assert!((r.cost - 2.25).abs() < 1e-12);
    }

    #[test]
    fn budget_blocks_before_charging() {
        let g = total_order_graph(4);
        let mut s = OracleSession::with_budget(&g, 2.0);
        s.query(0, 1).unwrap();
        s.query(1, 2).unwrap();
        assert_eq!(s.query(2, 3), Err(Error::BudgetExceeded));
        assert_eq!(s.report().query_count, 2);
        assert_eq!(s.query(1, 0).unwrap(), Relation::Greater, "cached answers stay free");
    }

    #[test]
    fn induced_full_subset_keeps_all_edges() {
        let g = total_order_graph(5);
        let mut s = OracleSession::new(&g);
        let all: Vec<u32> = (0..5).collect();
        let view = s.induced_session(&all);
        let mut seen = 0;
        for u in 0..5 {
            for v in u + 1..5 {
                if view.has_edge(u, v) {
                    seen += 1;
                }
            }
        }
        assert_eq!(seen, g.edge_count());
    }

    #[test]
    fn singleton_view_has_no_edges() {
        let g = total_order_graph(5);
        let mut s = OracleSession::new(&g);
        let view = s.induced_session(&[2]);
        assert!(view.neighbors(2).is_empty());
    }

    #[test]
    fn induced_view_matches_set_filter() {
        let g = total_order_graph(7);
        let subset = [0u32, 2, 3, 6];
        let inset = |v: u32| subset.contains(&v);
        let mut s = OracleSession::new(&g);
        let view = s.induced_session(&subset);
        for &(u, v) in g.edges() {
            assert_eq!(view.has_edge(u, v), inset(u) && inset(v));
        }
        assert_eq!(view.verts(), subset);
    }

    #[test]
    fn view_metering_reaches_parent() {
        let g = total_order_graph(5);
        let mut s = OracleSession::new(&g);
        {
            let mut view = s.induced_session(&[1, 2, 4]);
            view.query(1, 2).unwrap();
            let mut inner = view.induced(&[2, 4]);
            inner.query(2, 4).unwrap();
            assert_eq!(inner.query(0, 1), Err(Error::NotAnEdge { u: 0, v: 1 }));
        }
        assert_eq!(s.report().query_count, 2);
    }

    #[test]
    fn weight_cap_hides_heavy_edges() {
        let truth =
            transitive_closure(&Dag::new(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let g = QueryGraph::new(
            [(0, 1), (1, 2), (0, 2)],
            Some(vec![1.0, 4.0, 4.0]),
            truth,
        )
        .unwrap();
        let mut s = OracleSession::new(&g);
        let mut view = s.view().with_weight_cap(Some(1.0));
        assert!(view.has_edge(0, 1));
        assert!(!view.has_edge(1, 2));
        assert_eq!(view.neighbors(0), vec![1]);
        assert_eq!(view.query(1, 2), Err(Error::NotAnEdge { u: 1, v: 2 }));
    }

    #[test]
    fn flipped_adapter_reverses_answers() {
        let g = total_order_graph(3);
        let mut s = OracleSession::new(&g);
        let mut flipped = Flipped(s.view());
        assert_eq!(flipped.query(0, 1).unwrap(), Relation::Greater);
        assert_eq!(flipped.query(0, 2).unwrap(), Relation::Greater);
        assert_eq!(s.report().query_count, 2);
    }

    #[test]
    fn determining_audit_detects_undetermined_truth() {
        let truth = transitive_closure(&Dag::new(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let good = QueryGraph::new([(0, 1), (1, 2)], None, truth.clone()).unwrap();
        good.audit_determining().unwrap();
        let bad = QueryGraph::new([(0, 1), (0, 2)], None, truth).unwrap();
        assert!(matches!(bad.audit_determining(), Err(Error::Unsatisfiable(_))));
    }
}
