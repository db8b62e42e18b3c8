//! Total-order recovery when queries have heterogeneous edge weights.
//!
//! The cost model charges each queried edge its weight once, so the goal is
//! competitiveness against `OPT`, the cheapest certificate of the order. The
//! pipeline guesses `OPT` by doubling: [`find_threshold`] picks a weight
//! class boundary, [`gpsc_sort`] recovers everything provable from edges at
//! or below it, and [`sort_chains`] merges the resulting chains with
//! level-doubling probes, all under a hard query budget. A round that runs
//! out of budget or finds no usable threshold reports failure and the
//! estimate doubles.

use crate::gpsc::{gpsc_sort, GpscConfig};
use crate::oracle::{OracleSession, RelOracle, Relation};
use crate::poset::{transitive_closure, Dag, LinearExtension};
use crate::{bitset::BitSet, Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tuning knobs for the budgeted weighted sort.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedConfig {
    /// Constant in the per-round budget `C n^(1 - 1/(2W)) ln^e(n) * est`.
    pub budget_constant: f64,
    /// Exponent `e` of the polylog factor in the budget.
    pub polylog_exp: i32,
    pub gpsc: GpscConfig,
}

impl Default for WeightedConfig {
    fn default() -> Self {
        WeightedConfig {
            budget_constant: 8.0,
            polylog_exp: 3,
            gpsc: GpscConfig::default(),
        }
    }
}

/// Weight-class cutoff for the cheap phase, 1-based into the sorted distinct
/// positive weights. Either the largest class is already negligible against
/// the estimate, or the first sufficiently large multiplicative gap below
/// the estimate's reach is used; without either there is no usable cutoff.
pub fn find_threshold(weights: &[f64], n: usize, opt_est: f64) -> Result<usize> {
    let w_count = weights.len();
    if w_count == 0 {
        return Err(Error::InvalidParams(
            "find_threshold needs at least one positive weight".into(),
        ));
    }
    if weights.windows(2).any(|w| w[0] >= w[1]) || weights[0] <= 0.0 {
        return Err(Error::InvalidParams(
            "weights must be positive, distinct and ascending".into(),
        ));
    }
    let nf = (n.max(2)) as f64;
    let reach = nf.powf(-1.0 / (2.0 * w_count as f64) - 0.5) * opt_est;
    if weights[w_count - 1] <= reach {
        return Ok(w_count);
    }
    let first_over = weights.iter().position(|&w| w > reach).unwrap() + 1;
    let gap = nf.powf(-1.0 / (2.0 * w_count as f64));
    for tau in (1..first_over).rev() {
        if weights[tau - 1] / weights[tau] <= gap {
            return Ok(tau);
        }
    }
    Err(Error::NoFeasibleThreshold)
}

/// Probe levels and resolved in-neighbourhoods for [`sort_chains`].
pub struct ChainSortState {
    chains: Vec<Vec<u32>>,
    levels: Vec<i32>,
    known_in: Vec<BitSet>,
}

impl ChainSortState {
    /// Start every level one doubling below the cheapest positive edge.
    pub fn new<O: RelOracle>(oracle: &O, chains: &[Vec<u32>]) -> Self {
        let n = oracle.n();
        let mut min_w = f64::INFINITY;
        for v in oracle.verts() {
            for u in oracle.neighbors(v) {
                if u < v {
                    if let Some(w) = oracle.weight(u, v) {
                        if w > 0.0 {
                            min_w = min_w.min(w);
                        }
                    }
                }
            }
        }
        if !min_w.is_finite() {
            min_w = 1.0;
        }
        let level0 = min_w.log2().ceil() as i32 - 1;
        ChainSortState {
            chains: chains.to_vec(),
            levels: vec![level0; n],
            known_in: vec![BitSet::new(n); n],
        }
    }

    pub fn level(&self, v: u32) -> i32 {
        self.levels[v as usize]
    }

    /// Raise `u` one level and resolve, per chain, every edge between `u`
    /// and the chain's weight-eligible members with one binary search.
    /// Returns the number of oracle calls made.
    pub fn probe<O: RelOracle>(&mut self, oracle: &mut O, u: u32) -> Result<usize> {
        self.levels[u as usize] += 1;
        let cap = 2f64.powi(self.levels[u as usize]);
        let mut calls = 0usize;
        for ci in 0..self.chains.len() {
            let sub: Vec<u32> = self.chains[ci]
                .iter()
                .copied()
                .filter(|&x| {
                    x != u && oracle.weight(x, u).map_or(false, |w| w <= cap)
                })
                .collect();
            if sub.is_empty() {
                continue;
            }
            // First position whose vertex lies above u; the chain ascends,
            // every member is comparable to u, so one threshold suffices.
            let mut lo = 0usize;
            let mut hi = sub.len();
            while lo < hi {
                let mid = (lo + hi) / 2;
                calls += 1;
                match oracle.query(sub[mid], u)? {
                    Relation::Less => lo = mid + 1,
                    Relation::Greater => hi = mid,
                    Relation::Incomparable => {
                        return Err(Error::Unsatisfiable(format!(
                            "vertices {} and {u} are incomparable in a total order",
                            sub[mid]
                        )))
                    }
                }
            }
            for &x in &sub[..lo] {
                self.known_in[u as usize].insert(x as usize);
            }
            for &x in &sub[lo..] {
                self.known_in[x as usize].insert(u as usize);
            }
        }
        Ok(calls)
    }
}

/// One probe as it appears in the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeEvent {
    pub vertex: u32,
    pub level: i32,
}

/// Everything that happened between two consecutive finalizations.
#[derive(Clone, Debug, Default)]
pub struct RoundTrace {
    pub finalized: Option<u32>,
    pub probes: Vec<ProbeEvent>,
    /// Candidates that left the eligible set this round, at the level they
    /// held when they left.
    pub eliminated: Vec<ProbeEvent>,
}

#[derive(Clone, Debug, Default)]
pub struct SortChainsTrace {
    pub rounds: Vec<RoundTrace>,
}

/// Merge disjoint chains of a total order into the full ascending sequence.
///
/// A vertex is eligible once everything it is known to sit above has been
/// finalized; while several are eligible the lowest-level one is probed.
/// The next vertex of the true order is always eligible, so when one
/// candidate remains it is correct, and the output is exact.
pub fn sort_chains<O: RelOracle>(oracle: &mut O, chains: &[Vec<u32>]) -> Result<LinearExtension> {
    Ok(sort_chains_traced(oracle, chains)?.0)
}

pub fn sort_chains_traced<O: RelOracle>(
    oracle: &mut O,
    chains: &[Vec<u32>],
) -> Result<(LinearExtension, SortChainsTrace)> {
    let members: Vec<u32> = oracle.verts();
    let mut trace = SortChainsTrace::default();
    if chains.len() <= 1 {
        let order = chains.first().cloned().unwrap_or_default();
        if order.len() != members.len() {
            return Err(Error::InvalidParams(
                "chains must cover every member vertex".into(),
            ));
        }
        return Ok((LinearExtension::new(order), trace));
    }
    let covered: usize = chains.iter().map(Vec::len).sum();
    if covered != members.len() {
        return Err(Error::InvalidParams(
            "chains must cover every member vertex".into(),
        ));
    }

    let n = oracle.n();
    let mut state = ChainSortState::new(oracle, chains);
    let mut done = BitSet::new(n);
    let mut order: Vec<u32> = Vec::with_capacity(members.len());
    let eligible = |state: &ChainSortState, done: &BitSet| -> Vec<u32> {
        members
            .iter()
            .copied()
            .filter(|&v| {
                !done.contains(v as usize)
                    && !state.known_in[v as usize].any_outside(done)
            })
            .collect()
    };

    while order.len() < members.len() {
        let mut round = RoundTrace::default();
        let mut delta = eligible(&state, &done);
        while delta.len() > 1 {
            let u = delta
                .iter()
                .copied()
                .min_by_key(|&v| (state.levels[v as usize], v))
                .unwrap();
            state.probe(oracle, u)?;
            round.probes.push(ProbeEvent {
                vertex: u,
                level: state.levels[u as usize],
            });
            let next = eligible(&state, &done);
            for &v in &delta {
                if !next.contains(&v) {
                    round.eliminated.push(ProbeEvent {
                        vertex: v,
                        level: state.levels[v as usize],
                    });
                }
            }
            delta = next;
        }
        let v = delta[0];
        done.insert(v as usize);
        order.push(v);
        round.finalized = Some(v);
        trace.rounds.push(round);
    }
    Ok((LinearExtension::new(order), trace))
}

/// What a weighted run settled on: the estimate in force, how many rounds
/// ran, and the last round's threshold and chain count.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeightedRunInfo {
    pub opt_est: f64,
    pub rounds: usize,
    pub tau: Option<usize>,
    pub k_tau: Option<usize>,
}

/// One budgeted attempt at the weighted sort under the estimate `opt_est`.
/// `Ok(None)` reports a failed round: no usable threshold, or the budget ran
/// out. Queries spent by a failed round stay cached for the next attempt.
pub fn sort_weighted<R: Rng>(
    session: &mut OracleSession<'_>,
    opt_est: f64,
    cfg: &WeightedConfig,
    rng: &mut R,
) -> Result<Option<LinearExtension>> {
    Ok(sort_weighted_info(session, opt_est, cfg, rng)?.0)
}

pub fn sort_weighted_info<R: Rng>(
    session: &mut OracleSession<'_>,
    opt_est: f64,
    cfg: &WeightedConfig,
    rng: &mut R,
) -> Result<(Option<LinearExtension>, WeightedRunInfo)> {
    let mut info = WeightedRunInfo {
        opt_est,
        rounds: 1,
        tau: None,
        k_tau: None,
    };
    let graph = session.graph();
    let n = graph.n();
    let edges: Vec<(u32, u32)> = graph.edges().to_vec();
    let mut zero_edges = Vec::new();
    for &(u, v) in &edges {
        if graph.weight(u, v) == Some(0.0) {
            zero_edges.push((u, v));
        }
    }
    // Free edges cost nothing against any budget; resolve them up front.
    let mut oriented_zero = Vec::new();
    for (u, v) in zero_edges {
        match session.query(u, v)? {
            Relation::Less => oriented_zero.push((u, v)),
            Relation::Greater => oriented_zero.push((v, u)),
            Relation::Incomparable => {
                return Err(Error::Unsatisfiable(format!(
                    "vertices {u} and {v} are incomparable in a total order"
                )))
            }
        }
    }
    let values: Vec<f64> = session
        .graph()
        .weight_values()
        .into_iter()
        .filter(|&w| w > 0.0)
        .collect();
    if values.is_empty() {
        // Everything was free: the zero-weight edges alone must pin down
        // the order.
        let closure = transitive_closure(&Dag::new(n, oriented_zero)?)?;
        return match closure.total_order_sequence() {
            Some(seq) => Ok((Some(LinearExtension::new(seq)), info)),
            None => Err(Error::Unsatisfiable(
                "zero-weight edges do not determine a total order".into(),
            )),
        };
    }

    let tau = match find_threshold(&values, n, opt_est) {
        Ok(t) => t,
        Err(Error::NoFeasibleThreshold) => return Ok((None, info)),
        Err(e) => return Err(e),
    };
    info.tau = Some(tau);
    let w_tau = values[tau - 1];

    let nf = n.max(2) as f64;
    let allowance = cfg.budget_constant
        * nf.powf(1.0 - 1.0 / (2.0 * values.len() as f64))
        * nf.ln().powi(cfg.polylog_exp)
        * opt_est;
    let saved = session.budget();
    session.set_budget(Some(session.report().cost + allowance));
    let attempt = (|| -> Result<LinearExtension> {
        let cheap = {
            let mut view = session.view().with_weight_cap(Some(w_tau));
            gpsc_sort(&mut view, &cfg.gpsc, rng)?
        };
        let chains = cheap.chain_decomposition();
        info.k_tau = Some(chains.chains().len());
        sort_chains(&mut session.view(), chains.chains())
    })();
    session.set_budget(saved);
    match attempt {
        Ok(le) => Ok((Some(le), info)),
        Err(Error::BudgetExceeded) => Ok((None, info)),
        Err(e) => Err(e),
    }
}

/// Full weighted sort: double the opt estimate from the cheapest positive
/// weight until a round succeeds.
pub fn sort_weighted_doubling<R: Rng>(
    session: &mut OracleSession<'_>,
    cfg: &WeightedConfig,
    rng: &mut R,
) -> Result<LinearExtension> {
    Ok(sort_weighted_doubling_info(session, cfg, rng)?.0)
}

pub fn sort_weighted_doubling_info<R: Rng>(
    session: &mut OracleSession<'_>,
    cfg: &WeightedConfig,
    rng: &mut R,
) -> Result<(LinearExtension, WeightedRunInfo)> {
    let positives: Vec<f64> = session
        .graph()
        .weight_values()
        .into_iter()
        .filter(|&w| w > 0.0)
        .collect();
    let w_max = positives.last().copied().unwrap_or(1.0);
    let mut opt_est = positives.first().copied().unwrap_or(1.0);
    let ceiling = 4.0 * session.graph().n() as f64 * w_max;
    let mut rounds = 0usize;
    loop {
        let (le, mut info) = sort_weighted_info(session, opt_est, cfg, rng)?;
        rounds += 1;
        if let Some(le) = le {
            info.rounds = rounds;
            return Ok((le, info));
        }
        opt_est *= 2.0;
        if opt_est > ceiling {
            return Err(Error::Unsatisfiable(format!(
                "estimate doubling passed {ceiling} without a successful round"
            )));
        }
    }
}
