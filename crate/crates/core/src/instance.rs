//! Seeded instance generators for every query-graph model, plus the JSON
//! instance file format.
//!
//! Every generator guarantees by construction that the edge set determines
//! the ground truth: the closure of the truth-oriented edges reproduces the
//! order, because the edge set always contains a generating set of it (the
//! transitive reduction, or the relations the truth was generated from).
//! Same parameters and seed give byte-identical files.

use crate::oracle::QueryGraph;
use crate::poset::{transitive_closure, Dag, Poset};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Query-graph model of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Er,
    Bipartite,
    Gpsc,
    Weighted,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Model::Er => "er",
            Model::Bipartite => "bipartite",
            Model::Gpsc => "gpsc",
            Model::Weighted => "weighted",
        };
        f.write_str(s)
    }
}

/// Weight-scale layout for weighted instances.
///
/// `UniformLog` spaces the W values as powers of 4; `Separated` uses ratio
/// n^{3/4} between consecutive values, the well-separated regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GapProfile {
    UniformLog,
    Separated,
}

/// Deterministic per-purpose sub-seed derivation (splitmix64 finalizer).
pub fn mix_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A poset of width exactly `k`: k disjoint random chains plus random
/// order-compatible cross relations, regenerated with halved acceptance
/// probability until the width check passes (probability 0 always passes).
pub fn random_poset(n: usize, k: usize, seed: u64) -> Result<Poset> {
    if k == 0 || k > n {
        return Err(Error::Unsatisfiable(format!(
            "width {k} impossible on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(&mut rng);
    // k - 1 distinct cut points split the permutation into k nonempty chains.
    let mut cuts: Vec<usize> = rand::seq::index::sample(&mut rng, n - 1, k - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(n);
    let chains: Vec<&[u32]> = cuts.windows(2).map(|w| &perm[w[0]..w[1]]).collect();

    let mut chain_of = vec![0usize; n];
    let mut chain_edges = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        for &v in *chain {
            chain_of[v as usize] = c;
        }
        for w in chain.windows(2) {
            chain_edges.push((w[0], w[1]));
        }
    }

    let mut rho: f64 = 0.3;
    for attempt in 0.. {
        if attempt >= 60 {
            rho = 0.0;
        }
        // Heights ascend along every chain, so height-compatible cross
        // relations can never close a cycle.
        let mut height = vec![0.0f64; n];
        for chain in &chains {
            let mut hs: Vec<f64> = (0..chain.len()).map(|_| rng.gen()).collect();
            hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (&v, h) in chain.iter().zip(hs) {
                height[v as usize] = h;
            }
        }
        let mut edges = chain_edges.clone();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                if chain_of[u as usize] != chain_of[v as usize]
                    && height[u as usize] < height[v as usize]
                    && rng.gen_bool(rho)
                {
                    edges.push((u, v));
                }
            }
        }
        let poset = transitive_closure(&Dag::new(n, edges)?)?;
        if poset.width() == k {
            return Ok(poset);
        }
        rho /= 2.0;
    }
    unreachable!("rho = 0 attempt always has width k");
}

/// Edge set = transitive-reduction edges plus i.i.d. Bernoulli(p) pairs.
pub fn er_query_graph(poset: &Poset, p: f64, seed: u64) -> Result<QueryGraph> {
    let n = poset.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)> = poset.transitive_reduction().edges().to_vec();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    QueryGraph::new(edges, None, poset.clone())
}

/// Complete bipartite query graph on A = 0..n_a and B = n_a..n_a+n_b; the
/// truth is the closure of a `density` fraction of height-oriented cross
/// pairs (so every generating relation is itself an edge).
pub fn bipartite_instance(n_a: usize, n_b: usize, density: f64, seed: u64) -> Result<QueryGraph> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidParams("both sides must be nonempty".into()));
    }
    let n = n_a + n_b;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let height: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    let mut edges = Vec::with_capacity(n_a * n_b);
    let mut oriented = Vec::new();
    for a in 0..n_a as u32 {
        for b in n_a as u32..n as u32 {
            edges.push((a, b));
            if rng.gen_bool(density) {
                if height[a as usize] < height[b as usize] {
                    oriented.push((a, b));
                } else {
                    oriented.push((b, a));
                }
            }
        }
    }
    let truth = transitive_closure(&Dag::new(n, oriented)?)?;
    QueryGraph::new(edges, None, truth)
}

/// Reduction from a complete-graph GPS instance to a bipartite one: each
/// vertex v becomes v_L = v and v_R = n + v with v_L ≺ v_R, and u ≺ v adds
/// u_R ≺ v_L; the closure's cross relations mirror the original order.
pub fn reduce_to_bipartite(poset: &Poset) -> Result<QueryGraph> {
    let n = poset.n();
    let mut oriented = Vec::new();
    for v in 0..n as u32 {
        oriented.push((v, n as u32 + v));
    }
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if poset.less(u, v) {
                oriented.push((n as u32 + u, v));
            }
        }
    }
    let truth = transitive_closure(&Dag::new(2 * n, oriented)?)?;
    let mut edges = Vec::with_capacity(n * n);
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            edges.push((a, n as u32 + b));
        }
    }
    QueryGraph::new(edges, None, truth)
}

/// Inverse of [`reduce_to_bipartite`] at the poset level: u ≺ v in the
/// original iff u_L ≺ v_R in the doubled order.
pub fn map_back_from_bipartite(doubled: &Poset, n: usize) -> Result<Poset> {
    if doubled.n() != 2 * n {
        return Err(Error::LengthMismatch {
            expected: 2 * n,
            got: doubled.n(),
        });
    }
    let mut oriented = Vec::new();
    for u in 0..n as u32 {
        if !doubled.less(u, n as u32 + u) {
            return Err(Error::Unsatisfiable(format!("missing {u}_L < {u}_R pair")));
        }
        for v in 0..n as u32 {
            if u != v && doubled.less(u, n as u32 + v) {
                oriented.push((u, v));
            }
        }
    }
    transitive_closure(&Dag::new(n, oriented)?)
}

/// All edges comparable: reduction edges plus random comparable pairs.
pub fn gpsc_instance(n: usize, k: usize, extra_edge_prob: f64, seed: u64) -> Result<QueryGraph> {
    let poset = random_poset(n, k, mix_seed(seed, 1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 2));
    let reduction: std::collections::HashSet<(u32, u32)> = poset
        .transitive_reduction()
        .edges()
        .iter()
        .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
        .collect();
    let mut edges: Vec<(u32, u32)> = reduction.iter().copied().collect();
    edges.sort_unstable();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if poset.comparable(u, v) && !reduction.contains(&(u, v)) && rng.gen_bool(extra_edge_prob)
            {
                edges.push((u, v));
            }
        }
    }
    QueryGraph::new(edges, None, poset)
}

/// Extra-edge probability for weighted instances: sparse but connected
/// enough that cheap alternatives to the Hamiltonian edges exist.
fn weighted_extra_prob(n: usize) -> f64 {
    (4.0 * (n as f64).ln() / n as f64).min(1.0)
}

/// The W distinct weight values of a profile, ascending.
pub fn weight_scale(n: usize, w_count: usize, profile: GapProfile) -> Vec<f64> {
    (0..w_count)
        .map(|i| match profile {
            GapProfile::UniformLog => 4f64.powi(i as i32),
            GapProfile::Separated => (n as f64).powf(0.75 * i as f64),
        })
        .collect()
}

/// Ground truth is a uniform random total order; E holds every consecutive
/// Hamiltonian-path edge plus random extras, each weighted by a uniform
/// draw from the profile's W values.
pub fn weighted_instance(n: usize, w_count: usize, seed: u64, profile: GapProfile) -> Result<QueryGraph> {
    if w_count == 0 {
        return Err(Error::InvalidParams("need at least one weight value".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParams("weighted instances need n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng);
    let truth = transitive_closure(&Dag::new(n, order.windows(2).map(|w| (w[0], w[1])))?)?;

    let mut edges: Vec<(u32, u32)> = order
        .windows(2)
        .map(|w| if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) })
        .collect();
    edges.sort_unstable();
    let in_path: std::collections::HashSet<(u32, u32)> = edges.iter().copied().collect();
    let extra_p = weighted_extra_prob(n);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if !in_path.contains(&(u, v)) && rng.gen_bool(extra_p) {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    let values = weight_scale(n, w_count, profile);
    let weights: Vec<f64> = edges.iter().map(|_| *values.choose(&mut rng).unwrap()).collect();
    QueryGraph::new(edges, Some(weights), truth)
}

/// OPT for a weighted instance: the cost of querying the Hamiltonian path
/// of the true total order.
pub fn opt_cost(graph: &QueryGraph) -> Result<f64> {
    let order = graph
        .ground_truth()
        .total_order_sequence()
        .ok_or_else(|| Error::Unsatisfiable("ground truth is not a total order".into()))?;
    let mut sum = 0.0;
    for w in order.windows(2) {
        sum += graph
            .weight(w[0], w[1])
            .ok_or(Error::NotAnEdge { u: w[0], v: w[1] })?;
    }
    Ok(sum)
}

/// Model-specific generation parameters as stored in instance files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_profile: Option<GapProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra_edge_prob: Option<f64>,
}

/// A generated instance: the graph plus how it was made.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: QueryGraph,
    pub model: Model,
    pub params: ModelParams,
    pub seed: u64,
}

/// Requested shape of an instance, one knob set per model.
#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    /// Vertex count; for bipartite, the size of each side.
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub w: usize,
    pub gap_profile: GapProfile,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 50,
            k: 3,
            p: 0.2,
            w: 2,
            gap_profile: GapProfile::UniformLog,
        }
    }
}

impl Instance {
    pub fn generate(model: Model, gp: &GenParams, seed: u64) -> Result<Instance> {
        let graph = match model {
            Model::Er => {
                let poset = random_poset(gp.n, gp.k, mix_seed(seed, 11))?;
                er_query_graph(&poset, gp.p, mix_seed(seed, 12))?
            }
            Model::Bipartite => bipartite_instance(gp.n, gp.n, gp.p, seed)?,
            Model::Gpsc => gpsc_instance(gp.n, gp.k, gp.p, seed)?,
            Model::Weighted => weighted_instance(gp.n, gp.w, seed, gp.gap_profile)?,
        };
        let params = match model {
            Model::Er => ModelParams {
                k: Some(gp.k),
                p: Some(gp.p),
                ..Default::default()
            },
            Model::Bipartite => ModelParams {
                n_a: Some(gp.n),
                n_b: Some(gp.n),
                density: Some(gp.p),
                ..Default::default()
            },
            Model::Gpsc => ModelParams {
                k: Some(gp.k),
                extra_edge_prob: Some(gp.p),
                ..Default::default()
            },
            Model::Weighted => ModelParams {
                w: Some(gp.w),
                gap_profile: Some(gp.gap_profile),
                ..Default::default()
            },
        };
        Ok(Instance {
            graph,
            model,
            params,
            seed,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            n: self.graph.n(),
            edges: self.graph.edges().to_vec(),
            weights: self.graph.weights().map(|w| w.to_vec()),
            truth_reduction: self.graph.ground_truth().transitive_reduction().edges().to_vec(),
            model: self.model,
            params: self.params.clone(),
            seed: self.seed,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Parse, rebuild the truth from its reduction, and audit that the edge
    /// set determines it.
    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let truth = transitive_closure(&Dag::new(file.n, file.truth_reduction)?)?;
        let graph = QueryGraph::new(file.edges, file.weights, truth)?;
        graph.audit_determining()?;
        Ok(Instance {
            graph,
            model: file.model,
            params: file.params,
            seed: file.seed,
        })
    }

    pub fn load(path: &Path) -> Result<Instance> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    edges: Vec<(u32, u32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    truth_reduction: Vec<(u32, u32)>,
    model: Model,
    params: ModelParams,
    seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_width(poset: &Poset) -> usize {
        let n = poset.n();
        let mut best = 0;
        for mask in 0u32..1 << n {
            let verts: Vec<u32> = (0..n as u32).filter(|&v| mask >> v & 1 == 1).collect();
            let antichain = verts
                .iter()
                .enumerate()
                .all(|(i, &u)| verts[i + 1..].iter().all(|&v| !poset.comparable(u, v)));
            if antichain {
                best = best.max(verts.len());
            }
        }
        best
    }

    #[test]
    fn width_one_is_total_order() {
        let p = random_poset(5, 1, 0).unwrap();
        assert_eq!(p.width(), 1);
        assert!(p.total_order_sequence().is_some());
    }

    #[test]
    fn width_n_is_antichain() {
        let p = random_poset(5, 5, 0).unwrap();
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(p.comparable(u, v), false, "pair ({u}, {v})");
            }
        }
    }

    #[test]
    fn width_matches_request_and_brute_force() {
        let p = random_poset(9, 3, 1).unwrap();
        assert_eq!(p.width(), 3);
        assert_eq!(brute_width(&p), 3);
    }

    #[test]
    fn impossible_width_is_rejected() {
        assert!(matches!(random_poset(4, 5, 0), Err(Error::Unsatisfiable(_))));
    }

    #[test]
    fn er_with_p_one_is_complete() {
        let p = random_poset(8, 2, 3).unwrap();
        let g = er_query_graph(&p, 1.0, 4).unwrap();
        assert_eq!(g.edge_count(), 8 * 7 / 2);
    }

    #[test]
    fn er_with_p_zero_is_base_graph() {
        let p = random_poset(8, 2, 3).unwrap();
        let g = er_query_graph(&p, 0.0, 4).unwrap();
        let mut base: Vec<(u32, u32)> = p
            .transitive_reduction()
            .edges()
            .iter()
            .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        base.sort_unstable();
        assert_eq!(g.edges(), base);
    }

    #[test]
    fn er_instance_passes_determining_audit() {
        let p = random_poset(50, 3, 3).unwrap();
        let g = er_query_graph(&p, 0.2, 3).unwrap();
        g.audit_determining().unwrap();
    }

    #[test]
    fn bipartite_zero_density_is_antichain() {
        let g = bipartite_instance(4, 3, 0.0, 1).unwrap();
        let t = g.ground_truth();
        for u in 0..7 {
            for v in 0..7 {
                assert!(!t.comparable(u, v));
            }
        }
    }

    #[test]
    fn bipartite_edges_are_exactly_cross_pairs() {
        let g = bipartite_instance(3, 4, 0.5, 2).unwrap();
        assert_eq!(g.edge_count(), 12);
        for &(u, v) in g.edges() {
            assert!(u < 3 && v >= 3, "edge ({u}, {v}) must cross the sides");
        }
    }

    #[test]
    fn bipartite_instance_passes_determining_audit() {
        bipartite_instance(20, 20, 0.3, 5).unwrap().audit_determining().unwrap();
    }

    #[test]
    fn remark_reduction_of_three_chain_maps_back() {
        let chain = transitive_closure(&Dag::new(3, [(0, 1), (1, 2)]).unwrap()).unwrap();
        let g = reduce_to_bipartite(&chain).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.edge_count(), 9);
        g.audit_determining().unwrap();
        let back = map_back_from_bipartite(g.ground_truth(), 3).unwrap();
        assert_eq!(back, chain);
    }

    #[test]
    fn remark_reduction_roundtrips_random_posets() {
        for seed in 0..4 {
            let p = random_poset(7, 3, 40 + seed).unwrap();
            let g = reduce_to_bipartite(&p).unwrap();
            g.audit_determining().unwrap();
            assert_eq!(map_back_from_bipartite(g.ground_truth(), 7).unwrap(), p);
        }
    }

    #[test]
    fn gpsc_extra_zero_is_reduction_only() {
        let g = gpsc_instance(12, 3, 0.0, 7).unwrap();
        let base = g.ground_truth().transitive_reduction();
        assert_eq!(g.edge_count(), base.edges().len());
    }

    #[test]
    fn gpsc_extra_one_is_full_comparability() {
        let g = gpsc_instance(12, 3, 1.0, 7).unwrap();
        let t = g.ground_truth();
        let comparable_pairs = (0..12u32)
            .flat_map(|u| (u + 1..12).map(move |v| (u, v)))
            .filter(|&(u, v)| t.comparable(u, v))
            .count();
        assert_eq!(g.edge_count(), comparable_pairs);
    }

    #[test]
    fn gpsc_edges_are_all_comparable() {
        let g = gpsc_instance(30, 4, 0.5, 2).unwrap();
        g.audit_determining().unwrap();
        for &(u, v) in g.edges() {
            assert!(g.ground_truth().comparable(u, v));
        }
    }

    #[test]
    fn weighted_single_value_is_unit_weights() {
        let g = weighted_instance(10, 1, 3, GapProfile::UniformLog).unwrap();
        assert_eq!(g.weight_values(), vec![1.0]);
    }

    #[test]
    fn path_only_unit_instance_has_opt_n_minus_one() {
        let truth = transitive_closure(&Dag::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap()).unwrap();
        let g = QueryGraph::new(
            [(0, 1), (1, 2), (2, 3)],
            Some(vec![1.0, 1.0, 1.0]),
            truth,
        )
        .unwrap();
        assert_eq!(opt_cost(&g).unwrap(), 3.0);
    }

    #[test]
    fn weighted_opt_matches_direct_sum() {
        let g = weighted_instance(64, 3, 9, GapProfile::UniformLog).unwrap();
        g.audit_determining().unwrap();
        let t = g.ground_truth();
        let mut order: Vec<u32> = (0..64).collect();
        order.sort_by_key(|&v| t.down_set(v).len());
        let direct: f64 = order.windows(2).map(|w| g.weight(w[0], w[1]).unwrap()).sum();
        assert_eq!(opt_cost(&g).unwrap(), direct);
    }

    #[test]
    fn weighted_keeps_hamiltonian_edges() {
        for profile in [GapProfile::UniformLog, GapProfile::Separated] {
            let g = weighted_instance(40, 2, 11, profile).unwrap();
            let order = g.ground_truth().total_order_sequence().unwrap();
            for w in order.windows(2) {
                assert!(g.has_edge(w[0], w[1]));
            }
        }
    }

    #[test]
    fn separated_profile_meets_ratio_precondition() {
        let vals = weight_scale(64, 3, GapProfile::Separated);
        for w in vals.windows(2) {
            assert!(w[0] / w[1] <= (64f64).powf(-0.75) + 1e-12);
        }
    }

    #[test]
    fn instance_files_roundtrip_and_audit() {
        let dir = tempfile::tempdir().unwrap();
        for model in [Model::Er, Model::Bipartite, Model::Gpsc, Model::Weighted] {
            let gp = GenParams {
                n: 12,
                k: 2,
                p: 0.3,
                w: 2,
                gap_profile: GapProfile::UniformLog,
            };
            let inst = Instance::generate(model, &gp, 5).unwrap();
            let path = dir.path().join(format!("{model}.json"));
            inst.save(&path).unwrap();
            let loaded = Instance::load(&path).unwrap();
            assert_eq!(loaded.graph.edges(), inst.graph.edges());
            assert_eq!(loaded.graph.ground_truth(), inst.graph.ground_truth());
            assert_eq!(loaded.model, model);
            assert_eq!(loaded.seed, 5);
            assert_eq!(loaded.to_json().unwrap(), inst.to_json().unwrap());
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let gp = GenParams::default();
        let a = Instance::generate(Model::Er, &gp, 99).unwrap();
        let b = Instance::generate(Model::Er, &gp, 99).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn random_poset_width_is_exact(n in 2usize..12, kseed in any::<u64>()) {
                let k = 1 + (kseed as usize) % n;
                let p = random_poset(n, k, kseed).unwrap();
                prop_assert_eq!(p.width(), k);
            }

            #[test]
            fn er_audit_always_passes(n in 2usize..14, p in 0.0f64..1.0, seed in any::<u64>()) {
                let poset = random_poset(n, 1 + (seed as usize) % n, seed).unwrap();
                let g = er_query_graph(&poset, p, mix_seed(seed, 5)).unwrap();
                prop_assert!(g.audit_determining().is_ok());
            }
        }
    }
}
