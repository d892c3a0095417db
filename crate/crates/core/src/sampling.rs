//! Subgraph selection: uniform `m`-subsets and neighborhoods (h-hop, ego, onion)
//! around randomly chosen roots.
//!
//! Sample `ℓ` of a batch draws from `rng::stream(seed, ℓ)` only, so batches are
//! reproducible and can be generated in any order.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::graph::{induced_subgraph, Graph, SubgraphSample};
use crate::par;
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    RandomM,
    HHop,
    Ego,
    Onion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RootSelection {
    Uniform,
    /// `P(v) ∝ deg(v)`; isolated nodes are never roots.
    DegreeProportional,
    /// Uniform over nodes whose degree is strictly above the `q`-th lower
    /// empirical quantile of the degree distribution.
    DegreeQuantileTruncated(f64),
}

#[cfg(feature = "serde")]
fn default_h() -> usize {
    1
}

#[cfg(feature = "serde")]
fn default_m_star() -> usize {
    1
}

#[cfg(feature = "serde")]
fn default_roots() -> RootSelection {
    RootSelection::Uniform
}

/// How subgraphs are drawn.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SamplerSpec {
    pub scheme: Scheme,
    /// Subset size for [`Scheme::RandomM`].
    #[cfg_attr(feature = "serde", serde(default))]
    pub m: usize,
    /// Hop count for [`Scheme::HHop`] and [`Scheme::Onion`].
    #[cfg_attr(feature = "serde", serde(default = "default_h"))]
    pub h: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_roots"))]
    pub root_selection: RootSelection,
    /// Samples with fewer nodes are kept but flagged inadmissible.
    #[cfg_attr(feature = "serde", serde(default = "default_m_star"))]
    pub m_star: usize,
}

impl SamplerSpec {
    pub fn random_m(m: usize) -> Self {
        SamplerSpec { scheme: Scheme::RandomM, m, h: 1, root_selection: RootSelection::Uniform, m_star: 1 }
    }

    pub fn h_hop(h: usize) -> Self {
        SamplerSpec { scheme: Scheme::HHop, m: 0, h, root_selection: RootSelection::Uniform, m_star: 1 }
    }

    pub fn ego() -> Self {
        SamplerSpec { scheme: Scheme::Ego, m: 0, h: 1, root_selection: RootSelection::Uniform, m_star: 1 }
    }

    pub fn onion(h: usize) -> Self {
        SamplerSpec { scheme: Scheme::Onion, m: 0, h, root_selection: RootSelection::Uniform, m_star: 1 }
    }

    pub fn with_roots(mut self, roots: RootSelection) -> Self {
        self.root_selection = roots;
        self
    }

    pub fn with_m_star(mut self, m_star: usize) -> Self {
        self.m_star = m_star;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_star == 0 {
            return Err(invalid!("m_star must be at least 1"));
        }
        match self.scheme {
            Scheme::RandomM if self.m == 0 => return Err(invalid!("random_m needs m >= 1")),
            Scheme::HHop | Scheme::Onion if self.h == 0 => {
                return Err(invalid!("hop neighborhoods need h >= 1"))
            }
            _ => {}
        }
        if let RootSelection::DegreeQuantileTruncated(q) = self.root_selection {
            if !(0.0..1.0).contains(&q) {
                return Err(invalid!("degree quantile q = {q} must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    fn uses_roots(&self) -> bool {
        self.scheme != Scheme::RandomM
    }
}

/// A uniformly random `m`-subset (sorted) drawn from `rng`.
pub fn random_subset(n: usize, m: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if m > n {
        return Err(invalid!("cannot draw {m} nodes from {n}"));
    }
    let mut nodes = rand::seq::index::sample(rng, n, m).into_vec();
    nodes.sort_unstable();
    Ok(nodes)
}

/// A uniformly random `m`-subset of the nodes, determined by `seed`.
pub fn sample_random_m(graph: &Graph, m: usize, seed: u64) -> Result<Vec<usize>> {
    random_subset(graph.n(), m, &mut rng::seeded(seed))
}

/// Nodes within `h` hops of `root`, root included, ascending.
pub fn sample_h_hop(graph: &Graph, root: usize, h: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.n()];
    dist[root] = 0;
    let mut reached = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == h {
            continue;
        }
        for &v in graph.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                reached.push(v);
                queue.push_back(v);
            }
        }
    }
    reached.sort_unstable();
    reached
}

/// Neighbors of `root`, root excluded.
pub fn sample_ego(graph: &Graph, root: usize) -> Vec<usize> {
    graph.neighbors(root).to_vec()
}

/// The `h`-hop onion around `root`: `O₁` is the ego network, shell `S_h` is the
/// union of the ego networks of `S_{h−1}` minus `O_{h−1}` and the root, and
/// `O_h = O_{h−1} ∪ S_h`. Root excluded, ascending.
pub fn sample_onion(graph: &Graph, root: usize, h: usize) -> Vec<usize> {
    let mut in_onion = vec![false; graph.n()];
    let mut shell = sample_ego(graph, root);
    for &u in &shell {
        in_onion[u] = true;
    }
    for _ in 1..h {
        let mut next = Vec::new();
        for &u in &shell {
            for &v in graph.neighbors(u) {
                if v != root && !in_onion[v] {
                    in_onion[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        shell = next;
    }
    (0..graph.n()).filter(|&u| in_onion[u]).collect()
}

/// Draws roots according to a [`RootSelection`] (with replacement).
#[derive(Clone, Debug)]
pub struct RootSampler {
    candidates: Vec<usize>,
    /// Cumulative integer weights, for degree-proportional selection.
    cumulative: Option<Vec<u64>>,
}

impl RootSampler {
    pub fn new(graph: &Graph, selection: RootSelection) -> Result<Self> {
        let degrees = graph.degrees();
        let sampler = match selection {
            RootSelection::Uniform => RootSampler { candidates: (0..graph.n()).collect(), cumulative: None },
            RootSelection::DegreeProportional => {
                let candidates: Vec<usize> = (0..graph.n()).filter(|&u| degrees[u] > 0).collect();
                let mut total = 0u64;
                let cumulative = candidates
                    .iter()
                    .map(|&u| {
                        total += degrees[u] as u64;
                        total
                    })
                    .collect();
                RootSampler { candidates, cumulative: Some(cumulative) }
            }
            RootSelection::DegreeQuantileTruncated(q) => {
                let cut = degree_quantile(&degrees, q);
                let candidates = (0..graph.n()).filter(|&u| degrees[u] > cut).collect();
                RootSampler { candidates, cumulative: None }
            }
        };
        if sampler.candidates.is_empty() {
            return Err(invalid!("no node is eligible as a root under {selection:?}"));
        }
        Ok(sampler)
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn draw(&self, rng: &mut Rng) -> usize {
        match &self.cumulative {
            None => self.candidates[rng.random_range(0..self.candidates.len())],
            Some(cumulative) => {
                let total = *cumulative.last().expect("nonempty");
                let ticket = rng.random_range(0..total);
                let slot = cumulative.partition_point(|&c| c <= ticket);
                self.candidates[slot]
            }
        }
    }
}

/// The `q`-th lower empirical quantile: the smallest degree `x` with
/// `#{deg ≤ x} ≥ q·n`.
pub fn degree_quantile(degrees: &[usize], q: f64) -> usize {
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n == 0 {
        return 0;
    }
    let rank = libm::ceil(q * n as f64) as usize;
    sorted[rank.saturating_sub(1).min(n - 1)]
}

/// Roots for samples `0..t` of a batch drawn with `seed`.
pub fn select_roots(graph: &Graph, spec: &SamplerSpec, t: usize, seed: u64) -> Result<Vec<usize>> {
    if t == 0 {
        return Err(invalid!("at least one root is required"));
    }
    let sampler = RootSampler::new(graph, spec.root_selection)?;
    Ok((0..t).map(|l| sampler.draw(&mut rng::stream(seed, l as u64))).collect())
}

/// One drawn subgraph.
#[derive(Clone, Debug, PartialEq)]
pub struct DrawnSample {
    pub root: Option<usize>,
    pub sample: SubgraphSample,
    /// `|S| ≥ m_star`; inadmissible samples are never clustered.
    pub admissible: bool,
}

/// Draws `t` subgraphs with their induced adjacency.
pub fn draw_subgraphs(graph: &Graph, spec: &SamplerSpec, t: usize, seed: u64) -> Result<Vec<DrawnSample>> {
    spec.validate()?;
    if t == 0 {
        return Err(invalid!("at least one subgraph is required"));
    }
    let n = graph.n();
    if spec.scheme == Scheme::RandomM && spec.m > n {
        return Err(invalid!("cannot draw {}-node subsets from {n} nodes", spec.m));
    }
    let roots = if spec.uses_roots() { Some(RootSampler::new(graph, spec.root_selection)?) } else { None };
    let draws = par::map_indexed(t, |l| {
        let mut rng = rng::stream(seed, l as u64);
        let (root, nodes) = match (&roots, spec.scheme) {
            (None, _) => (None, random_subset(n, spec.m, &mut rng).expect("m <= n checked")),
            (Some(r), scheme) => {
                let root = r.draw(&mut rng);
                let nodes = match scheme {
                    Scheme::HHop => sample_h_hop(graph, root, spec.h),
                    Scheme::Ego => sample_ego(graph, root),
                    Scheme::Onion => sample_onion(graph, root, spec.h),
                    Scheme::RandomM => unreachable!("random_m draws no root"),
                };
                (Some(root), nodes)
            }
        };
        let sample = induced_subgraph(graph, &nodes).expect("sampled nodes are in range");
        let admissible = sample.len() >= spec.m_star;
        DrawnSample { root, sample, admissible }
    });
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, planted_partition_params, SbmParams};
    use pace_testkit::bfs_distances;
    use proptest::prelude::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    fn random_graph(seed: u64, n: usize, p: f64) -> Graph {
        let params = planted_partition_params(1.0, p, 1.0, SbmParams::balanced(1)).unwrap();
        generate_sbm(&params, n, seed).unwrap().graph
    }

    fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
        (0..g.n()).map(|u| g.neighbors(u).to_vec()).collect()
    }

    #[test]
    fn random_m_edges() {
        let g = Graph::empty(6);
        assert_eq!(sample_random_m(&g, 6, 1).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(sample_random_m(&g, 1, 1).unwrap().len(), 1);
        assert!(sample_random_m(&g, 7, 1).is_err());
    }

    #[test]
    fn random_m_inclusion_is_uniform() {
        let g = Graph::empty(20);
        let draws = 10_000;
        let mut hits = [0usize; 20];
        for s in 0..draws {
            for u in sample_random_m(&g, 5, s).unwrap() {
                hits[u] += 1;
            }
        }
        let p = 0.25;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for h in hits {
            assert!((h as f64 / draws as f64 - p).abs() <= 3.0 * sigma, "{hits:?}");
        }
    }

    #[test]
    fn h_hop_examples() {
        let p = path(4);
        assert_eq!(sample_h_hop(&p, 0, 2), vec![0, 1, 2]);
        assert_eq!(sample_h_hop(&p, 0, 10), vec![0, 1, 2, 3]);
        assert_eq!(sample_h_hop(&Graph::empty(3), 1, 2), vec![1]);
    }

    #[test]
    fn ego_examples() {
        assert!(sample_ego(&Graph::empty(2), 0).is_empty());
        assert_eq!(sample_ego(&star(4), 0), vec![1, 2, 3, 4]);
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(sample_ego(&tri, 0), vec![1, 2]);
    }

    #[test]
    fn onion_examples() {
        let p = path(4);
        assert_eq!(sample_onion(&p, 1, 2), vec![0, 2, 3]);
        assert_eq!(sample_onion(&p, 1, 1), sample_ego(&p, 1));
    }

    #[test]
    fn degree_proportional_on_star() {
        let g = star(4);
        let spec = SamplerSpec::h_hop(1).with_roots(RootSelection::DegreeProportional);
        let draws = 10_000;
        let roots = select_roots(&g, &spec, draws, 5).unwrap();
        let center = roots.iter().filter(|&&r| r == 0).count() as f64 / draws as f64;
        let sigma = (0.25f64 / draws as f64).sqrt();
        assert!((center - 0.5).abs() <= 3.0 * sigma, "{center}");
    }

    #[test]
    fn degree_proportional_on_regular_graph_is_uniform() {
        let cycle = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let s = RootSampler::new(&cycle, RootSelection::DegreeProportional).unwrap();
        assert_eq!(s.candidates(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn quantile_truncation_is_strict() {
        // Degrees: star center 4, leaves 1.
        let s = RootSampler::new(&star(4), RootSelection::DegreeQuantileTruncated(0.0)).unwrap();
        assert_eq!(s.candidates(), &[0]);
        assert!(RootSampler::new(&Graph::empty(3), RootSelection::DegreeQuantileTruncated(0.0)).is_err());
        assert!(RootSampler::new(&Graph::empty(3), RootSelection::DegreeProportional).is_err());
        assert_eq!(degree_quantile(&[5, 1, 3, 2, 4, 6, 7, 8, 9, 10], 0.1), 1);
        assert_eq!(degree_quantile(&[5, 1, 3, 2, 4, 6, 7, 8, 9, 10], 0.35), 4);
    }

    #[test]
    fn draw_subgraphs_flags() {
        let g = random_graph(1, 12, 0.3);
        let full = draw_subgraphs(&g, &SamplerSpec::random_m(12), 1, 0).unwrap();
        assert!(full[0].admissible);
        assert_eq!(full[0].sample.graph, g);
        let none = draw_subgraphs(&g, &SamplerSpec::random_m(5).with_m_star(13), 4, 0).unwrap();
        assert!(none.iter().all(|d| !d.admissible));
        let sized = draw_subgraphs(&g, &SamplerSpec::random_m(5), 30, 2).unwrap();
        assert!(sized.iter().all(|d| d.sample.len() == 5));
    }

    #[test]
    fn draws_are_index_deterministic() {
        let g = random_graph(2, 60, 0.1);
        let spec = SamplerSpec::h_hop(2).with_roots(RootSelection::DegreeProportional);
        let a = draw_subgraphs(&g, &spec, 10, 77).unwrap();
        let b = draw_subgraphs(&g, &spec, 25, 77).unwrap();
        assert_eq!(a[..], b[..10]);
        let roots = select_roots(&g, &spec, 10, 77).unwrap();
        assert_eq!(roots, a.iter().map(|d| d.root.unwrap()).collect::<Vec<_>>());
    }

    #[test]
    fn random_m_cluster_representation() {
        let params = SbmParams::new(vec![0.5, 0.5], vec![0.1; 4]).unwrap();
        let lg = generate_sbm(&params, 200, 3).unwrap();
        let draws = draw_subgraphs(&lg.graph, &SamplerSpec::random_m(50), 1000, 9).unwrap();
        let mean: f64 = draws
            .iter()
            .map(|d| d.sample.nodes.iter().filter(|&&u| lg.labels[u] == 0).count() as f64)
            .sum::<f64>()
            / 1000.0;
        let var = 50.0 * 0.25 * 150.0 / 199.0;
        assert!((mean - 25.0).abs() <= 3.0 * (var / 1000.0f64).sqrt(), "{mean}");
    }

    proptest! {
        #[test]
        fn onion_is_hop_ball_without_root(seed in any::<u64>(), h in 1usize..5, root in 0usize..40) {
            let g = random_graph(seed, 40, 0.06);
            let onion = sample_onion(&g, root, h);
            let dist = bfs_distances(&adjacency(&g), root);
            let oracle: Vec<usize> = (0..40).filter(|&u| u != root && dist[u].is_some_and(|d| d <= h)).collect();
            prop_assert_eq!(onion, oracle);
        }

        #[test]
        fn h_hop_is_monotone(seed in any::<u64>(), h1 in 0usize..4, extra in 0usize..3, root in 0usize..40) {
            let g = random_graph(seed, 40, 0.05);
            let small = sample_h_hop(&g, root, h1);
            let large = sample_h_hop(&g, root, h1 + extra);
            prop_assert!(small.iter().all(|u| large.binary_search(u).is_ok()));
        }
    }
}
