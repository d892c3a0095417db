//! Undirected simple graphs, stochastic block model generation, induced subgraphs
//! and connected components.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::membership::MembershipMatrix;
use crate::rng;

/// An undirected simple graph on nodes `0..n`, stored as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from arbitrary pairs. Pairs are symmetrized, and self-loops
    /// and repeats are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid!("edge ({u}, {v}) out of range for {n} nodes"));
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adj.is_empty() {
            0.0
        } else {
            2.0 * self.edge_count() as f64 / self.n() as f64
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// `y = A x`.
    pub fn adjacency_matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yi, list) in y.iter_mut().zip(&self.adj) {
            *yi = list.iter().map(|&j| x[j]).sum();
        }
    }
}

/// Parameters of a stochastic block model: proportions `pi` and a symmetric
/// `K × K` matrix of link probabilities (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct SbmParams {
    pi: Vec<f64>,
    b: Vec<f64>,
}

impl SbmParams {
    pub fn new(pi: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(invalid!("at least one block is required"));
        }
        if b.len() != k * k {
            return Err(invalid!("B must be {k}x{k}, got {} entries", b.len()));
        }
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(invalid!("block proportions must be positive"));
        }
        let total: f64 = pi.iter().sum();
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(invalid!("block proportions sum to {total}, not 1"));
        }
        for r in 0..k {
            for c in 0..k {
                let v = b[r * k + c];
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid!("B[{r}][{c}] = {v} is not a probability"));
                }
                if v != b[c * k + r] {
                    return Err(invalid!("B is not symmetric at ({r}, {c})"));
                }
            }
        }
        Ok(SbmParams { pi, b })
    }

    /// Equal proportions `1/K`.
    pub fn balanced(k: usize) -> Vec<f64> {
        vec![1.0 / k as f64; k]
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn link_probability(&self, a: usize, b: usize) -> f64 {
        self.b[a * self.k() + b]
    }

    /// Expected degree of a node, `(n - 1) Σ_ab π_a π_b B_ab`.
    pub fn expected_mean_degree(&self, n: usize) -> f64 {
        let k = self.k();
        let mut s = 0.0;
        for a in 0..k {
            for c in 0..k {
                s += self.pi[a] * self.pi[c] * self.b[a * k + c];
            }
        }
        (n as f64 - 1.0) * s
    }
}

/// The planted-partition block model `B = ρ_n a ((1 - r) I + r J)`.
pub fn planted_partition_params(rho_n: f64, a: f64, r: f64, pi: Vec<f64>) -> Result<SbmParams> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid!("separation r = {r} must lie in [0, 1]"));
    }
    let p = rho_n * a;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid!("rho_n * a = {p} must lie in [0, 1]"));
    }
    let k = pi.len();
    let b = (0..k * k)
        .map(|idx| if idx / k == idx % k { p } else { p * r })
        .collect();
    SbmParams::new(pi, b)
}

/// A graph together with its planted 0-based labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub k: usize,
}

impl LabeledGraph {
    pub fn membership(&self) -> MembershipMatrix {
        MembershipMatrix::from_labels(self.k, &self.labels).expect("labels in range by construction")
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Cluster sizes `round(n π_k)` with largest-remainder correction so they sum to `n`.
pub fn proportional_sizes(pi: &[f64], n: usize) -> Vec<usize> {
    let exact: Vec<f64> = pi.iter().map(|&p| p * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|&x| libm::floor(x) as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..pi.len()).collect();
    // Largest fractional part first; ties to the lower block index.
    order.sort_by(|&a, &b| {
        let fa = exact[a] - sizes[a] as f64;
        let fb = exact[b] - sizes[b] as f64;
        fb.partial_cmp(&fa).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &k in order.iter().cycle().take(n.saturating_sub(assigned)) {
        sizes[k] += 1;
    }
    sizes
}

/// Samples a graph from the block model. Block sizes are deterministic
/// (proportional allocation); node order is a seeded shuffle; every pair is an
/// independent Bernoulli draw.
pub fn generate_sbm(params: &SbmParams, n: usize, seed: u64) -> Result<LabeledGraph> {
    let k = params.k();
    if n < k {
        return Err(invalid!("need at least K = {k} nodes, got {n}"));
    }
    let sizes = proportional_sizes(params.pi(), n);
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(invalid!("block {empty} would be empty with n = {n}"));
    }
    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(block, &s)| core::iter::repeat_n(block, s))
        .collect();
    let mut rng = rng::seeded(seed);
    labels.shuffle(&mut rng);

    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let p = params.link_probability(labels[i], labels[j]);
            if rng.random::<f64>() < p {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    // Pushes happen in ascending order of the partner, so lists are already sorted.
    Ok(LabeledGraph { graph: Graph { adj }, labels, k })
}

/// A node subset (sorted ascending) with the graph it induces. Local node `a`
/// corresponds to global node `nodes[a]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphSample {
    pub nodes: Vec<usize>,
    pub graph: Graph,
}

impl SubgraphSample {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.nodes.binary_search(&global).ok()
    }
}

/// The subgraph induced by `nodes` (any order, duplicates ignored).
pub fn induced_subgraph(graph: &Graph, nodes: &[usize]) -> Result<SubgraphSample> {
    let n = graph.n();
    if let Some(&bad) = nodes.iter().find(|&&u| u >= n) {
        return Err(invalid!("node {bad} out of range for {n} nodes"));
    }
    let mut nodes = nodes.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let adj = nodes
        .iter()
        .map(|&u| {
            // Both lists are sorted: merge-intersect.
            let mut local = Vec::new();
            let (mut a, mut b) = (0, 0);
            let nb = graph.neighbors(u);
            while a < nb.len() && b < nodes.len() {
                match nb[a].cmp(&nodes[b]) {
                    core::cmp::Ordering::Less => a += 1,
                    core::cmp::Ordering::Greater => b += 1,
                    core::cmp::Ordering::Equal => {
                        local.push(b);
                        a += 1;
                        b += 1;
                    }
                }
            }
            local
        })
        .collect();
    Ok(SubgraphSample { nodes, graph: Graph { adj } })
}

/// Component id per node, numbered in order of smallest member.
pub fn connected_components(graph: &Graph) -> Vec<usize> {
    let n = graph.n();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in graph.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Nodes of a largest component, ascending; ties go to the component holding the
/// smallest node id.
pub fn largest_connected_component(graph: &Graph) -> Vec<usize> {
    let comp = connected_components(graph);
    let count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c] += 1;
    }
    // Components are numbered by smallest member, so the first maximum wins ties.
    let Some(best) = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))) else {
        return Vec::new();
    };
    (0..graph.n()).filter(|&u| comp[u] == best).collect()
}

/// Nodes whose degree is not exactly one.
pub fn non_leaf_nodes(graph: &Graph) -> Vec<usize> {
    (0..graph.n()).filter(|&u| graph.degree(u) != 1).collect()
}
