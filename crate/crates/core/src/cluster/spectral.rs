//! Spectral clustering on the adjacency matrix, its regularized form, or the
//! regularized symmetric Laplacian with row-normalized embedding.

use alloc::vec::Vec;

use super::eigen::{top_k_eigenpairs, EigenOptions, SymmetricOperator};
use super::kmeans::kmeans;
use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;
use crate::membership::MembershipMatrix;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SpectralVariant {
    Adjacency,
    RegularizedAdjacency,
    LaplacianRownorm,
}

/// Regularization strength; `Auto` resolves to the graph's mean degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    Auto,
    Value(f64),
}

impl Regularizer {
    pub fn resolve(&self, graph: &Graph) -> f64 {
        match *self {
            Regularizer::Auto => graph.mean_degree(),
            Regularizer::Value(v) => v,
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Regularizer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match *self {
            Regularizer::Auto => s.serialize_str("auto"),
            Regularizer::Value(v) => s.serialize_f64(v),
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Regularizer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Regularizer;

            fn expecting(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str("a non-negative number or \"auto\"")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> core::result::Result<Regularizer, E> {
                if v == "auto" {
                    Ok(Regularizer::Auto)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> core::result::Result<Regularizer, E> {
                if v >= 0.0 && v.is_finite() {
                    Ok(Regularizer::Value(v))
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Float(v), &self))
                }
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> core::result::Result<Regularizer, E> {
                Ok(Regularizer::Value(v as f64))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> core::result::Result<Regularizer, E> {
                self.visit_f64(v as f64)
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[cfg(feature = "serde")]
fn default_regularizer() -> Regularizer {
    Regularizer::Auto
}
fn default_tol() -> f64 {
    EigenOptions::default().tol
}
fn default_max_iter() -> usize {
    EigenOptions::default().max_iter
}
fn default_restarts() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SpectralOptions {
    pub variant: SpectralVariant,
    #[cfg_attr(feature = "serde", serde(default = "default_regularizer"))]
    pub regularizer: Regularizer,
    #[cfg_attr(feature = "serde", serde(default = "default_tol"))]
    pub eig_tol: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_max_iter"))]
    pub eig_max_iter: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_restarts"))]
    pub kmeans_restarts: usize,
}

impl SpectralOptions {
    pub fn new(variant: SpectralVariant) -> Self {
        SpectralOptions {
            variant,
            regularizer: Regularizer::Auto,
            eig_tol: default_tol(),
            eig_max_iter: default_max_iter(),
            kmeans_restarts: default_restarts(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eig_tol > 0.0) {
            return Err(invalid!("eig_tol must be positive"));
        }
        if self.eig_max_iter == 0 || self.kmeans_restarts == 0 {
            return Err(invalid!("eig_max_iter and kmeans_restarts must be at least 1"));
        }
        if let Regularizer::Value(v) = self.regularizer {
            if !(v >= 0.0) {
                return Err(invalid!("regularizer must be non-negative"));
            }
        }
        Ok(())
    }
}

/// `A + (reg/n)·J`.
pub struct AdjacencyOperator<'a> {
    graph: &'a Graph,
    reg: f64,
}

impl<'a> AdjacencyOperator<'a> {
    pub fn new(graph: &'a Graph, reg: f64) -> Self {
        AdjacencyOperator { graph, reg }
    }
}

impl SymmetricOperator for AdjacencyOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.graph.adjacency_matvec(x, y);
        if self.reg != 0.0 {
            let shift = self.reg / self.graph.n() as f64 * x.iter().sum::<f64>();
            y.iter_mut().for_each(|v| *v += shift);
        }
    }
}

/// `I + D_τ^{-1/2}(A + (τ/n)J)D_τ^{-1/2}` with `D_τ = D + τI`. The identity shift
/// makes the spectrum non-negative so the largest-magnitude eigenvalues are the
/// largest ones. Isolated nodes with `τ = 0` are scaled by zero.
pub struct LaplacianOperator<'a> {
    graph: &'a Graph,
    tau: f64,
    inv_sqrt: Vec<f64>,
}

impl<'a> LaplacianOperator<'a> {
    pub fn new(graph: &'a Graph, tau: f64) -> Self {
        let inv_sqrt = (0..graph.n())
            .map(|u| {
                let d = graph.degree(u) as f64 + tau;
                if d > 0.0 {
                    1.0 / libm::sqrt(d)
                } else {
                    0.0
                }
            })
            .collect();
        LaplacianOperator { graph, tau, inv_sqrt }
    }
}

impl SymmetricOperator for LaplacianOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let scaled: Vec<f64> = x.iter().zip(&self.inv_sqrt).map(|(a, s)| a * s).collect();
        self.graph.adjacency_matvec(&scaled, y);
        let shift = self.tau / self.graph.n() as f64 * scaled.iter().sum::<f64>();
        for ((v, s), a) in y.iter_mut().zip(&self.inv_sqrt).zip(x) {
            *v = s * (*v + shift) + a;
        }
    }
}

/// The `k`-column spectral embedding of `graph` (rows are nodes).
pub fn spectral_embedding(graph: &Graph, k: usize, opts: &SpectralOptions, seed: u64) -> Result<DenseMatrix> {
    opts.validate()?;
    let n = graph.n();
    if k == 0 || k > n {
        return Err(invalid!("spectral clustering needs 1 <= K <= n (K = {k}, n = {n})"));
    }
    let eig = EigenOptions { tol: opts.eig_tol, max_iter: opts.eig_max_iter, seed };
    let reg = opts.regularizer.resolve(graph);
    let pairs = match opts.variant {
        SpectralVariant::Adjacency => top_k_eigenpairs(&AdjacencyOperator::new(graph, 0.0), k, &eig)?,
        SpectralVariant::RegularizedAdjacency => top_k_eigenpairs(&AdjacencyOperator::new(graph, reg), k, &eig)?,
        SpectralVariant::LaplacianRownorm => top_k_eigenpairs(&LaplacianOperator::new(graph, reg), k, &eig)?,
    };
    let mut embedding = DenseMatrix::from_fn(n, k, |i, j| pairs.vectors[j][i]);
    if opts.variant == SpectralVariant::LaplacianRownorm {
        for i in 0..n {
            let row = embedding.row_mut(i);
            let len = libm::sqrt(row.iter().map(|x| x * x).sum::<f64>());
            if len > 0.0 {
                row.iter_mut().for_each(|x| *x /= len);
            }
        }
    }
    Ok(embedding)
}

/// Spectral clustering: top-`k` eigenvectors followed by multi-restart k-means.
pub fn spectral_cluster(graph: &Graph, k: usize, opts: &SpectralOptions, seed: u64) -> Result<MembershipMatrix> {
    let embedding = spectral_embedding(graph, k, opts, rng::derive(seed, 0))?;
    let km = kmeans(&embedding, k, opts.kmeans_restarts, rng::derive(seed, 1))?;
    MembershipMatrix::from_labels(k, &km.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, SbmParams};
    use crate::membership::misclustering_fraction;
    use alloc::vec;
    use pace_testkit::jacobi_eigen;

    fn two_cliques(size: usize) -> Graph {
        let mut edges = Vec::new();
        for block in 0..2 {
            for i in 0..size {
                for j in 0..i {
                    edges.push((block * size + i, block * size + j));
                }
            }
        }
        Graph::from_edges(2 * size, edges).unwrap()
    }

    fn dense(op: &dyn SymmetricOperator) -> Vec<Vec<f64>> {
        let d = op.dim();
        let mut cols = Vec::new();
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let mut y = vec![0.0; d];
            op.apply(&e, &mut y);
            cols.push(y);
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
    }

    #[test]
    fn cliques_split_exactly() {
        let g = two_cliques(6);
        let truth = MembershipMatrix::from_labels(2, &[0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]).unwrap();
        for variant in [SpectralVariant::Adjacency, SpectralVariant::RegularizedAdjacency, SpectralVariant::LaplacianRownorm] {
            let z = spectral_cluster(&g, 2, &SpectralOptions::new(variant), 3).unwrap();
            assert_eq!(misclustering_fraction(&z, &truth).unwrap(), 0.0, "{variant:?}");
        }
    }

    #[test]
    fn isolated_nodes_do_not_crash() {
        let g = Graph::empty(5);
        for variant in [SpectralVariant::Adjacency, SpectralVariant::RegularizedAdjacency, SpectralVariant::LaplacianRownorm] {
            let z = spectral_cluster(&g, 2, &SpectralOptions::new(variant), 0).unwrap();
            assert_eq!(z.n(), 5);
            assert!(z.is_fully_assigned());
        }
    }

    #[test]
    fn strong_sbm_is_recovered() {
        let params = SbmParams::new(vec![0.5, 0.5], vec![0.5, 0.05, 0.05, 0.5]).unwrap();
        for seed in 0..5 {
            let lg = generate_sbm(&params, 400, seed).unwrap();
            let z = spectral_cluster(&lg.graph, 2, &SpectralOptions::new(SpectralVariant::Adjacency), seed).unwrap();
            assert!(misclustering_fraction(&z, &lg.membership()).unwrap() <= 0.02);
        }
    }

    #[test]
    fn laplacian_operator_matches_dense_definition() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 0), (3, 4)]).unwrap();
        let tau = 0.7;
        let m = dense(&LaplacianOperator::new(&g, tau));
        for i in 0..5 {
            for j in 0..5 {
                let a = if g.has_edge(i, j) { 1.0 } else { 0.0 } + tau / 5.0;
                let di = g.degree(i) as f64 + tau;
                let dj = g.degree(j) as f64 + tau;
                let expected = a / (di * dj).sqrt() + if i == j { 1.0 } else { 0.0 };
                assert!((m[i][j] - expected).abs() < 1e-12);
            }
        }
        // Shifted spectrum is non-negative.
        let (values, _) = jacobi_eigen(&m);
        assert!(values.iter().all(|&v| v > -1e-9));
    }

    #[test]
    fn regularized_operator_adds_constant() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let m = dense(&AdjacencyOperator::new(&g, 1.5));
        assert!((m[0][1] - 1.5).abs() < 1e-12 && (m[2][2] - 0.5).abs() < 1e-12);
    }
}
