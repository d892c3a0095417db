//! Base clustering algorithms applied to individual subgraphs.

pub mod eigen;
pub mod kmeans;
pub mod mean_field;
mod oracle;
pub mod spectral;

use alloc::boxed::Box;
use alloc::string::String;

use crate::error::{invalid, Result};
use crate::graph::{Graph, SubgraphSample};
use crate::membership::MembershipMatrix;

pub use eigen::{top_k_eigenpairs, EigenOptions, EigenPairs, SymmetricOperator};
pub use kmeans::{kmeans, KMeansResult};
pub use mean_field::{fit_mean_field, mean_field_sbm, MeanFieldFit};
pub use oracle::OracleClusterer;
pub use spectral::{spectral_cluster, spectral_embedding, Regularizer, SpectralOptions, SpectralVariant};

/// A clustering algorithm for a single graph.
///
/// Implementations must be pure given `(graph, k, seed)`: every node receives a
/// label in `0..k`.
pub trait BaseClusterer: Send + Sync {
    fn name(&self) -> &str;
    fn cluster(&self, graph: &Graph, k: usize, seed: u64) -> Result<MembershipMatrix>;

    /// Clusters a sampled subgraph. Stitching calls this entry point, so
    /// clusterers that need the global node ids (oracles, noise injection) can
    /// override it.
    fn cluster_sample(&self, sample: &SubgraphSample, k: usize, seed: u64) -> Result<MembershipMatrix> {
        self.cluster(&sample.graph, k, seed)
    }
}

#[derive(Clone, Debug)]
pub struct SpectralClusterer {
    name: String,
    pub options: SpectralOptions,
}

impl SpectralClusterer {
    pub fn new(name: &str, options: SpectralOptions) -> Self {
        SpectralClusterer { name: name.into(), options }
    }
}

impl BaseClusterer for SpectralClusterer {
    fn name(&self) -> &str {
        &self.name
    }

    fn cluster(&self, graph: &Graph, k: usize, seed: u64) -> Result<MembershipMatrix> {
        spectral_cluster(graph, k, &self.options, seed)
    }
}

#[derive(Clone, Debug)]
pub struct MeanFieldClusterer {
    pub restarts: usize,
}

impl BaseClusterer for MeanFieldClusterer {
    fn name(&self) -> &str {
        "mfl"
    }

    fn cluster(&self, graph: &Graph, k: usize, seed: u64) -> Result<MembershipMatrix> {
        mean_field_sbm(graph, k, self.restarts, seed)
    }
}

fn default_mfl_restarts() -> usize {
    10
}

/// A base clusterer chosen by name (`spectral_adj`, `rsc`, `laplacian_rn`,
/// `mfl`) with optional tuning overrides.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct BaseSpec {
    pub name: String,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub regularizer: Option<Regularizer>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub eig_tol: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub eig_max_iter: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub kmeans_restarts: Option<usize>,
    /// Random restarts for `mfl`.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub restarts: Option<usize>,
}

impl BaseSpec {
    pub fn named(name: &str) -> Self {
        BaseSpec { name: name.into(), ..BaseSpec::default() }
    }

    pub fn build(&self) -> Result<Box<dyn BaseClusterer>> {
        let variant = match self.name.as_str() {
            "spectral_adj" => SpectralVariant::Adjacency,
            "rsc" => SpectralVariant::RegularizedAdjacency,
            "laplacian_rn" => SpectralVariant::LaplacianRownorm,
            "mfl" => {
                let restarts = self.restarts.unwrap_or_else(default_mfl_restarts);
                if restarts == 0 {
                    return Err(invalid!("mfl restarts must be at least 1"));
                }
                return Ok(Box::new(MeanFieldClusterer { restarts }));
            }
            other => {
                return Err(invalid!(
                    "unknown base clusterer {other:?} (expected spectral_adj, rsc, laplacian_rn or mfl)"
                ))
            }
        };
        let mut options = SpectralOptions::new(variant);
        if let Some(r) = self.regularizer {
            options.regularizer = r;
        }
        if let Some(t) = self.eig_tol {
            options.eig_tol = t;
        }
        if let Some(m) = self.eig_max_iter {
            options.eig_max_iter = m;
        }
        if let Some(r) = self.kmeans_restarts {
            options.kmeans_restarts = r;
        }
        options.validate()?;
        Ok(Box::new(SpectralClusterer::new(&self.name, options)))
    }
}
