//! Piecewise averaged community estimation.
//!
//! Each admissible subgraph is clustered independently; the co-membership votes
//! are averaged pair by pair into `Ĉ`, pairs seen fewer than `τ` times are zeroed,
//! and labels are recovered from `Ĉ`.

mod accumulator;
mod recovery;

use alloc::vec::Vec;

pub use accumulator::{threshold_chat, ClusteringMatrixAccumulator, PairVotes, WeightScheme};
pub use recovery::{
    dgcluster, gaussian_matrix, merge, ChatAffinityOperator, naive_cluster, project_rows, project_rows_with, recover_membership,
    Recovery,
};

use crate::cluster::BaseClusterer;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;
use crate::membership::MembershipMatrix;
use crate::par;
use crate::rng;
use crate::sampling::{draw_subgraphs, DrawnSample, SamplerSpec};
use crate::timing::Stopwatch;

/// The co-occurrence threshold `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TauMode {
    Absolute(f64),
    /// `τ = ⌈θ · E[N_ij]⌉`, with `E[N_ij]` the mean realized off-diagonal count.
    Fraction(f64),
}

impl Default for TauMode {
    fn default() -> Self {
        TauMode::Fraction(0.5)
    }
}

#[cfg(feature = "serde")]
fn default_restarts() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PaceConfig {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: usize,
    pub sampler: SamplerSpec,
    #[cfg_attr(feature = "serde", serde(default))]
    pub tau_mode: TauMode,
    #[cfg_attr(feature = "serde", serde(default))]
    pub weight_scheme: WeightScheme,
    #[cfg_attr(feature = "serde", serde(default))]
    pub recovery: Recovery,
    /// Optional binarization `Ĉ > η` before recovery.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub eta: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_restarts"))]
    pub kmeans_restarts: usize,
}

impl PaceConfig {
    pub fn new(t: usize, sampler: SamplerSpec) -> Self {
        PaceConfig {
            t,
            sampler,
            tau_mode: TauMode::default(),
            weight_scheme: WeightScheme::Uniform,
            recovery: Recovery::SpectralOnChat,
            eta: None,
            kmeans_restarts: 10,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.t == 0 {
            return Err(invalid!("T must be at least 1"));
        }
        self.sampler.validate()?;
        if self.sampler.m_star < k {
            return Err(invalid!("m_star = {} must be at least K = {k}", self.sampler.m_star));
        }
        match self.tau_mode {
            TauMode::Absolute(tau) if !(tau >= 1.0) => return Err(invalid!("absolute tau must be >= 1")),
            TauMode::Fraction(theta) if !(theta > 0.0 && theta < 1.0) => {
                return Err(invalid!("theta must lie in (0, 1)"))
            }
            _ => {}
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(invalid!("eta must lie in (0, 1)"));
            }
        }
        if self.kmeans_restarts == 0 {
            return Err(invalid!("kmeans_restarts must be at least 1"));
        }
        self.recovery.validate()
    }
}

/// Per-subgraph record of one run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubgraphDiagnostics {
    pub size: usize,
    pub admissible: bool,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PhaseTimings {
    pub sampling: f64,
    /// Wall-clock time of the (parallel) base clustering phase.
    pub base_clustering: f64,
    pub stitching: f64,
    pub recovery: f64,
}

#[derive(Clone, Debug)]
pub struct PaceResult {
    /// `Ĉ_τ`, or `Ĉ_η` when thresholding is enabled.
    pub chat: DenseMatrix,
    pub tau: f64,
    /// Fraction of node pairs with `N_ij ≥ τ`.
    pub coverage: f64,
    pub membership: MembershipMatrix,
    pub subgraphs: Vec<SubgraphDiagnostics>,
    pub timings: PhaseTimings,
}

/// Clusters every admissible sample; `None` for inadmissible ones.
pub(crate) fn cluster_samples(
    draws: &[DrawnSample],
    k: usize,
    base: &dyn BaseClusterer,
    seed: u64,
) -> Result<(Vec<Option<MembershipMatrix>>, Vec<SubgraphDiagnostics>)> {
    let outcomes = par::map_indexed(draws.len(), |l| {
        let d = &draws[l];
        if !d.admissible {
            return (Ok(None), 0.0);
        }
        let watch = Stopwatch::start();
        let z = base.cluster_sample(&d.sample, k, rng::derive(seed, l as u64));
        (z.map(Some), watch.seconds())
    });
    let mut locals = Vec::with_capacity(draws.len());
    let mut diagnostics = Vec::with_capacity(draws.len());
    for (d, (z, seconds)) in draws.iter().zip(outcomes) {
        locals.push(z?);
        diagnostics.push(SubgraphDiagnostics { size: d.sample.len(), admissible: d.admissible, seconds });
    }
    Ok((locals, diagnostics))
}

/// Resolves `τ` from the realized counts.
pub fn resolve_tau(mode: TauMode, acc: &ClusteringMatrixAccumulator) -> f64 {
    match mode {
        TauMode::Absolute(tau) => tau,
        TauMode::Fraction(theta) => libm::ceil(theta * acc.mean_offdiagonal_count() - 1e-9).max(1.0),
    }
}

/// Runs the full estimator on `graph` with `k` clusters.
pub fn run_pace(
    graph: &Graph,
    k: usize,
    config: &PaceConfig,
    base: &dyn BaseClusterer,
    seed: u64,
) -> Result<PaceResult> {
    config.validate(k)?;
    let n = graph.n();
    if k > n {
        return Err(invalid!("K = {k} exceeds the node count {n}"));
    }
    let mut timings = PhaseTimings::default();

    let watch = Stopwatch::start();
    let draws = draw_subgraphs(graph, &config.sampler, config.t, rng::derive(seed, 0))?;
    timings.sampling = watch.seconds();

    let watch = Stopwatch::start();
    let (locals, subgraphs) = cluster_samples(&draws, k, base, rng::derive(seed, 1))?;
    timings.base_clustering = watch.seconds();

    let watch = Stopwatch::start();
    let clustered: Vec<_> =
        draws.iter().zip(&locals).filter_map(|(d, z)| z.as_ref().map(|z| (&d.sample, z))).collect();
    if clustered.is_empty() {
        return Err(Error::NoAdmissibleSubgraph { m_star: config.sampler.m_star });
    }
    let acc = ClusteringMatrixAccumulator::accumulate_all(n, &clustered, config.weight_scheme)?;
    let tau = resolve_tau(config.tau_mode, &acc);
    let mut chat = acc.finalize(tau);
    let coverage = acc.coverage(tau);
    debug_assert!(chat.is_symmetric());
    if let Some(eta) = config.eta {
        chat = threshold_chat(&chat, eta);
    }
    timings.stitching = watch.seconds();

    let watch = Stopwatch::start();
    let membership = recover_membership(&chat, k, config.recovery, config.kmeans_restarts, rng::derive(seed, 2))?;
    timings.recovery = watch.seconds();

    Ok(PaceResult { chat, tau, coverage, membership, subgraphs, timings })
}

#[cfg(test)]
mod tests;
