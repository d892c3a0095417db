//! Global alignment of local estimates.
//!
//! Subgraphs that overlap by at least `m1` nodes are joined in a super-graph. A
//! depth-first walk through its spanning tree visits every reachable subgraph;
//! each newly visited local labeling is permuted to agree with the estimate
//! built so far (or with its parent in the tree), kept only when enough of the
//! overlap agrees, and its votes are added per node. Nodes with at least `τ`
//! votes get the averaged row; the rest are left unassigned.

mod supergraph;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

pub use supergraph::{
    build_supergraph, lsh_overlap_candidates, overlap_size, spanning_traversal, SuperGraph, Traversal,
};

use crate::cluster::BaseClusterer;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::membership::{
    align, confusion, match_permutation, misclustering_fraction_extended, round_soft, MembershipMatrix,
    Permutation, SoftMembership,
};
use crate::pace::{cluster_samples, PhaseTimings, SubgraphDiagnostics, TauMode};
use crate::par;
use crate::rng;
use crate::sampling::{draw_subgraphs, SamplerSpec, Scheme};
use crate::timing::Stopwatch;

/// What a newly visited subgraph is aligned against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MatchTarget {
    /// The running average over every node covered so far.
    #[default]
    Union,
    /// The aligned labeling of the preceding subgraph on the walk.
    Previous,
}

/// Optional locality-sensitive hashing of the overlap search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct LshConfig {
    pub bands: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_bits"))]
    pub bits: usize,
}

#[cfg(feature = "serde")]
fn default_bits() -> usize {
    2
}

#[cfg(feature = "serde")]
fn default_validation() -> f64 {
    0.55
}

#[cfg(feature = "serde")]
fn default_traversals() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GaleConfig {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: usize,
    pub sampler: SamplerSpec,
    /// `Fraction(θ)` gives `τ = θ · Σ_ℓ |S_ℓ| / n` over admissible subgraphs,
    /// which is `θTm/n` for random `m`-subsets.
    #[cfg_attr(feature = "serde", serde(default))]
    pub tau_mode: TauMode,
    #[cfg_attr(feature = "serde", serde(default = "default_validation"))]
    pub validation_threshold: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_traversals"))]
    pub n_traversals: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub match_target: MatchTarget,
    /// Overlap needed for a super-graph edge; derived from the sample sizes when absent.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub m1: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub lsh: Option<LshConfig>,
}

impl GaleConfig {
    pub fn new(t: usize, sampler: SamplerSpec) -> Self {
        GaleConfig {
            t,
            sampler,
            tau_mode: TauMode::default(),
            validation_threshold: 0.55,
            n_traversals: 1,
            match_target: MatchTarget::Union,
            m1: None,
            lsh: None,
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
        if !(self.validation_threshold > 0.5 && self.validation_threshold <= 1.0) {
            return Err(invalid!("validation_threshold must lie in (0.5, 1]"));
        }
        if self.n_traversals == 0 {
            return Err(invalid!("n_traversals must be at least 1"));
        }
        if self.m1 == Some(0) {
            return Err(invalid!("m1 must be at least 1"));
        }
        if let Some(lsh) = self.lsh {
            if lsh.bands == 0 || lsh.bits == 0 || lsh.bits > 64 {
                return Err(invalid!("LSH needs bands >= 1 and 1 <= bits <= 64"));
            }
        }
        Ok(())
    }
}

/// Outcome of aligning one local labeling.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignOutcome {
    /// Maps current labels to reference labels.
    pub permutation: Permutation,
    pub accepted: bool,
    pub agreement: f64,
}

/// Aligns `current` to `reference`, both given on the same overlap rows. The
/// reference is hardened by row-wise argmax; the step is accepted when the
/// aligned labels agree on at least `threshold` of the overlap.
pub fn align_step(current: &MembershipMatrix, reference: &SoftMembership, threshold: f64) -> Result<AlignOutcome> {
    let k = current.k();
    if current.n() == 0 {
        return Ok(AlignOutcome { permutation: Permutation::identity(k), accepted: false, agreement: 0.0 });
    }
    let hard = round_soft(reference);
    let m = confusion(current, &hard)?;
    let permutation = match_permutation(&m);
    let agree: f64 = (0..k).map(|a| m.get(a, permutation.apply(a))).sum();
    let agreement = agree / current.n() as f64;
    Ok(AlignOutcome { permutation, accepted: agreement >= threshold, agreement })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepDiagnostics {
    pub x: usize,
    pub overlap: usize,
    pub agreement: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraversalDiagnostics {
    pub start: usize,
    pub walk: Vec<usize>,
    /// One entry per newly visited subgraph after the start.
    pub steps: Vec<StepDiagnostics>,
    /// Admissible subgraphs the walk could not reach.
    pub uncovered_subgraphs: Vec<usize>,
}

impl TraversalDiagnostics {
    pub fn all_accepted(&self) -> bool {
        self.steps.iter().all(|s| s.accepted)
    }
}

#[derive(Clone, Debug)]
pub struct GaleResult {
    /// `K` labels when every node passes the threshold, otherwise `K + 1` with
    /// label `K` marking the rest.
    pub membership: MembershipMatrix,
    /// Thresholded averaged votes (`n × K`); rows below `τ` are zero.
    pub soft: SoftMembership,
    /// `N_i`, summed over traversals.
    pub counts: Vec<u32>,
    /// Threshold applied to `counts` (per-traversal `τ` times the traversal count).
    pub tau: f64,
    /// Nodes with `N_i < τ`.
    pub uncovered: usize,
    pub m1: usize,
    pub supergraph_edges: usize,
    pub traversals: Vec<TraversalDiagnostics>,
    /// Node lists of every drawn subgraph.
    pub samples: Vec<Vec<usize>>,
    /// Local labelings, `None` for inadmissible subgraphs.
    pub locals: Vec<Option<MembershipMatrix>>,
    /// Local labelings after alignment in the first traversal; `None` when not
    /// reached or rejected.
    pub aligned: Vec<Option<MembershipMatrix>>,
    pub subgraphs: Vec<SubgraphDiagnostics>,
    pub timings: PhaseTimings,
}

/// `δ` of a possibly `K + 1`-labeled estimate against the truth.
pub fn gale_error_extended(result: &GaleResult, truth: &MembershipMatrix) -> Result<f64> {
    misclustering_fraction_extended(&result.membership, truth)
}

/// Per-node votes of one traversal.
struct Votes {
    k: usize,
    votes: Vec<u32>,
    counts: Vec<u32>,
}

impl Votes {
    fn new(n: usize, k: usize) -> Self {
        Votes { k, votes: vec![0; n * k], counts: vec![0; n] }
    }

    fn add(&mut self, nodes: &[usize], labels: &MembershipMatrix) {
        for (a, &u) in nodes.iter().enumerate() {
            let l = labels.label(a).expect("local labelings are fully assigned");
            self.votes[u * self.k + l] += 1;
            self.counts[u] += 1;
        }
    }

    /// Averaged rows for `rows`; every listed node must have a vote.
    fn average(&self, rows: &[usize]) -> SoftMembership {
        let k = self.k;
        let mut values = Vec::with_capacity(rows.len() * k);
        for &u in rows {
            let c = self.counts[u] as f64;
            values.extend(self.votes[u * k..(u + 1) * k].iter().map(|&v| v as f64 / c));
        }
        SoftMembership::new(rows.len(), k, values).expect("vote averages are row-stochastic")
    }

    /// Argmax label per node (ties to the smallest); `None` without votes.
    fn hard(&self) -> MembershipMatrix {
        let k = self.k;
        let labels = self
            .counts
            .iter()
            .enumerate()
            .map(|(u, &c)| {
                (c > 0).then(|| {
                    let row = &self.votes[u * k..(u + 1) * k];
                    let mut best = 0;
                    for (l, &v) in row.iter().enumerate() {
                        if v > row[best] {
                            best = l;
                        }
                    }
                    best as u32
                })
            })
            .collect();
        MembershipMatrix::new(k, labels).expect("argmax is within range")
    }

    fn permute(&mut self, perm: &Permutation) {
        let k = self.k;
        let mut row = vec![0; k];
        for chunk in self.votes.chunks_mut(k) {
            for (a, &v) in chunk.iter().enumerate() {
                row[perm.apply(a)] = v;
            }
            chunk.copy_from_slice(&row);
        }
    }
}

struct TraversalRun {
    votes: Votes,
    aligned: Vec<Option<MembershipMatrix>>,
    diagnostics: TraversalDiagnostics,
}

fn run_traversal(
    sg: &SuperGraph,
    start: usize,
    samples: &[&[usize]],
    locals: &[Option<MembershipMatrix>],
    admissible: &[bool],
    n: usize,
    k: usize,
    config: &GaleConfig,
) -> Result<TraversalRun> {
    let traversal = spanning_traversal(sg, start)?;
    let mut votes = Votes::new(n, k);
    let mut aligned: Vec<Option<MembershipMatrix>> = vec![None; samples.len()];
    let mut visited = vec![false; samples.len()];
    let mut steps = Vec::new();

    let first = locals[start].as_ref().expect("start subgraph is admissible");
    votes.add(samples[start], first);
    aligned[start] = Some(first.clone());
    visited[start] = true;

    for i in 1..traversal.walk.len() {
        let x = traversal.walk[i];
        if visited[x] {
            continue;
        }
        visited[x] = true;
        let local = locals[x].as_ref().expect("walk only reaches admissible subgraphs");
        let nodes = samples[x];
        let (rows, reference) = match config.match_target {
            MatchTarget::Union => {
                let rows: Vec<usize> = (0..nodes.len()).filter(|&a| votes.counts[nodes[a]] > 0).collect();
                let globals: Vec<usize> = rows.iter().map(|&a| nodes[a]).collect();
                (rows, Some(votes.average(&globals)))
            }
            MatchTarget::Previous => {
                let parent = traversal.walk[i - 1];
                let parent_nodes = samples[parent];
                let mut rows = Vec::new();
                let mut parent_rows = Vec::new();
                let mut b = 0;
                for (a, &u) in nodes.iter().enumerate() {
                    while b < parent_nodes.len() && parent_nodes[b] < u {
                        b += 1;
                    }
                    if b < parent_nodes.len() && parent_nodes[b] == u {
                        rows.push(a);
                        parent_rows.push(b);
                    }
                }
                let reference =
                    aligned[parent].as_ref().map(|z| SoftMembership::from_hard(&z.restrict(&parent_rows)));
                (rows, reference)
            }
        };
        let outcome = match reference {
            Some(reference) => align_step(&local.restrict(&rows), &reference, config.validation_threshold)?,
            None => AlignOutcome { permutation: Permutation::identity(k), accepted: false, agreement: 0.0 },
        };
        steps.push(StepDiagnostics {
            x,
            overlap: rows.len(),
            agreement: outcome.agreement,
            accepted: outcome.accepted,
        });
        if outcome.accepted {
            let z = align(local, &outcome.permutation)?;
            votes.add(nodes, &z);
            aligned[x] = Some(z);
        }
    }

    let uncovered_subgraphs = traversal.uncovered.iter().copied().filter(|&a| admissible[a]).collect();
    Ok(TraversalRun {
        votes,
        aligned,
        diagnostics: TraversalDiagnostics { start, walk: traversal.walk, steps, uncovered_subgraphs },
    })
}

/// Default overlap threshold `⌈m²/2n⌉`, with `m` the mean admissible sample size
/// for neighborhood samplers.
fn default_m1(spec: &SamplerSpec, sizes: &[usize], n: usize) -> usize {
    let m = match spec.scheme {
        Scheme::RandomM => spec.m as f64,
        _ => sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64,
    };
    (libm::ceil(m * m / (2.0 * n as f64) - 1e-9) as usize).max(1)
}

/// Runs the estimator on `graph` with `k` clusters.
pub fn run_gale(
    graph: &Graph,
    k: usize,
    config: &GaleConfig,
    base: &dyn BaseClusterer,
    seed: u64,
) -> Result<GaleResult> {
    config.validate(k)?;
    let n = graph.n();
    if k == 0 || k > n {
        return Err(invalid!("K = {k} must lie in 1..={n}"));
    }
    let mut timings = PhaseTimings::default();

    let watch = Stopwatch::start();
    let draws = draw_subgraphs(graph, &config.sampler, config.t, rng::derive(seed, 0))?;
    timings.sampling = watch.seconds();

    let watch = Stopwatch::start();
    let (locals, subgraphs) = cluster_samples(&draws, k, base, rng::derive(seed, 1))?;
    timings.base_clustering = watch.seconds();

    let watch = Stopwatch::start();
    let samples: Vec<&[usize]> = draws.iter().map(|d| d.sample.nodes.as_slice()).collect();
    let admissible: Vec<bool> = locals.iter().map(Option::is_some).collect();
    let admissible_ids: Vec<usize> = (0..samples.len()).filter(|&l| admissible[l]).collect();
    if admissible_ids.is_empty() {
        return Err(Error::NoAdmissibleSubgraph { m_star: config.sampler.m_star });
    }
    let sizes: Vec<usize> = admissible_ids.iter().map(|&l| samples[l].len()).collect();
    let m1 = config.m1.unwrap_or_else(|| default_m1(&config.sampler, &sizes, n));
    let excluded: Vec<bool> = admissible.iter().map(|a| !a).collect();
    let candidates = match config.lsh {
        Some(lsh) => Some(lsh_overlap_candidates(&samples, n, lsh.bands, lsh.bits, rng::derive(seed, 3))?),
        None => None,
    };
    let sg = build_supergraph(&samples, m1, candidates.as_deref(), &excluded)?;
    if admissible_ids.len() >= 2 && sg.edge_count() == 0 {
        return Err(Error::StitchFailure(alloc::format!(
            "no two subgraphs overlap in at least m1 = {m1} nodes"
        )));
    }

    let tau_single = match config.tau_mode {
        TauMode::Absolute(tau) => tau,
        TauMode::Fraction(theta) => theta * sizes.iter().sum::<usize>() as f64 / n as f64,
    };

    let first = admissible_ids
        .iter()
        .copied()
        .max_by(|&a, &b| samples[a].len().cmp(&samples[b].len()).then(b.cmp(&a)))
        .expect("at least one admissible subgraph");
    let mut starts = vec![first];
    if config.n_traversals > 1 {
        let mut others: Vec<usize> = admissible_ids.iter().copied().filter(|&l| l != first).collect();
        others.shuffle(&mut rng::stream(seed, 2));
        if others.is_empty() {
            others.push(first);
        }
        starts.extend((0..config.n_traversals - 1).map(|i| others[i % others.len()]));
    }

    let runs = par::map_indexed(starts.len(), |r| {
        run_traversal(&sg, starts[r], &samples, &locals, &admissible, n, k, config)
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let reference = runs[0].votes.hard();
    let mut total = Votes::new(n, k);
    for run in &mut runs {
        let current = run.votes.hard();
        let both: Vec<usize> =
            (0..n).filter(|&u| reference.label(u).is_some() && current.label(u).is_some()).collect();
        let perm = match_permutation(&confusion(&current.restrict(&both), &reference.restrict(&both))?);
        run.votes.permute(&perm);
        for (t, v) in total.votes.iter_mut().zip(&run.votes.votes) {
            *t += v;
        }
        for (t, c) in total.counts.iter_mut().zip(&run.votes.counts) {
            *t += c;
        }
    }

    let tau = tau_single * starts.len() as f64;
    let kept: Vec<bool> = total.counts.iter().map(|&c| c > 0 && c as f64 >= tau).collect();
    let mut values = vec![0.0; n * k];
    for u in (0..n).filter(|&u| kept[u]) {
        let c = total.counts[u] as f64;
        for l in 0..k {
            values[u * k + l] = total.votes[u * k + l] as f64 / c;
        }
    }
    let soft = SoftMembership::new(n, k, values)?;
    let hard = round_soft(&soft);
    let uncovered = kept.iter().filter(|&&c| !c).count();
    let membership = if uncovered == 0 {
        hard
    } else {
        let labels = hard.labels().iter().map(|l| Some(l.unwrap_or(k as u32))).collect();
        MembershipMatrix::new(k + 1, labels)?
    };
    timings.stitching = watch.seconds();

    let aligned = core::mem::take(&mut runs[0].aligned);
    Ok(GaleResult {
        membership,
        soft,
        counts: total.counts,
        tau,
        uncovered,
        m1,
        supergraph_edges: sg.edge_count(),
        traversals: runs.into_iter().map(|r| r.diagnostics).collect(),
        samples: draws.into_iter().map(|d| d.sample.nodes).collect(),
        locals,
        aligned,
        subgraphs,
        timings,
    })
}
