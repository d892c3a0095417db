//! Vote accumulation for the clustering-matrix estimate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};
use crate::graph::SubgraphSample;
use crate::linalg::DenseMatrix;
use crate::membership::MembershipMatrix;
use crate::par;

/// Per-pair weight applied to the votes of one subgraph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WeightScheme {
    #[default]
    Uniform,
    /// `w = |S|`.
    SubgraphSize,
    /// `w = deg_S(i) + deg_S(j)`.
    DegreePair,
}

impl WeightScheme {
    fn weight(self, sample: &SubgraphSample, a: usize, b: usize) -> u32 {
        match self {
            WeightScheme::Uniform => 1,
            WeightScheme::SubgraphSize => sample.len() as u32,
            WeightScheme::DegreePair => (sample.graph.degree(a) + sample.graph.degree(b)) as u32,
        }
    }
}

/// One cell of the accumulator: weighted same-cluster votes and weighted
/// co-occurrence count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairVotes {
    pub sum: u32,
    pub count: u32,
}

/// Dense symmetric `n × n` vote and count matrices.
///
/// Weights are integers, so the totals are exact and independent of the order
/// in which subgraphs are added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusteringMatrixAccumulator {
    n: usize,
    cells: Vec<PairVotes>,
}

impl ClusteringMatrixAccumulator {
    pub fn new(n: usize) -> Self {
        ClusteringMatrixAccumulator { n, cells: vec![PairVotes::default(); n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sum(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.n + j].sum
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.n + j].count
    }

    /// Adds the votes of one clustered subgraph.
    pub fn accumulate(&mut self, sample: &SubgraphSample, local: &MembershipMatrix, scheme: WeightScheme) -> Result<()> {
        check_local(sample, local)?;
        let labels = local.labels();
        for (a, &i) in sample.nodes.iter().enumerate() {
            for (b, &j) in sample.nodes.iter().enumerate() {
                let w = scheme.weight(sample, a, b);
                let cell = &mut self.cells[i * self.n + j];
                cell.count += w;
                if labels[a] == labels[b] {
                    cell.sum += w;
                }
            }
        }
        Ok(())
    }

    /// Accumulates many clustered subgraphs at once, filling rows in parallel.
    pub fn accumulate_all(
        n: usize,
        clustered: &[(&SubgraphSample, &MembershipMatrix)],
        scheme: WeightScheme,
    ) -> Result<Self> {
        let mut occurrences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (l, (sample, local)) in clustered.iter().enumerate() {
            check_local(sample, local)?;
            if let Some(&bad) = sample.nodes.iter().find(|&&u| u >= n) {
                return Err(invalid!("sample node {bad} out of range for {n} nodes"));
            }
            for (a, &i) in sample.nodes.iter().enumerate() {
                occurrences[i].push((l, a));
            }
        }
        let mut acc = ClusteringMatrixAccumulator::new(n);
        par::for_each_row(&mut acc.cells, n, |i, row| {
            for &(l, a) in &occurrences[i] {
                let (sample, local) = clustered[l];
                let labels = local.labels();
                for (b, &j) in sample.nodes.iter().enumerate() {
                    let w = scheme.weight(sample, a, b);
                    row[j].count += w;
                    if labels[a] == labels[b] {
                        row[j].sum += w;
                    }
                }
            }
        });
        Ok(acc)
    }

    /// Mean count over ordered off-diagonal pairs.
    pub fn mean_offdiagonal_count(&self) -> f64 {
        let n = self.n;
        if n < 2 {
            return 0.0;
        }
        let total: u64 = self.cells.iter().map(|c| c.count as u64).sum::<u64>()
            - (0..n).map(|i| self.count(i, i) as u64).sum::<u64>();
        total as f64 / (n * (n - 1)) as f64
    }

    /// Fraction of unordered pairs `i < j` with `N_ij ≥ τ`.
    pub fn coverage(&self, tau: f64) -> f64 {
        let n = self.n;
        if n < 2 {
            return 1.0;
        }
        let covered = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.count(i, j) as f64 >= tau)
            .count();
        covered as f64 / (n * (n - 1) / 2) as f64
    }

    pub fn min_count(&self) -> u32 {
        self.cells.iter().map(|c| c.count).min().unwrap_or(0)
    }

    /// `Ĉ_ij = 1[N_ij ≥ τ] · sum_ij / N_ij` (zero where `N_ij = 0`).
    pub fn finalize(&self, tau: f64) -> DenseMatrix {
        let n = self.n;
        let mut chat = DenseMatrix::zeros(n, n);
        for (out, cell) in chat.as_mut_slice().iter_mut().zip(&self.cells) {
            if cell.count > 0 && cell.count as f64 >= tau {
                *out = cell.sum as f64 / cell.count as f64;
            }
        }
        chat
    }
}

fn check_local(sample: &SubgraphSample, local: &MembershipMatrix) -> Result<()> {
    check_dim(sample.len(), local.n())?;
    if !local.is_fully_assigned() {
        return Err(invalid!("local clustering leaves nodes unassigned"));
    }
    Ok(())
}

/// `Ĉ_η = [Ĉ > η]`, entrywise.
pub fn threshold_chat(chat: &DenseMatrix, eta: f64) -> DenseMatrix {
    let mut out = chat.clone();
    out.as_mut_slice().iter_mut().for_each(|x| *x = if *x > eta { 1.0 } else { 0.0 });
    out
}
