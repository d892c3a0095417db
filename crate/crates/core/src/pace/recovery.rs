//! Turning an estimated clustering matrix into labels.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::cluster::{kmeans, top_k_eigenpairs, EigenOptions, SymmetricOperator};
use crate::error::{check_dim, invalid, Result};
use crate::linalg::{dot, squared_distance, DenseMatrix};
use crate::membership::MembershipMatrix;
use crate::rng::{self, Rng};

/// How labels are recovered from `Ĉ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
#[derive(Default)]
pub enum Recovery {
    /// k-means on `ĈR/√s`.
    ProjectionKmeans { s: usize },
    /// DGCluster on `ĈR/√s`, merging guided by `Ĉ`.
    ProjectionDgcluster { s: usize },
    /// Normalized spectral clustering of `Ĉ` as an affinity matrix: top-`K`
    /// eigenvectors of `D^{-1/2} Ĉ D^{-1/2}` (`D` the row sums), rows scaled to
    /// unit length, then k-means.
    #[default]
    SpectralOnChat,
}


impl Recovery {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Recovery::ProjectionKmeans { s } | Recovery::ProjectionDgcluster { s } if s == 0 => {
                Err(invalid!("projection dimension s must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

/// A standard Gaussian `n × s` matrix determined by `seed`.
pub fn gaussian_matrix(n: usize, s: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng::seeded(seed);
    DenseMatrix::from_vec(n, s, (0..n * s).map(|_| StandardNormal.sample(&mut rng)).collect())
        .expect("shape matches")
}

/// `Ĉ R / √s` for a given `n × s` matrix `R`.
pub fn project_rows_with(chat: &DenseMatrix, r: &DenseMatrix) -> Result<DenseMatrix> {
    check_dim(chat.cols(), r.rows())?;
    let mut out = chat.matmul(r)?;
    let scale = 1.0 / libm::sqrt(r.cols() as f64);
    out.as_mut_slice().iter_mut().for_each(|x| *x *= scale);
    Ok(out)
}

/// Random projection `Ĉ R / √s` with standard Gaussian `R` drawn from `seed`.
pub fn project_rows(chat: &DenseMatrix, s: usize, seed: u64) -> Result<DenseMatrix> {
    if s == 0 {
        return Err(invalid!("projection dimension s must be at least 1"));
    }
    project_rows_with(chat, &gaussian_matrix(chat.cols(), s, seed))
}

/// Greedy threshold clustering: repeatedly take a uniformly random unassigned
/// root and absorb every unassigned row within distance `gamma` of it. Returns
/// 0-based block labels.
pub fn naive_cluster(rows: &DenseMatrix, gamma: f64, rng: &mut Rng) -> Vec<usize> {
    let n = rows.rows();
    let mut labels = vec![usize::MAX; n];
    let mut unassigned: Vec<usize> = (0..n).collect();
    let gamma2 = gamma * gamma;
    let mut block = 0;
    while !unassigned.is_empty() {
        let root = unassigned.remove(rng.random_range(0..unassigned.len()));
        labels[root] = block;
        let r = rows.row(root);
        unassigned.retain(|&j| {
            if squared_distance(r, rows.row(j)) <= gamma2 {
                labels[j] = block;
                false
            } else {
                true
            }
        });
        block += 1;
    }
    labels
}

/// Merges blocks `a` and `b`: the larger label becomes the smaller one and labels
/// above it shift down by one.
pub fn merge(sigma: &[usize], a: usize, b: usize) -> Result<Vec<usize>> {
    if a == b {
        return Err(invalid!("cannot merge block {a} with itself"));
    }
    for block in [a, b] {
        if !sigma.contains(&block) {
            return Err(invalid!("block {block} is not present"));
        }
    }
    let (u, v) = (a.min(b), a.max(b));
    Ok(sigma
        .iter()
        .map(|&l| match l.cmp(&v) {
            core::cmp::Ordering::Equal => u,
            core::cmp::Ordering::Greater => l - 1,
            core::cmp::Ordering::Less => l,
        })
        .collect())
}

const SWEEP_STEP: f64 = 0.01;
const SWEEP_LIMIT: f64 = 2.0;

/// Distance-threshold sweep on the rows of `c_proj`, then greedy merging of the
/// block pair with the largest average `C` mass until `k` blocks remain.
pub fn dgcluster(c: &DenseMatrix, c_proj: &DenseMatrix, k: usize, seed: u64) -> Result<MembershipMatrix> {
    let n = c.rows();
    check_dim(n, c.cols())?;
    check_dim(n, c_proj.rows())?;
    if k == 0 || k > n {
        return Err(invalid!("DGCluster needs 1 <= K <= n (K = {k}, n = {n})"));
    }
    if k == 1 {
        return MembershipMatrix::from_labels(1, &vec![0; n]);
    }
    let theta = libm::sqrt(2.0 * n as f64 / k as f64);
    let mut sigma: Option<Vec<usize>> = None;
    let mut step = 1;
    loop {
        let c_mult = step as f64 * SWEEP_STEP;
        if c_mult > SWEEP_LIMIT + 1e-12 {
            break;
        }
        let trial = naive_cluster(c_proj, c_mult * theta, &mut rng::stream(seed, step as u64));
        let blocks = trial.iter().max().map_or(0, |&b| b + 1);
        if blocks < k {
            break;
        }
        sigma = Some(trial);
        step += 1;
    }
    let mut sigma = sigma.ok_or_else(|| {
        invalid!("DGCluster found fewer than {k} blocks at the smallest threshold")
    })?;
    let mut blocks = sigma.iter().max().map_or(0, |&b| b + 1);
    while blocks > k {
        let mut sizes = vec![0.0; blocks];
        for &l in &sigma {
            sizes[l] += 1.0;
        }
        let mut mass = vec![0.0; blocks * blocks];
        for i in 0..n {
            let row = c.row(i);
            let bi = sigma[i];
            for (j, &v) in row.iter().enumerate() {
                mass[bi * blocks + sigma[j]] += v;
            }
        }
        let mut best = (0, 1, f64::NEG_INFINITY);
        for i in 0..blocks {
            for j in i + 1..blocks {
                let r = mass[i * blocks + j] / (sizes[i] * sizes[j]);
                if r > best.2 {
                    best = (i, j, r);
                }
            }
        }
        sigma = merge(&sigma, best.0, best.1)?;
        blocks -= 1;
    }
    MembershipMatrix::from_labels(k, &sigma)
}

/// `I + D^{-1/2} Ĉ D^{-1/2}`; rows with non-positive sum are dropped. The shift
/// makes the largest eigenvalues also the largest in magnitude.
pub struct ChatAffinityOperator<'a> {
    chat: &'a DenseMatrix,
    inv_sqrt: Vec<f64>,
}

impl<'a> ChatAffinityOperator<'a> {
    pub fn new(chat: &'a DenseMatrix) -> Self {
        let inv_sqrt = (0..chat.rows())
            .map(|i| {
                let d: f64 = chat.row(i).iter().sum();
                if d > 0.0 {
                    1.0 / libm::sqrt(d)
                } else {
                    0.0
                }
            })
            .collect();
        ChatAffinityOperator { chat, inv_sqrt }
    }
}

impl SymmetricOperator for ChatAffinityOperator<'_> {
    fn dim(&self) -> usize {
        self.chat.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let scaled: Vec<f64> = x.iter().zip(&self.inv_sqrt).map(|(a, s)| a * s).collect();
        for (r, out) in y.iter_mut().enumerate() {
            let s = self.inv_sqrt[r];
            *out = x[r] + if s > 0.0 { s * dot(self.chat.row(r), &scaled) } else { 0.0 };
        }
    }
}

/// Labels from `Ĉ` via the chosen recovery path.
pub fn recover_membership(
    chat: &DenseMatrix,
    k: usize,
    recovery: Recovery,
    kmeans_restarts: usize,
    seed: u64,
) -> Result<MembershipMatrix> {
    recovery.validate()?;
    let n = chat.rows();
    check_dim(n, chat.cols())?;
    if k == 0 || k > n {
        return Err(invalid!("recovery needs 1 <= K <= n (K = {k}, n = {n})"));
    }
    let labels = match recovery {
        Recovery::ProjectionKmeans { s } => {
            let proj = project_rows(chat, s, rng::derive(seed, 0))?;
            kmeans(&proj, k, kmeans_restarts, rng::derive(seed, 1))?.labels
        }
        Recovery::ProjectionDgcluster { s } => {
            let proj = project_rows(chat, s, rng::derive(seed, 0))?;
            return dgcluster(chat, &proj, k, rng::derive(seed, 1));
        }
        Recovery::SpectralOnChat => {
            let opts = EigenOptions { seed: rng::derive(seed, 0), ..EigenOptions::default() };
            let pairs = top_k_eigenpairs(&ChatAffinityOperator::new(chat), k, &opts)?;
            let mut embedding = DenseMatrix::from_fn(n, k, |i, j| pairs.vectors[j][i]);
            for i in 0..n {
                let row = embedding.row_mut(i);
                let len = libm::sqrt(row.iter().map(|x| x * x).sum::<f64>());
                if len > 0.0 {
                    row.iter_mut().for_each(|x| *x /= len);
                }
            }
            kmeans(&embedding, k, kmeans_restarts, rng::derive(seed, 1))?.labels
        }
    };
    MembershipMatrix::from_labels(k, &labels)
}
