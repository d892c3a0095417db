//! Mean-field variational EM for the stochastic block model.
//!
//! Responsibilities `τ_ik` are updated node by node against closed-form
//! estimates of `π` and `B`; one sweep costs `O((n + E)·K²)`. The first start is
//! a regularized spectral labeling and later restarts perturb it.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::membership::MembershipMatrix;
use crate::rng;

use super::spectral::{spectral_cluster, SpectralOptions, SpectralVariant};

const MAX_SWEEPS: usize = 200;
const ELBO_TOL: f64 = 1e-6;
const B_FLOOR: f64 = 1e-10;
const PI_FLOOR: f64 = 1e-10;
/// Fraction of nodes relabeled at random in restarts after the first.
const PERTURB: f64 = 0.25;

#[derive(Clone, Debug)]
pub struct MeanFieldFit {
    /// Row-major `n × K` responsibilities.
    pub responsibilities: Vec<f64>,
    pub pi: Vec<f64>,
    /// Row-major `K × K` block probabilities.
    pub b: Vec<f64>,
    pub elbo: f64,
    pub sweeps: usize,
}

impl MeanFieldFit {
    pub fn hard_labels(&self, k: usize) -> Vec<usize> {
        self.responsibilities
            .chunks(k)
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

struct State<'a> {
    graph: &'a Graph,
    k: usize,
    tau: Vec<f64>,
    pi: Vec<f64>,
    b: Vec<f64>,
}

impl State<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.tau[i * self.k..(i + 1) * self.k]
    }

    fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.k];
        for row in self.tau.chunks(self.k) {
            for (a, &t) in s.iter_mut().zip(row) {
                *a += t;
            }
        }
        s
    }

    /// Ordered-pair edge mass `E_kl` and pair mass `P_kl` over `i ≠ j`.
    fn pair_masses(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let mut edges = vec![0.0; k * k];
        let mut self_pairs = vec![0.0; k * k];
        for i in 0..self.graph.n() {
            let ti = self.row(i);
            let mut nb = vec![0.0; k];
            for &j in self.graph.neighbors(i) {
                for (a, &t) in nb.iter_mut().zip(self.row(j)) {
                    *a += t;
                }
            }
            for p in 0..k {
                for q in 0..k {
                    edges[p * k + q] += ti[p] * nb[q];
                    self_pairs[p * k + q] += ti[p] * ti[q];
                }
            }
        }
        let s = self.column_sums();
        let pairs = (0..k * k).map(|pq| s[pq / k] * s[pq % k] - self_pairs[pq]).collect();
        (edges, pairs)
    }

    fn m_step(&mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.graph.n() as f64;
        self.pi = self.column_sums().into_iter().map(|s| (s / n).max(PI_FLOOR)).collect();
        let (edges, pairs) = self.pair_masses();
        self.b = edges
            .iter()
            .zip(&pairs)
            .map(|(&e, &p)| (if p > 0.0 { e / p } else { 0.0 }).clamp(B_FLOOR, 1.0 - B_FLOOR))
            .collect();
        (edges, pairs)
    }

    fn elbo(&self, edges: &[f64], pairs: &[f64]) -> f64 {
        let k = self.k;
        let mut value = 0.0;
        for row in self.tau.chunks(k) {
            for (c, &t) in row.iter().enumerate() {
                if t > 0.0 {
                    value += t * (libm::log(self.pi[c]) - libm::log(t));
                }
            }
        }
        let mut pair_term = 0.0;
        for pq in 0..k * k {
            let b = self.b[pq];
            pair_term += edges[pq] * libm::log(b) + (pairs[pq] - edges[pq]) * libm::log(1.0 - b);
        }
        value + 0.5 * pair_term
    }

    fn e_sweep(&mut self) {
        let k = self.k;
        let log_pi: Vec<f64> = self.pi.iter().map(|&p| libm::log(p)).collect();
        let log_odds: Vec<f64> = self.b.iter().map(|&b| libm::log(b) - libm::log(1.0 - b)).collect();
        let log_miss: Vec<f64> = self.b.iter().map(|&b| libm::log(1.0 - b)).collect();
        let mut sums = self.column_sums();
        let mut nb = vec![0.0; k];
        let mut logits = vec![0.0; k];
        for i in 0..self.graph.n() {
            nb.iter_mut().for_each(|x| *x = 0.0);
            for &j in self.graph.neighbors(i) {
                for (a, &t) in nb.iter_mut().zip(self.row(j)) {
                    *a += t;
                }
            }
            let own: Vec<f64> = self.row(i).to_vec();
            for p in 0..k {
                let mut v = log_pi[p];
                for q in 0..k {
                    v += nb[q] * log_odds[p * k + q] + (sums[q] - own[q]) * log_miss[p * k + q];
                }
                logits[p] = v;
            }
            let top = logits.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let mut total = 0.0;
            for l in logits.iter_mut() {
                *l = libm::exp(*l - top);
                total += *l;
            }
            for q in 0..k {
                let t = logits[q] / total;
                sums[q] += t - own[q];
                self.tau[i * k + q] = t;
            }
        }
    }
}

fn fit_once(graph: &Graph, k: usize, init: &[usize]) -> MeanFieldFit {
    let n = graph.n();
    let mut tau = vec![0.0; n * k];
    for (i, &l) in init.iter().enumerate() {
        tau[i * k + l] = 1.0;
    }
    let mut state = State { graph, k, tau, pi: vec![0.0; k], b: vec![0.0; k * k] };
    let (edges, pairs) = state.m_step();
    let mut elbo = state.elbo(&edges, &pairs);
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        state.e_sweep();
        let (edges, pairs) = state.m_step();
        let next = state.elbo(&edges, &pairs);
        let change = (next - elbo).abs();
        elbo = next;
        if change < ELBO_TOL {
            break;
        }
    }
    MeanFieldFit { responsibilities: state.tau, pi: state.pi, b: state.b, elbo, sweeps }
}

/// Best fit by ELBO over `restarts` random initializations.
pub fn fit_mean_field(graph: &Graph, k: usize, restarts: usize, seed: u64) -> Result<MeanFieldFit> {
    let n = graph.n();
    if k == 0 || k > n {
        return Err(invalid!("mean-field SBM needs 1 <= K <= n (K = {k}, n = {n})"));
    }
    if restarts == 0 {
        return Err(invalid!("mean-field SBM needs at least one restart"));
    }
    let start = match spectral_cluster(graph, k, &SpectralOptions::new(SpectralVariant::RegularizedAdjacency), seed) {
        Ok(z) => z.hard_labels().expect("spectral labels are complete"),
        Err(_) => vec![0; n],
    };
    let mut best: Option<MeanFieldFit> = None;
    for r in 0..restarts {
        let mut init = start.clone();
        if r > 0 {
            let mut rng = rng::stream(seed, r as u64);
            for l in init.iter_mut() {
                if rng.random::<f64>() < PERTURB {
                    *l = rng.random_range(0..k);
                }
            }
        }
        let fit = fit_once(graph, k, &init);
        if best.as_ref().is_none_or(|b| fit.elbo > b.elbo) {
            best = Some(fit);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Hard labels from the best mean-field fit.
pub fn mean_field_sbm(graph: &Graph, k: usize, restarts: usize, seed: u64) -> Result<MembershipMatrix> {
    let fit = fit_mean_field(graph, k, restarts, seed)?;
    MembershipMatrix::from_labels(k, &fit.hard_labels(k))
}
