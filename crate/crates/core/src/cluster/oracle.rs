//! A clusterer that knows the true labels, optionally corrupted at a fixed rate.
//! Used to exercise the stitching estimators with controlled local error.

use alloc::vec::Vec;

use rand::Rng as _;

use super::BaseClusterer;
use crate::error::{invalid, Result};
use crate::graph::{Graph, SubgraphSample};
use crate::membership::MembershipMatrix;
use crate::rng;

#[derive(Clone, Debug)]
pub struct OracleClusterer {
    truth: Vec<usize>,
    /// Probability that a node's label is replaced by a different, uniformly
    /// chosen label.
    pub flip: f64,
}

impl OracleClusterer {
    pub fn new(truth: Vec<usize>) -> Self {
        OracleClusterer { truth, flip: 0.0 }
    }

    pub fn noisy(truth: Vec<usize>, flip: f64) -> Self {
        OracleClusterer { truth, flip }
    }
}

impl BaseClusterer for OracleClusterer {
    fn name(&self) -> &str {
        "oracle"
    }

    fn cluster(&self, _graph: &Graph, _k: usize, _seed: u64) -> Result<MembershipMatrix> {
        Err(invalid!("the oracle clusterer needs global node ids; call cluster_sample"))
    }

    fn cluster_sample(&self, sample: &SubgraphSample, k: usize, seed: u64) -> Result<MembershipMatrix> {
        let mut rng = rng::seeded(seed);
        let mut labels = Vec::with_capacity(sample.len());
        for &u in &sample.nodes {
            let &t = self.truth.get(u).ok_or_else(|| invalid!("node {u} has no true label"))?;
            if t >= k {
                return Err(invalid!("true label {t} is out of range for K = {k}"));
            }
            let flipped = k > 1 && self.flip > 0.0 && rng.random::<f64>() < self.flip;
            labels.push(if flipped { (t + 1 + rng.random_range(0..k - 1)) % k } else { t });
        }
        MembershipMatrix::from_labels(k, &labels)
    }
}
