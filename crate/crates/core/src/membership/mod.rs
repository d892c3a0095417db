//! Cluster assignments, label alignment, and the discrepancy measures between
//! clusterings.
//!
//! A [`MembershipMatrix`] is the binary `n × K` matrix `Z` stored as one optional
//! label per row; `None` is an all-zero row (a node the estimate does not cover).

mod assignment;
mod metrics;

pub use assignment::max_weight_assignment;
pub use metrics::{
    clustering_matrix, misclustered_node_fraction, misclustering_fraction,
    misclustering_fraction_extended, round_soft, soft_discrepancy, tilde_delta,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};

/// Hard cluster assignment of `n` nodes into `k` labels; rows may be unassigned.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipMatrix {
    k: usize,
    labels: Vec<Option<u32>>,
}

impl MembershipMatrix {
    pub fn new(k: usize, labels: Vec<Option<u32>>) -> Result<Self> {
        if let Some(bad) = labels.iter().flatten().find(|&&l| l as usize >= k) {
            return Err(invalid!("label {bad} out of range for K = {k}"));
        }
        Ok(MembershipMatrix { k, labels })
    }

    /// Fully assigned membership from plain labels.
    pub fn from_labels(k: usize, labels: &[usize]) -> Result<Self> {
        Self::new(k, labels.iter().map(|&l| Some(l as u32)).collect())
    }

    pub fn unassigned(n: usize, k: usize) -> Self {
        MembershipMatrix { k, labels: vec![None; n] }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i].map(|l| l as usize)
    }

    pub fn labels(&self) -> &[Option<u32>] {
        &self.labels
    }

    pub fn is_fully_assigned(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    /// Plain labels, or `None` if any row is unassigned.
    pub fn hard_labels(&self) -> Option<Vec<usize>> {
        self.labels.iter().map(|l| l.map(|l| l as usize)).collect()
    }

    pub fn assigned_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Number of distinct labels in use.
    pub fn distinct_labels(&self) -> usize {
        let mut seen = vec![false; self.k];
        for l in self.labels.iter().flatten() {
            seen[*l as usize] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Same assignment with the label range widened to `k >= self.k()`.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k < self.k {
            return Err(invalid!("cannot shrink label range from {} to {k}", self.k));
        }
        Ok(MembershipMatrix { k, labels: self.labels.clone() })
    }

    /// Relabels clusters in order of first appearance, so two memberships that
    /// describe the same partition become identical.
    pub fn canonical(&self) -> Self {
        let mut map = vec![u32::MAX; self.k];
        let mut next = 0u32;
        let labels = self
            .labels
            .iter()
            .map(|l| {
                l.map(|l| {
                    let slot = &mut map[l as usize];
                    if *slot == u32::MAX {
                        *slot = next;
                        next += 1;
                    }
                    *slot
                })
            })
            .collect();
        MembershipMatrix { k: self.k, labels }
    }

    /// Rows `rows` of this membership, in the given order.
    pub fn restrict(&self, rows: &[usize]) -> Self {
        MembershipMatrix { k: self.k, labels: rows.iter().map(|&r| self.labels[r]).collect() }
    }
}

/// Averaged (fractional) membership: each row sums to one or is all zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftMembership {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl SoftMembership {
    pub fn new(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(n * k, values.len())?;
        for i in 0..n {
            let row = &values[i * k..(i + 1) * k];
            if row.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
                return Err(invalid!("row {i} has entries outside [0, 1]"));
            }
            let s: f64 = row.iter().sum();
            if s != 0.0 && libm::fabs(s - 1.0) > 1e-9 {
                return Err(invalid!("row {i} sums to {s}"));
            }
        }
        Ok(SoftMembership { n, k, values })
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        SoftMembership { n, k, values: vec![0.0; n * k] }
    }

    /// One-hot rows for assigned nodes, zero rows otherwise.
    pub fn from_hard(z: &MembershipMatrix) -> Self {
        let mut s = Self::zeros(z.n(), z.k());
        for (i, l) in z.labels.iter().enumerate() {
            if let Some(l) = l {
                s.values[i * z.k + *l as usize] = 1.0;
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|&v| v == 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `K × K` co-occurrence counts `M = Z1ᵀ Z2` (real-valued so that perturbed
/// matrices can be fed to [`match_permutation`]).
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<f64>,
}

impl ConfusionMatrix {
    pub fn new(k: usize, counts: Vec<f64>) -> Result<Self> {
        check_dim(k * k, counts.len())?;
        Ok(ConfusionMatrix { k, counts })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.counts[a * self.k + b]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.counts.chunks(self.k.max(1)).map(<[f64]>::to_vec).take(self.k).collect()
    }
}

/// A bijection on `0..K`; label `a` maps to `self.apply(a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Permutation { map: (0..k).collect() }
    }

    pub fn from_vec(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &v in &map {
            if v >= map.len() || core::mem::replace(&mut seen[v], true) {
                return Err(invalid!("not a permutation: {map:?}"));
            }
        }
        Ok(Permutation { map })
    }

    pub fn k(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (a, &b) in self.map.iter().enumerate() {
            inv[b] = a;
        }
        Permutation { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(a, &b)| a == b)
    }
}

/// `M[a][b] = #{i : z1(i) = a, z2(i) = b}` over rows assigned in both.
pub fn confusion(z1: &MembershipMatrix, z2: &MembershipMatrix) -> Result<ConfusionMatrix> {
    check_dim(z1.n(), z2.n())?;
    check_dim(z1.k(), z2.k())?;
    let k = z1.k();
    let mut counts = vec![0.0; k * k];
    for (a, b) in z1.labels.iter().zip(&z2.labels) {
        if let (Some(a), Some(b)) = (a, b) {
            counts[*a as usize * k + *b as usize] += 1.0;
        }
    }
    Ok(ConfusionMatrix { k, counts })
}

/// Greedy alignment: repeatedly take the largest entry among rows and columns not
/// yet used (ties to the smallest row, then column), pair that row with that
/// column, and strike both. Always returns a bijection.
pub fn match_permutation(m: &ConfusionMatrix) -> Permutation {
    let k = m.k();
    let mut row_used = vec![false; k];
    let mut col_used = vec![false; k];
    let mut map = vec![0; k];
    for _ in 0..k {
        let mut best: Option<(usize, usize, f64)> = None;
        for r in (0..k).filter(|&r| !row_used[r]) {
            for c in (0..k).filter(|&c| !col_used[c]) {
                let v = m.get(r, c);
                if best.is_none_or(|(_, _, bv)| v > bv) {
                    best = Some((r, c, v));
                }
            }
        }
        let (r, c, _) = best.expect("an unused row and column remain each round");
        row_used[r] = true;
        col_used[c] = true;
        map[r] = c;
    }
    Permutation { map }
}

/// Relabels every assigned row `a → perm(a)`.
pub fn align(z: &MembershipMatrix, perm: &Permutation) -> Result<MembershipMatrix> {
    check_dim(z.k(), perm.k())?;
    let labels = z.labels.iter().map(|l| l.map(|l| perm.apply(l as usize) as u32)).collect();
    Ok(MembershipMatrix { k: z.k, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pace_testkit::{brute_force_assignment, permutations, SplitMix};
    use proptest::prelude::*;

    fn z(k: usize, labels: &[usize]) -> MembershipMatrix {
        MembershipMatrix::from_labels(k, labels).unwrap()
    }

    #[test]
    fn confusion_examples() {
        let m = confusion(&z(2, &[0, 0, 1, 1]), &z(2, &[0, 0, 1, 1])).unwrap();
        assert_eq!(m.rows(), vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
        let m = confusion(&z(2, &[0, 0, 1, 1]), &z(2, &[1, 1, 0, 0])).unwrap();
        assert_eq!(m.rows(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let m = confusion(&z(2, &[0, 0, 1]), &z(2, &[0, 1, 1])).unwrap();
        assert_eq!(m.rows(), vec![vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(confusion(&z(2, &[0]), &z(2, &[0, 1])).is_err());
    }

    #[test]
    fn confusion_skips_unassigned_rows() {
        let a = MembershipMatrix::new(2, vec![Some(0), None, Some(1)]).unwrap();
        let b = z(2, &[0, 1, 1]);
        assert_eq!(confusion(&a, &b).unwrap().total(), 2.0);
    }

    #[test]
    fn match_on_diagonal_is_identity() {
        let m = ConfusionMatrix::new(3, vec![5.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(match_permutation(&m).is_identity());
    }

    #[test]
    fn match_breaks_ties_by_row_then_column() {
        let m = ConfusionMatrix::new(2, vec![1.0; 4]).unwrap();
        assert!(match_permutation(&m).is_identity());
    }

    #[test]
    fn align_examples() {
        let a = z(2, &[0, 1, 0]);
        assert_eq!(align(&a, &Permutation::identity(2)).unwrap(), a);
        let swap = Permutation::from_vec(vec![1, 0]).unwrap();
        assert_eq!(align(&a, &swap).unwrap(), z(2, &[1, 0, 1]));
        let partial = MembershipMatrix::new(2, vec![None, Some(0)]).unwrap();
        assert_eq!(align(&partial, &swap).unwrap().labels(), &[None, Some(1)]);
    }

    #[test]
    fn canonical_relabels_by_first_appearance() {
        assert_eq!(z(3, &[2, 2, 0, 1]).canonical(), z(3, &[0, 0, 1, 2]));
    }

    #[test]
    fn permutation_rejects_non_bijections() {
        assert!(Permutation::from_vec(vec![0, 0]).is_err());
        assert!(Permutation::from_vec(vec![0, 2]).is_err());
    }

    /// `M = Π₂ᵀ diag(d) Π₁ + Γ` with `‖Γ‖∞ ≤ min d / 3` has its planted
    /// permutation recovered by the greedy match, and that permutation is also the
    /// exhaustive optimum.
    #[test]
    fn match_recovers_planted_permutation_under_bounded_noise() {
        let mut rng = SplitMix(9);
        for trial in 0..500 {
            let k = 1 + trial % 6;
            let mut sigma: Vec<usize> = (0..k).collect();
            rng.shuffle(&mut sigma);
            let d: Vec<f64> = (0..k).map(|_| 1.0 + 20.0 * rng.unit()).collect();
            let bound = d.iter().cloned().fold(f64::INFINITY, f64::min) / 3.0;
            let mut counts = vec![0.0; k * k];
            for r in 0..k {
                for c in 0..k {
                    let noise = bound * (2.0 * rng.unit() - 1.0);
                    counts[r * k + c] = noise + if sigma[r] == c { d[r] } else { 0.0 };
                }
            }
            let m = ConfusionMatrix::new(k, counts).unwrap();
            let got = match_permutation(&m);
            assert_eq!(got.as_slice(), sigma.as_slice());
            if k <= 6 {
                let (_, best) = brute_force_assignment(&m.rows());
                assert_eq!(best, sigma);
            }
        }
    }

    proptest! {
        #[test]
        fn match_always_returns_a_bijection(k in 1usize..7, seed in any::<u64>()) {
            let mut rng = SplitMix(seed);
            let counts = (0..k * k).map(|_| (rng.below(5)) as f64).collect();
            let m = ConfusionMatrix::new(k, counts).unwrap();
            let p = match_permutation(&m);
            prop_assert!(Permutation::from_vec(p.as_slice().to_vec()).is_ok());
        }

        #[test]
        fn align_inverse_law(k in 1usize..6, labels in proptest::collection::vec(0usize..6, 0..20), pick in any::<prop::sample::Index>()) {
            let labels: Vec<usize> = labels.into_iter().map(|l| l % k).collect();
            let all = permutations(k);
            let p = Permutation::from_vec(all[pick.index(all.len())].clone()).unwrap();
            let a = z(k, &labels);
            prop_assert_eq!(align(&align(&a, &p).unwrap(), &p.inverse()).unwrap(), a);
        }
    }
}
