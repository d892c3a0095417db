use alloc::vec;
use alloc::vec::Vec;

use super::{confusion, max_weight_assignment, MembershipMatrix, SoftMembership};
use crate::error::{check_dim, invalid, Result};
use crate::linalg::DenseMatrix;

/// `δ(Z1, Z2) = (1/n) min_Q ‖Z1 Q − Z2‖₀`, minimized exactly over label
/// permutations. A misplaced node contributes 2, so this is twice the fraction of
/// misclustered nodes.
pub fn misclustering_fraction(z1: &MembershipMatrix, z2: &MembershipMatrix) -> Result<f64> {
    check_dim(z1.n(), z2.n())?;
    check_dim(z1.k(), z2.k())?;
    if !z1.is_fully_assigned() || !z2.is_fully_assigned() {
        return Err(invalid!("misclustering fraction needs fully assigned memberships"));
    }
    let n = z1.n();
    if n == 0 {
        return Ok(0.0);
    }
    let (matched, _) = max_weight_assignment(&confusion(z1, z2)?.rows());
    Ok(2.0 * (n as f64 - matched) / n as f64)
}

/// Fraction of misclustered nodes, `δ / 2`.
pub fn misclustered_node_fraction(z1: &MembershipMatrix, z2: &MembershipMatrix) -> Result<f64> {
    Ok(misclustering_fraction(z1, z2)? / 2.0)
}

/// `δ` for an estimate that may carry one extra label (nodes an estimator could
/// not place). Both label sets are padded with empty clusters to a common size
/// and the best bijection is found exactly. Unassigned rows of `zhat` always
/// count as misclustered.
pub fn misclustering_fraction_extended(zhat: &MembershipMatrix, z: &MembershipMatrix) -> Result<f64> {
    check_dim(z.n(), zhat.n())?;
    if zhat.k() > z.k() + 1 {
        return Err(invalid!(
            "estimate has {} labels; at most K + 1 = {} are allowed",
            zhat.k(),
            z.k() + 1
        ));
    }
    let truth = z
        .hard_labels()
        .ok_or_else(|| invalid!("reference membership must be fully assigned"))?;
    let n = z.n();
    if n == 0 {
        return Ok(0.0);
    }
    let size = zhat.k().max(z.k());
    let mut w = vec![vec![0.0; size]; size];
    for (est, &t) in zhat.labels().iter().zip(&truth) {
        if let Some(e) = est {
            w[*e as usize][t] += 1.0;
        }
    }
    let (matched, _) = max_weight_assignment(&w);
    Ok(2.0 * (n as f64 - matched) / n as f64)
}

/// `C = Z Zᵀ`: `C_ij = 1` iff `i` and `j` share a label.
pub fn clustering_matrix(z: &MembershipMatrix) -> Result<DenseMatrix> {
    let labels = z
        .hard_labels()
        .ok_or_else(|| invalid!("clustering matrix needs every row assigned"))?;
    let n = labels.len();
    Ok(DenseMatrix::from_fn(n, n, |i, j| if labels[i] == labels[j] { 1.0 } else { 0.0 }))
}

/// `δ̃(C1, C2) = ‖C1 − C2‖²_F / n²`.
pub fn tilde_delta(c1: &DenseMatrix, c2: &DenseMatrix) -> Result<f64> {
    check_dim(c1.rows(), c2.rows())?;
    check_dim(c1.cols(), c2.cols())?;
    let n = c1.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let sq: f64 = c1
        .as_slice()
        .iter()
        .zip(c2.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq / (n as f64 * n as f64))
}

/// Row-wise argmax (ties to the smallest label); all-zero rows stay unassigned.
pub fn round_soft(s: &SoftMembership) -> MembershipMatrix {
    let labels = (0..s.n())
        .map(|i| {
            if s.is_zero_row(i) {
                return None;
            }
            let row = s.row(i);
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            Some(best as u32)
        })
        .collect();
    MembershipMatrix::new(s.k(), labels).expect("argmax is within range")
}

/// `min_Q ‖S − Z Q‖²_F / n` for a soft estimate against a hard membership.
pub fn soft_discrepancy(s: &SoftMembership, z: &MembershipMatrix) -> Result<f64> {
    check_dim(z.n(), s.n())?;
    check_dim(z.k(), s.k())?;
    let truth = z
        .hard_labels()
        .ok_or_else(|| invalid!("reference membership must be fully assigned"))?;
    let (n, k) = (s.n(), s.k());
    if n == 0 {
        return Ok(0.0);
    }
    // ‖S − ZQ‖² = Σ_i (‖S_i‖² + 1) − 2 Σ_i S_{i, Q(σ_i)}; maximize the last sum.
    let mut w: Vec<Vec<f64>> = vec![vec![0.0; k]; k];
    let mut constant = 0.0;
    for (i, &t) in truth.iter().enumerate() {
        let row = s.row(i);
        constant += row.iter().map(|v| v * v).sum::<f64>() + 1.0;
        for (c, &v) in row.iter().enumerate() {
            w[t][c] += v;
        }
    }
    let (best, _) = max_weight_assignment(&w);
    Ok((constant - 2.0 * best).max(0.0) / n as f64)
}
