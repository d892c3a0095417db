use alloc::vec;
use alloc::vec::Vec;

/// Exact maximum-weight perfect matching on a square weight matrix (Hungarian
/// method with potentials, `O(k³)`).
///
/// Returns the optimal total and `assign`, with row `r` matched to column
/// `assign[r]`.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let k = weights.len();
    if k == 0 {
        return (0.0, Vec::new());
    }
    let max = weights.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Minimize cost = max - w, 1-based with a virtual column 0.
    let cost = |r: usize, c: usize| max - weights[r - 1][c - 1];
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; k];
    for j in 1..=k {
        assign[p[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(r, &c)| weights[r][c]).sum();
    (total, assign)
}
