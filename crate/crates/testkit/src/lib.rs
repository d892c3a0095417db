//! Brute-force oracles for the test suites.
//!
//! Everything here is deliberately naive: exhaustive enumeration, cyclic Jacobi
//! rotations, plain BFS. None of it shares code with `pace-core`, so a test that
//! compares the two is comparing independent computations.

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Maximum of `sum_i w[i][perm[i]]` over all permutations, with the maximizer.
pub fn brute_force_assignment(w: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let k = w.len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for p in permutations(k) {
        let s: f64 = (0..k).map(|i| w[i][p[i]]).sum();
        if s > best.0 {
            best = (s, p);
        }
    }
    best
}

/// `(1/n) min_Q ||Z1 Q - Z2||_0` by enumerating every relabeling of `z1`.
///
/// Labels are `Some(0..k)`; a `None` row never matches (it contributes 1 to the
/// zero-norm if the other row is assigned, i.e. counts as a full mismatch of 2
/// when paired with a one-hot row in the other matrix, minus the missing 1).
pub fn brute_force_delta(z1: &[Option<usize>], z2: &[usize], k: usize) -> f64 {
    assert_eq!(z1.len(), z2.len());
    let n = z1.len() as f64;
    permutations(k)
        .into_iter()
        .map(|p| {
            z1.iter()
                .zip(z2)
                .map(|(a, &b)| match a {
                    Some(a) if p[*a] == b => 0.0,
                    Some(_) => 2.0,
                    None => 1.0,
                })
                .sum::<f64>()
                / n
        })
        .fold(f64::INFINITY, f64::min)
}

/// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the matching eigenvectors (as columns collected into
/// `Vec`s), unsorted.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i][i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Minimum k-means inertia over every split of `points` into two nonempty parts.
pub fn exhaustive_two_means_inertia(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    assert!((2..30).contains(&n));
    let d = points[0].len();
    let inertia = |members: &[&Vec<f64>]| -> f64 {
        let mut c = vec![0.0; d];
        for p in members {
            for (ci, x) in c.iter_mut().zip(p.iter()) {
                *ci += x;
            }
        }
        for ci in &mut c {
            *ci /= members.len() as f64;
        }
        members
            .iter()
            .map(|p| p.iter().zip(&c).map(|(x, ci)| (x - ci).powi(2)).sum::<f64>())
            .sum()
    };
    let mut best = f64::INFINITY;
    // Fix point 0 in part A to skip mirrored splits.
    for mask in 0u32..(1 << (n - 1)) {
        let in_a = |i: usize| i == 0 || (mask >> (i - 1)) & 1 == 0;
        let a: Vec<&Vec<f64>> = (0..n).filter(|&i| in_a(i)).map(|i| &points[i]).collect();
        let b: Vec<&Vec<f64>> = (0..n).filter(|&i| !in_a(i)).map(|i| &points[i]).collect();
        if b.is_empty() {
            continue;
        }
        best = best.min(inertia(&a) + inertia(&b));
    }
    best
}

/// Hop distances from `root` by breadth-first search.
pub fn bfs_distances(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[root] = Some(0);
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// A tiny deterministic generator so oracle fixtures do not depend on `rand`.
#[derive(Clone, Debug)]
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Approximately standard normal (sum of twelve uniforms).
    pub fn gauss(&mut self) -> f64 {
        (0..12).map(|_| self.unit()).sum::<f64>() - 6.0
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i + 1);
            v.swap(i, j);
        }
    }
}
