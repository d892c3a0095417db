//! Lloyd's k-means with k-means++ seeding and multiple restarts.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::linalg::{squared_distance, DenseMatrix};
use crate::rng::{self, Rng};

const MAX_ITER: usize = 300;
const MOVE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

/// Clusters the rows of `points` into `k` groups, keeping the best of
/// `restarts` runs by inertia (earliest run on ties).
pub fn kmeans(points: &DenseMatrix, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(invalid!("k-means needs 1 <= k <= n (k = {k}, n = {n})"));
    }
    if restarts == 0 {
        return Err(invalid!("k-means needs at least one restart"));
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts {
        let run = lloyd(points, k, &mut rng::stream(seed, r as u64));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &DenseMatrix, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.rows();
    let mut centroids = vec![points.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| squared_distance(points.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut ticket = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    chosen = Some(i);
                    if ticket < w {
                        break;
                    }
                    ticket -= w;
                }
            }
            chosen.expect("positive total weight")
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(points: &DenseMatrix, k: usize, rng: &mut Rng) -> KMeansResult {
    let (n, d) = (points.rows(), points.cols());
    let mut centroids = plus_plus(points, k, rng);
    let mut labels = vec![0usize; n];
    for _ in 0..MAX_ITER {
        for (i, label) in labels.iter_mut().enumerate() {
            *label = nearest(points.row(i), &centroids).0;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        let mut updated: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &c)| if c > 0 { s.into_iter().map(|x| x / c as f64).collect() } else { Vec::new() })
            .collect();
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed at the point farthest from its own centroid.
                let far = (0..n)
                    .map(|i| (i, squared_distance(points.row(i), &centroids[labels[i]])))
                    .fold((0, -1.0), |acc, (i, dist)| if dist > acc.1 { (i, dist) } else { acc });
                updated[c] = points.row(far.0).to_vec();
                counts[labels[far.0]] -= 1;
                labels[far.0] = c;
                counts[c] = 1;
            }
        }
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| libm::sqrt(squared_distance(a, b)))
            .fold(0.0f64, f64::max);
        centroids = updated;
        if shift < MOVE_TOL {
            break;
        }
    }
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let (c, dist) = nearest(points.row(i), &centroids);
        *label = c;
        inertia += dist;
    }
    KMeansResult { labels, centroids, inertia }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pace_testkit::{exhaustive_two_means_inertia, SplitMix};

    fn matrix(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let pts = matrix(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![5.0, -1.0]]);
        assert_eq!(kmeans(&pts, 3, 1, 0).unwrap().inertia, 0.0);
    }

    #[test]
    fn separated_blobs() {
        let mut g = SplitMix(4);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let c = if i < 20 { 0.0 } else { 10.0 };
                vec![c + 0.1 * g.gauss(), c + 0.1 * g.gauss()]
            })
            .collect();
        let res = kmeans(&matrix(&rows), 2, 3, 1).unwrap();
        assert!(res.labels[..20].iter().all(|&l| l == res.labels[0]));
        assert!(res.labels[20..].iter().all(|&l| l == res.labels[20]));
        assert_ne!(res.labels[0], res.labels[20]);
    }

    #[test]
    fn duplicate_points() {
        let pts = matrix(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]]);
        let res = kmeans(&pts, 3, 2, 0).unwrap();
        assert_eq!(res.inertia, 0.0);
    }

    #[test]
    fn matches_exhaustive_two_partition() {
        let mut g = SplitMix(21);
        for trial in 0..20 {
            let rows: Vec<Vec<f64>> = (0..6).map(|_| vec![g.gauss(), g.gauss()]).collect();
            let res = kmeans(&matrix(&rows), 2, 20, trial).unwrap();
            assert!((res.inertia - exhaustive_two_means_inertia(&rows)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_k() {
        let pts = matrix(&[vec![0.0]]);
        assert!(kmeans(&pts, 2, 1, 0).is_err());
        assert!(kmeans(&pts, 1, 0, 0).is_err());
    }
}
