//! Top-`k` eigenpairs (by magnitude) of a symmetric operator via block subspace
//! iteration with Rayleigh–Ritz extraction.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm, orthonormalize, symmetric_eigen, DenseMatrix};
use crate::rng;

/// A symmetric linear map on `R^dim`, given by its matrix-vector product.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `y ← A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl SymmetricOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = dot(self.row(r), x);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative residual: `‖Av − λv‖ ≤ tol · max|λ|`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-6, max_iter: 10_000, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Ordered by decreasing `|λ|`.
    pub values: Vec<f64>,
    /// Unit vectors, `vectors[i]` pairs with `values[i]`.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn ritz_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    order
}

/// The `k` eigenpairs of largest `|λ|`.
pub fn top_k_eigenpairs(op: &dyn SymmetricOperator, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let d = op.dim();
    if k == 0 || k > d {
        return Err(invalid!("requested {k} eigenpairs of a {d}-dimensional operator"));
    }
    if opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(invalid!("eigensolver needs tol > 0 and max_iter >= 1"));
    }
    let b = d.min(2 * k + 4);
    let mut rng = rng::seeded(opts.seed);
    let mut basis: Vec<Vec<f64>> =
        (0..b).map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    orthonormalize(&mut basis);

    let mut images = vec![vec![0.0; d]; b];
    let mut best_residual = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        for (q, w) in basis.iter().zip(images.iter_mut()) {
            op.apply(q, w);
        }
        let h = DenseMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let (theta, coeffs) = symmetric_eigen(&h)?;
        let order = ritz_order(&theta);
        let combine = |src: &[Vec<f64>], col: usize| {
            let mut out = vec![0.0; d];
            for (j, s) in src.iter().enumerate() {
                let c = coeffs.get(j, col);
                if c != 0.0 {
                    for (o, x) in out.iter_mut().zip(s) {
                        *o += c * x;
                    }
                }
            }
            out
        };
        let ritz: Vec<Vec<f64>> = order.iter().map(|&c| combine(&basis, c)).collect();
        let ritz_images: Vec<Vec<f64>> = order.iter().map(|&c| combine(&images, c)).collect();
        let values: Vec<f64> = order.iter().map(|&c| theta[c]).collect();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let residuals: Vec<f64> = (0..k)
            .map(|i| {
                let r: Vec<f64> = ritz_images[i].iter().zip(&ritz[i]).map(|(av, v)| av - values[i] * v).collect();
                norm(&r)
            })
            .collect();
        let worst = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
        best_residual = best_residual.min(worst);
        if worst <= opts.tol * scale {
            return Ok(EigenPairs {
                values: values[..k].to_vec(),
                vectors: ritz[..k].to_vec(),
                residuals,
                iterations: iteration,
            });
        }
        basis = ritz_images;
        orthonormalize(&mut basis);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: best_residual })
}
