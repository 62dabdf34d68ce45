//! Truncated SVD by block subspace iteration with Rayleigh-Ritz
//! convergence checks.

use crate::error::{Error, Result};
use crate::numkit::jacobi::{jacobi_svd, symmetric_eigen};
use crate::numkit::matrix::Matrix;
use crate::numkit::qr::{orthonormalize, qr_thin};
use crate::numkit::rng::Rng;
use crate::numkit::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdConfig {
    pub max_iterations: usize,
    /// Relative change in the leading `k` Ritz values that counts as converged.
    pub tolerance: f64,
    /// Extra block columns beyond `k`.
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig {
            max_iterations: 1000,
            tolerance: 1e-10,
            oversample: 10,
            seed: 0x005e_ed5d,
        }
    }
}

/// Rank-`k` factors `U · diag(S) · Vᵀ`.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
    pub iterations: usize,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("factor shapes agree")
    }
}

/// Anything the iteration can multiply by from both sides.
pub trait LinearOperator {
    fn shape(&self) -> (usize, usize);
    /// `self * x`
    fn apply(&self, x: &Matrix) -> Matrix;
    /// `selfᵀ * x`
    fn apply_t(&self, x: &Matrix) -> Matrix;
}

impl LinearOperator for Matrix {
    fn shape(&self) -> (usize, usize) {
        Matrix::shape(self)
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        self.matmul(x).expect("operator shape")
    }

    fn apply_t(&self, x: &Matrix) -> Matrix {
        self.t_matmul(x).expect("operator shape")
    }
}

/// CSR paired with its transpose so both products are row-sweeps.
struct SparseOperator {
    a: CsrMatrix,
    at: CsrMatrix,
}

impl LinearOperator for SparseOperator {
    fn shape(&self) -> (usize, usize) {
        (self.a.rows(), self.a.cols())
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        self.a.mul_dense(x)
    }

    fn apply_t(&self, x: &Matrix) -> Matrix {
        self.at.mul_dense(x)
    }
}

struct Transposed<'a, T: LinearOperator>(&'a T);

impl<T: LinearOperator> LinearOperator for Transposed<'_, T> {
    fn shape(&self) -> (usize, usize) {
        let (m, n) = self.0.shape();
        (n, m)
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        self.0.apply_t(x)
    }

    fn apply_t(&self, x: &Matrix) -> Matrix {
        self.0.apply(x)
    }
}

pub fn truncated_svd_sparse(m: &CsrMatrix, k: usize, cfg: &SvdConfig) -> Result<TruncatedSvd> {
    let op = SparseOperator {
        a: m.clone(),
        at: m.transpose(),
    };
    truncated_svd(&op, k, cfg)
}

pub fn truncated_svd_dense(m: &Matrix, k: usize, cfg: &SvdConfig) -> Result<TruncatedSvd> {
    truncated_svd(m, k, cfg)
}

/// Leading `k` singular triplets of `op`.
///
/// Iterates on the smaller side so every orthonormalization is
/// `min(m, n) x b`.
pub fn truncated_svd<T: LinearOperator>(op: &T, k: usize, cfg: &SvdConfig) -> Result<TruncatedSvd> {
    let (m, n) = op.shape();
    let max = m.min(n);
    if k == 0 || k > max {
        return Err(Error::RankTooLarge { k, max });
    }
    if m <= n {
        subspace_iteration(op, k, cfg)
    } else {
        let t = subspace_iteration(&Transposed(op), k, cfg)?;
        Ok(TruncatedSvd {
            u: t.v,
            s: t.s,
            v: t.u,
            iterations: t.iterations,
        })
    }
}

fn subspace_iteration<T: LinearOperator>(op: &T, k: usize, cfg: &SvdConfig) -> Result<TruncatedSvd> {
    let (m, n) = op.shape();
    debug_assert!(m <= n);
    let b = (k + cfg.oversample).min(m);

    let mut rng = Rng::new(cfg.seed);
    let omega = Matrix::from_fn(n, b, |_, _| rng.normal());
    let mut q = orthonormalize(&op.apply(&omega));

    let mut prev: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let z = loop {
        let z = op.apply_t(&q); // n x b
        let y = op.apply(&z); // m x b
        let c = q.t_matmul(&y).expect("shapes"); // b x b, = QᵀAAᵀQ
        let c = symmetrize(&c);
        let (lambda, _) = symmetric_eigen(&c);
        let sigma: Vec<f64> = lambda.iter().take(k).map(|l| l.max(0.0).sqrt()).collect();
        iterations += 1;

        let top = sigma[0];
        let converged = b == m
            || top == 0.0
            || prev.as_ref().is_some_and(|p| {
                last_change = p.iter().zip(&sigma).map(|(a, s)| (a - s).abs()).fold(0.0, f64::max) / top;
                last_change <= cfg.tolerance
            });
        if converged {
            break z;
        }
        if iterations >= cfg.max_iterations {
            return Err(Error::ConvergenceFailure {
                iterations,
                residual: last_change,
            });
        }
        prev = Some(sigma);
        q = orthonormalize(&y);
    };

    // A ≈ Q Qᵀ A = Q (AᵀQ)ᵀ = Q Rᵀ V0ᵀ with AᵀQ = V0 R
    let (v0, r) = qr_thin(&z);
    let (us, s, ws) = jacobi_svd(&r.transpose());
    let u = q.matmul(&us).expect("shapes").take_cols(k);
    let v = v0.matmul(&ws).expect("shapes").take_cols(k);
    Ok(TruncatedSvd {
        u,
        s: s[..k].to_vec(),
        v,
        iterations,
    })
}

fn symmetrize(c: &Matrix) -> Matrix {
    Matrix::from_fn(c.rows(), c.cols(), |i, j| 0.5 * (c.get(i, j) + c.get(j, i)))
}
