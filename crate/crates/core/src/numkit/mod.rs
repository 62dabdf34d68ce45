//! Deterministic double-precision numeric kernels.

mod grad;
mod jacobi;
mod matrix;
mod optim;
mod qr;
mod rng;
mod sparse;
mod svd;

pub use grad::{grad_check, grad_check_coords, DEFAULT_EPS};
pub use jacobi::{jacobi_svd, symmetric_eigen};
pub use matrix::{axpy, cosine, dot, norm, Matrix};
pub use optim::{Optimizer, OptimizerKind, OptimizerSpec, ADAGRAD_EPSILON};
pub use qr::{orthonormalize, qr_thin, solve_least_squares, LeastSquares};
pub use rng::{derive_seed, Rng};
pub use sparse::CsrMatrix;
pub use svd::{truncated_svd, truncated_svd_dense, truncated_svd_sparse, LinearOperator, SvdConfig, TruncatedSvd};

use crate::error::{Error, Result};

/// Numerically stable softmax (max subtracted first).
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue("softmax input".into()));
    }
    let mut out = v.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

/// Unchecked in-place softmax for hot loops; `v` must be non-empty and finite.
#[inline]
pub fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// `ln σ(x)` without overflow.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = softmax(&[1f64.ln(), 2f64.ln(), 3f64.ln()]).unwrap();
        for (got, want) in p.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(matches!(softmax(&[]), Err(Error::EmptyVector)));
        assert!(softmax(&[1000.0, 0.0]).unwrap()[0] > 0.999);
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(-800.0).is_finite());
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one_and_is_shift_invariant(
            v in proptest::collection::vec(-50.0f64..50.0, 1..12),
            c in -100.0f64..100.0,
        ) {
            let p = softmax(&v).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x > 0.0));
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let q = softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_is_permutation_equivariant(v in proptest::collection::vec(-20.0f64..20.0, 2..10)) {
            let p = softmax(&v).unwrap();
            let rev: Vec<f64> = v.iter().rev().copied().collect();
            let q = softmax(&rev).unwrap();
            for (a, b) in p.iter().zip(q.iter().rev()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }
    }
}
