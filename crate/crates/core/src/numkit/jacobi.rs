//! Dense Jacobi kernels for the small projected problems inside the
//! truncated SVD.

use crate::numkit::matrix::{dot, Matrix};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in non-increasing order with matching eigenvector
/// columns.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let total = m.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || total == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m.get(y, y).total_cmp(&m.get(x, x)).then(x.cmp(&y)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    (values, vectors)
}

/// Full SVD of an `m x n` matrix with `m >= n` by one-sided (Hestenes)
/// Jacobi. Returns `(U: m x n, S: n, V: n x n)`, singular values sorted
/// non-increasing. Columns of `U` for zero singular values are completed to
/// an orthonormal set.
pub fn jacobi_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "jacobi_svd expects rows >= cols");
    // work on columns: store Aᵀ so each column is a contiguous row
    let mut cols = a.transpose();
    let mut v = Matrix::identity(n); // rows of v are columns of V
    let eps = 1e-15;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(cols.row(p), cols.row(p));
                let beta = dot(cols.row(q), cols.row(q));
                let gamma = dot(cols.row(p), cols.row(q));
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut cols, p, q, c, s);
                rotate_rows(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| dot(cols.row(j), cols.row(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = smax * (m as f64) * f64::EPSILON;

    let mut u = Matrix::zeros(m, n);
    let mut valid = 0;
    for (k, &j) in order.iter().enumerate() {
        if s[k] > cutoff && s[k] > 0.0 {
            for i in 0..m {
                u.set(i, k, cols.get(j, i) / s[k]);
            }
            valid += 1;
        }
    }
    complete_orthonormal(&mut u, valid);
    let v_out = Matrix::from_fn(n, n, |i, k| v.get(order[k], i));
    (u, s, v_out)
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.cols() {
        let xp = m.get(p, k);
        let xq = m.get(q, k);
        m.set(p, k, c * xp - s * xq);
        m.set(q, k, s * xp + c * xq);
    }
}

/// Fills columns `valid..` of `u` with unit vectors orthogonal to all
/// earlier columns (Gram-Schmidt against the standard basis, twice).
pub(crate) fn complete_orthonormal(u: &mut Matrix, valid: usize) {
    let (m, n) = u.shape();
    let mut next_basis = 0;
    for k in valid..n {
        loop {
            assert!(next_basis < m, "cannot complete an orthonormal basis");
            let mut cand = vec![0.0; m];
            cand[next_basis] = 1.0;
            next_basis += 1;
            for _ in 0..2 {
                for j in 0..k {
                    let proj: f64 = (0..m).map(|i| u.get(i, j) * cand[i]).sum();
                    for (i, c) in cand.iter_mut().enumerate() {
                        *c -= proj * u.get(i, j);
                    }
                }
            }
            let nrm = dot(&cand, &cand).sqrt();
            if nrm > 1e-6 {
                for (i, c) in cand.iter().enumerate() {
                    u.set(i, k, c / nrm);
                }
                break;
            }
        }
    }
}
