//! Householder QR (optionally column-pivoted) and the least-squares solver
//! built on it.

use crate::error::{Error, Result};
use crate::numkit::matrix::Matrix;

/// Compact Householder factorization `A P = Q R` of an `m x n` matrix.
struct Householder {
    /// `R` in the upper triangle, reflector tails below the diagonal.
    packed: Matrix,
    /// Reflector scaling factors, one per step.
    tau: Vec<f64>,
    /// Column permutation: column `j` of `A P` is column `perm[j]` of `A`.
    perm: Vec<usize>,
}

impl Householder {
    fn factor(a: &Matrix, pivot: bool) -> Householder {
        let (m, n) = a.shape();
        let steps = m.min(n);
        let mut r = a.clone();
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut col_norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| r.get(i, j).powi(2)).sum()).collect();

        for k in 0..steps {
            if pivot {
                // recompute remaining norms exactly; n is small in our uses
                for (j, cn) in col_norms.iter_mut().enumerate().skip(k) {
                    *cn = (k..m).map(|i| r.get(i, j).powi(2)).sum();
                }
                let best = (k..n)
                    .max_by(|&x, &y| col_norms[x].total_cmp(&col_norms[y]).then(y.cmp(&x)))
                    .unwrap();
                if best != k {
                    for i in 0..m {
                        let tmp = r.get(i, k);
                        r.set(i, k, r.get(i, best));
                        r.set(i, best, tmp);
                    }
                    perm.swap(k, best);
                    col_norms.swap(k, best);
                }
            }

            let norm_x = (k..m).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
            if norm_x == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let alpha = r.get(k, k);
            let beta = if alpha >= 0.0 { -norm_x } else { norm_x };
            let v0 = alpha - beta;
            // v = [1, x_{k+1..}/v0]
            for i in k + 1..m {
                let val = r.get(i, k) / v0;
                r.set(i, k, val);
            }
            tau[k] = (beta - alpha) / beta;
            r.set(k, k, beta);

            for j in k + 1..n {
                let mut s = r.get(k, j);
                for i in k + 1..m {
                    s += r.get(i, k) * r.get(i, j);
                }
                s *= tau[k];
                r.set(k, j, r.get(k, j) - s);
                for i in k + 1..m {
                    let val = r.get(i, j) - s * r.get(i, k);
                    r.set(i, j, val);
                }
            }
        }
        Householder { packed: r, tau, perm }
    }

    /// Applies `Qᵀ` to every column of `b` in place.
    fn apply_qt(&self, b: &mut Matrix) {
        let m = self.packed.rows();
        for k in 0..self.tau.len() {
            if self.tau[k] == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                let mut s = b.get(k, j);
                for i in k + 1..m {
                    s += self.packed.get(i, k) * b.get(i, j);
                }
                s *= self.tau[k];
                b.set(k, j, b.get(k, j) - s);
                for i in k + 1..m {
                    let val = b.get(i, j) - s * self.packed.get(i, k);
                    b.set(i, j, val);
                }
            }
        }
    }

    /// Explicit thin `Q` (`m x min(m, n)`).
    fn thin_q(&self) -> Matrix {
        let m = self.packed.rows();
        let k = self.tau.len();
        let mut q = Matrix::zeros(m, k);
        for i in 0..k {
            q.set(i, i, 1.0);
        }
        for step in (0..k).rev() {
            if self.tau[step] == 0.0 {
                continue;
            }
            for j in 0..k {
                let mut s = q.get(step, j);
                for i in step + 1..m {
                    s += self.packed.get(i, step) * q.get(i, j);
                }
                s *= self.tau[step];
                q.set(step, j, q.get(step, j) - s);
                for i in step + 1..m {
                    let val = q.get(i, j) - s * self.packed.get(i, step);
                    q.set(i, j, val);
                }
            }
        }
        q
    }

    fn r_diag(&self, i: usize) -> f64 {
        self.packed.get(i, i)
    }
}

/// Thin QR: returns `(Q, R)` with `Q` `m x min(m,n)` orthonormal columns.
///
/// `Q` keeps orthonormal columns even when `a` is rank deficient.
pub fn qr_thin(a: &Matrix) -> (Matrix, Matrix) {
    let h = Householder::factor(a, false);
    let q = h.thin_q();
    let k = h.tau.len();
    let r = Matrix::from_fn(k, a.cols(), |i, j| if j >= i { h.packed.get(i, j) } else { 0.0 });
    (q, r)
}

/// Orthonormal basis for the column span of `a` (thin `Q`).
pub fn orthonormalize(a: &Matrix) -> Matrix {
    Householder::factor(a, false).thin_q()
}

/// Result of [`solve_least_squares`].
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: Matrix,
    /// Numerical rank of the design matrix.
    pub rank: usize,
    /// Set when the design was rank deficient and the ridge term was added.
    pub ridge: bool,
    /// Ridge strength used (0 when `ridge` is false).
    pub lambda: f64,
}

/// Minimizes `‖X W − Z‖_F` via column-pivoted Householder QR.
///
/// When `X` is numerically rank deficient, solves the ridge problem with
/// `λ = 1e-6 · trace(XᵀX) / p` instead and flags it.
pub fn solve_least_squares(x: &Matrix, z: &Matrix) -> Result<LeastSquares> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::EmptyInput);
    }
    if z.rows() != n {
        return Err(Error::ShapeMismatch(format!(
            "design has {n} rows, targets have {}",
            z.rows()
        )));
    }
    if !x.is_finite() || !z.is_finite() {
        return Err(Error::NonFiniteValue("least-squares input".into()));
    }

    let h = Householder::factor(x, true);
    let steps = n.min(p);
    let r0 = h.r_diag(0).abs();
    let tol = (n.max(p) as f64) * f64::EPSILON * r0;
    let rank = (0..steps).take_while(|&i| h.r_diag(i).abs() > tol).count();

    if rank == p && r0 > 0.0 {
        let w = solve_full_rank(&h, z, p);
        return Ok(LeastSquares {
            solution: w,
            rank,
            ridge: false,
            lambda: 0.0,
        });
    }

    // Ridge fallback: stack sqrt(λ) I under X and zeros under Z.
    let trace: f64 = x.data().iter().map(|v| v * v).sum();
    let mut lambda = 1e-6 * trace / p as f64;
    if lambda == 0.0 {
        lambda = 1e-6;
    }
    let s = lambda.sqrt();
    let mut xa = Matrix::zeros(n + p, p);
    xa.data_mut()[..n * p].copy_from_slice(x.data());
    for i in 0..p {
        xa.set(n + i, i, s);
    }
    let mut za = Matrix::zeros(n + p, z.cols());
    za.data_mut()[..n * z.cols()].copy_from_slice(z.data());
    let ha = Householder::factor(&xa, true);
    let w = solve_full_rank(&ha, &za, p);
    Ok(LeastSquares {
        solution: w,
        rank,
        ridge: true,
        lambda,
    })
}

fn solve_full_rank(h: &Householder, z: &Matrix, p: usize) -> Matrix {
    let q = z.cols();
    let mut qtz = z.clone();
    h.apply_qt(&mut qtz);
    // back substitution on the leading p x p block of R
    let mut y = Matrix::zeros(p, q);
    for c in 0..q {
        for i in (0..p).rev() {
            let mut s = qtz.get(i, c);
            for j in i + 1..p {
                s -= h.packed.get(i, j) * y.get(j, c);
            }
            y.set(i, c, s / h.packed.get(i, i));
        }
    }
    // undo the column permutation
    let mut w = Matrix::zeros(p, q);
    for (j, &orig) in h.perm.iter().enumerate() {
        w.row_mut(orig).copy_from_slice(y.row(j));
    }
    w
}
