//! Dense linear algebra kernels used across the crate.
//!
//! Everything here is deterministic and single-threaded: Cholesky with
//! triangular solves, Householder least squares, a one-sided Jacobi SVD,
//! and a cyclic Jacobi symmetric eigensolver. Sizes stay in the hundreds
//! to low thousands, where straightforward dense kernels are fast enough.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Result, RomError};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Row-major, processed row by row with contiguous dot products.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(RomError::Numerical("Cholesky needs a square matrix".into()));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let (row_i, row_j) = (l.row(i), l.row(j));
            let dot = dot_slices(
                &row_i.as_slice().unwrap()[..j],
                &row_j.as_slice().unwrap()[..j],
            );
            if i == j {
                let d = a[[i, i]] - dot;
                if !(d.is_finite() && d > 0.0) {
                    return Err(RomError::Numerical(format!(
                        "Cholesky failed at pivot {i} (d = {d:e}); matrix not positive definite -- \
                         consider a larger jitter"
                    )));
                }
                l[[i, i]] = d.sqrt();
            } else {
                l[[i, j]] = (a[[i, j]] - dot) / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Dot product with four independent accumulators so the multiply-add
/// chains pipeline instead of serializing on one register.
#[inline]
fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..chunks {
        let j = 4 * i;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut acc = (s0 + s1) + (s2 + s3);
    for j in 4 * chunks..a.len() {
        acc += a[j] * b[j];
    }
    acc
}

/// Solves `L x = b` with `L` lower triangular.
pub fn solve_lower(l: &ArrayView2<f64>, b: &ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in 0..n {
        let row = l.row(i);
        let dot = dot_slices(
            &row.as_slice().unwrap()[..i],
            &x.as_slice().unwrap()[..i],
        );
        x[i] = (x[i] - dot) / l[[i, i]];
    }
    x
}

/// Solves `L^T x = b` with `L` lower triangular.
pub fn solve_lower_transpose(l: &ArrayView2<f64>, b: &ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for k in (i + 1)..n {
            acc -= l[[k, i]] * x[k];
        }
        x[i] = acc / l[[i, i]];
    }
    x
}

/// Thin Householder QR of an `m x k` matrix with `m >= k`.
///
/// Stores the triangular factor and enough of the reflectors to apply
/// `Q^T` to right-hand sides and to recover the hat-matrix diagonal.
pub struct QrFactors {
    /// Packed reflectors below the diagonal, R on and above it.
    qr: Array2<f64>,
    /// Householder scalars.
    tau: Vec<f64>,
}

impl QrFactors {
    pub fn k(&self) -> usize {
        self.tau.len()
    }

    /// Ratio of the largest to smallest `|r_ii|`; a cheap condition estimate.
    pub fn diagonal_condition(&self) -> f64 {
        let k = self.k();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..k {
            let d = self.qr[[i, i]].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Applies `Q^T` to a vector of length `m` in place.
    fn apply_qt(&self, v: &mut Array1<f64>) {
        let m = self.qr.nrows();
        for j in 0..self.k() {
            if self.tau[j] == 0.0 {
                continue;
            }
            let mut dot = v[j];
            for i in (j + 1)..m {
                dot += self.qr[[i, j]] * v[i];
            }
            dot *= self.tau[j];
            v[j] -= dot;
            for i in (j + 1)..m {
                v[i] -= dot * self.qr[[i, j]];
            }
        }
    }

    /// Solves `R x = c` for the leading `k` entries of `c`.
    fn solve_r(&self, c: &Array1<f64>) -> Array1<f64> {
        let k = self.k();
        let mut x = Array1::zeros(k);
        for i in (0..k).rev() {
            let mut acc = c[i];
            for j in (i + 1)..k {
                acc -= self.qr[[i, j]] * x[j];
            }
            x[i] = acc / self.qr[[i, i]];
        }
        x
    }

    /// Least-squares solution of `A x = b` using the stored factorization.
    pub fn solve(&self, b: &ArrayView1<f64>) -> Array1<f64> {
        let mut v = b.to_owned();
        self.apply_qt(&mut v);
        self.solve_r(&v)
    }

    /// Diagonal of the hat matrix `A (A^T A)^{-1} A^T`, i.e. per-row
    /// leverages `h_i = || Q_1 e_i ||^2`.
    pub fn hat_diagonal(&self) -> Array1<f64> {
        let m = self.qr.nrows();
        let k = self.k();
        let mut h = Array1::zeros(m);
        // Apply the reflectors in reverse to each basis vector of the
        // k-dimensional range to form Q_1 columns.
        let mut q = Array2::<f64>::zeros((m, k));
        for c in 0..k {
            q[[c, c]] = 1.0;
        }
        for j in (0..k).rev() {
            if self.tau[j] == 0.0 {
                continue;
            }
            for c in 0..k {
                let mut dot = q[[j, c]];
                for i in (j + 1)..m {
                    dot += self.qr[[i, j]] * q[[i, c]];
                }
                dot *= self.tau[j];
                q[[j, c]] -= dot;
                for i in (j + 1)..m {
                    q[[i, c]] -= dot * self.qr[[i, j]];
                }
            }
        }
        for i in 0..m {
            h[i] = q.row(i).iter().map(|v| v * v).sum();
        }
        h
    }

    /// `trace((A^T A)^{-1}) = ||R^{-1}||_F^2`.
    pub fn normal_inverse_trace(&self) -> f64 {
        let k = self.k();
        // Columns of R^{-1} by back substitution on unit vectors.
        let mut total = 0.0;
        for c in 0..k {
            let mut x = vec![0.0f64; k];
            for i in (0..=c).rev() {
                let mut acc = if i == c { 1.0 } else { 0.0 };
                for j in (i + 1)..=c {
                    acc -= self.qr[[i, j]] * x[j];
                }
                x[i] = acc / self.qr[[i, i]];
            }
            total += x.iter().map(|v| v * v).sum::<f64>();
        }
        total
    }
}

/// Computes the thin Householder QR of `a` (`m >= k` required).
pub fn qr_factor(a: &Array2<f64>) -> Result<QrFactors> {
    let (m, k) = a.dim();
    if m < k {
        return Err(RomError::Numerical(format!(
            "QR needs at least as many rows as columns ({m} < {k})"
        )));
    }
    let mut qr = a.clone();
    let mut tau = vec![0.0f64; k];
    for j in 0..k {
        let mut norm2 = 0.0;
        for i in j..m {
            norm2 += qr[[i, j]] * qr[[i, j]];
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            tau[j] = 0.0;
            continue;
        }
        let alpha = if qr[[j, j]] > 0.0 { -norm } else { norm };
        let v0 = qr[[j, j]] - alpha;
        // Normalize the reflector so its leading entry is 1.
        for i in (j + 1)..m {
            qr[[i, j]] /= v0;
        }
        tau[j] = -v0 / alpha;
        qr[[j, j]] = alpha;
        // Apply to the trailing columns.
        for c in (j + 1)..k {
            let mut dot = qr[[j, c]];
            for i in (j + 1)..m {
                dot += qr[[i, j]] * qr[[i, c]];
            }
            dot *= tau[j];
            qr[[j, c]] -= dot;
            for i in (j + 1)..m {
                qr[[i, c]] -= dot * qr[[i, j]];
            }
        }
    }
    Ok(QrFactors { qr, tau })
}

/// One-sided (Hestenes) Jacobi SVD of `a` (`m x n`).
///
/// Returns singular values sorted descending and the matching right
/// singular vectors as rows of an `n x n` matrix. Deterministic cyclic
/// sweeps; converged when every column pair is numerically orthogonal.
pub fn jacobi_svd(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let (m, n) = a.dim();
    let mut u = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let eps = 1e-14;
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let x = u[[i, p]];
                    let y = u[[i, q]];
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if apq.abs() <= eps * (app * aqq).sqrt().max(f64::MIN_POSITIVE) {
                    continue;
                }
                off = off.max(apq.abs() / (app * aqq).sqrt().max(f64::MIN_POSITIVE));
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = u[[i, p]];
                    let y = u[[i, q]];
                    u[[i, p]] = c * x - s * y;
                    u[[i, q]] = s * x + c * y;
                }
                for i in 0..n {
                    let x = v[[i, p]];
                    let y = v[[i, q]];
                    v[[i, p]] = c * x - s * y;
                    v[[i, q]] = s * x + c * y;
                }
            }
        }
        if off < 1e-13 {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| u.column(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));
    let singular: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut vt = Array2::<f64>::zeros((n, n));
    for (row, &j) in order.iter().enumerate() {
        for i in 0..n {
            vt[[row, i]] = v[[i, j]];
        }
    }
    (singular, vt)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues descending and
/// eigenvectors as columns.
pub fn jacobi_eigh(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut d = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _ in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += d[[p, q]] * d[[p, q]];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&d)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = d[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (d[[q, q]] - d[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let x = d[[i, p]];
                    let y = d[[i, q]];
                    d[[i, p]] = c * x - s * y;
                    d[[i, q]] = s * x + c * y;
                }
                for i in 0..n {
                    let x = d[[p, i]];
                    let y = d[[q, i]];
                    d[[p, i]] = c * x - s * y;
                    d[[q, i]] = s * x + c * y;
                }
                for i in 0..n {
                    let x = v[[i, p]];
                    let y = v[[i, q]];
                    v[[i, p]] = c * x - s * y;
                    v[[i, q]] = s * x + c * y;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[[j, j]].partial_cmp(&d[[i, i]]).unwrap().then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[[i, i]]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (col, &j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[[i, col]] = v[[i, j]];
        }
    }
    (eigenvalues, vectors)
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::Rng;

    use crate::seeding::stream_rng;

    fn random_matrix(m: usize, n: usize, stream: u64) -> Array2<f64> {
        let mut rng = stream_rng(55, stream);
        Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0))
    }

    fn random_spd(n: usize, stream: u64) -> Array2<f64> {
        let b = random_matrix(n, n, stream);
        let mut a = b.t().dot(&b);
        for i in 0..n {
            a[[i, i]] += 0.5;
        }
        a
    }

    #[test]
    fn cholesky_reproduces_matrix() {
        for s in 0..5 {
            let a = random_spd(12, s);
            let l = cholesky(&a).unwrap();
            let back = l.dot(&l.t());
            for (x, y) in back.iter().zip(a.iter()) {
                assert_relative_eq!(x, y, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn triangular_solves_invert() {
        let a = random_spd(15, 9);
        let l = cholesky(&a).unwrap();
        let b = Array1::from_shape_fn(15, |i| (i as f64 * 0.7).sin());
        let y = solve_lower(&l.view(), &b.view());
        let x = solve_lower_transpose(&l.view(), &y.view());
        let back = a.dot(&x);
        for (u, v) in back.iter().zip(b.iter()) {
            assert_relative_eq!(u, v, max_relative = 1e-9, epsilon = 1e-11);
        }
    }

    #[test]
    fn qr_least_squares_matches_normal_equations() {
        let a = random_matrix(40, 6, 3);
        let x_true = Array1::from_shape_fn(6, |i| i as f64 - 2.5);
        let b = a.dot(&x_true);
        let qr = qr_factor(&a).unwrap();
        let x = qr.solve(&b.view());
        for (u, v) in x.iter().zip(x_true.iter()) {
            assert_relative_eq!(u, v, max_relative = 1e-10, epsilon = 1e-12);
        }
        assert!(qr.diagonal_condition() < 1e3);
    }

    #[test]
    fn hat_diagonal_sums_to_rank() {
        let a = random_matrix(30, 5, 8);
        let qr = qr_factor(&a).unwrap();
        let h = qr.hat_diagonal();
        assert_relative_eq!(h.sum(), 5.0, max_relative = 1e-10);
        for v in h.iter() {
            assert!(*v >= -1e-12 && *v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn normal_inverse_trace_matches_direct() {
        let a = random_matrix(25, 4, 2);
        let qr = qr_factor(&a).unwrap();
        // Direct: invert A^T A by solving against unit vectors via Cholesky.
        let ata = a.t().dot(&a);
        let l = cholesky(&ata).unwrap();
        let mut trace = 0.0;
        for c in 0..4 {
            let mut e = Array1::zeros(4);
            e[c] = 1.0;
            let y = solve_lower(&l.view(), &e.view());
            let x = solve_lower_transpose(&l.view(), &y.view());
            trace += x[c];
        }
        assert_relative_eq!(qr.normal_inverse_trace(), trace, max_relative = 1e-8);
    }

    #[test]
    fn svd_orthonormal_rows_and_reconstruction() {
        let a = random_matrix(20, 7, 4);
        let (s, vt) = jacobi_svd(&a);
        for i in 0..7 {
            for j in 0..7 {
                let dot: f64 = (0..7).map(|k| vt[[i, k]] * vt[[j, k]]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expect, epsilon = 1e-9);
            }
        }
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        // Frobenius norm preserved by singular values.
        let fro: f64 = a.iter().map(|v| v * v).sum();
        let sv: f64 = s.iter().map(|v| v * v).sum();
        assert_relative_eq!(fro, sv, max_relative = 1e-10);
    }

    #[test]
    fn eigh_reconstructs_symmetric_matrix() {
        let a = random_spd(9, 6);
        let (w, v) = jacobi_eigh(&a);
        assert!(w.windows(2).all(|p| p[0] >= p[1]));
        let lam = Array2::from_diag(&Array1::from_vec(w.clone()));
        let back = v.dot(&lam).dot(&v.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert_relative_eq!(x, y, max_relative = 1e-8, epsilon = 1e-10);
        }
    }
}
