//! Small dense kernels on top of nalgebra: sign-fixed thin QR, sorted thin
//! SVD, and the least-squares solve used by matrix completion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD `a = w * diag(s) * vt`, singular values nonnegative and descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub w: DMatrix<f64>,
    pub s: DVector<f64>,
    pub vt: DMatrix<f64>,
}

/// Thin SVD by one-sided Jacobi rotations.
///
/// nalgebra's bidiagonal SVD occasionally returns wrong singular values for
/// rank-deficient inputs, which is exactly what low-rank tangent vectors
/// produce. Jacobi is slower for large square inputs but the matrices here
/// have few columns. Columns of `w` belonging to a zero singular value are
/// zero.
pub fn thin_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite entry passed to SVD".into()));
    }
    if a.nrows() < a.ncols() {
        let t = jacobi_svd(&a.transpose())?;
        return Ok(ThinSvd {
            w: t.vt.transpose(),
            s: t.s,
            vt: t.w.transpose(),
        });
    }
    jacobi_svd(a)
}

const JACOBI_MAX_SWEEPS: usize = 80;

fn jacobi_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    let (d, r) = a.shape();
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(r, r);
    let tol = f64::EPSILON * (d as f64).sqrt();
    let mut converged = r < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..r - 1 {
            for q in p + 1..r {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut u, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(Error::Numeric("Jacobi SVD did not converge".into()));
    }
    let norms: Vec<f64> = (0..r).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut w = DMatrix::zeros(d, r);
    let mut s = DVector::zeros(r);
    let mut vt = DMatrix::zeros(r, r);
    for (k, &j) in order.iter().enumerate() {
        s[k] = norms[j];
        if norms[j] > 0.0 {
            w.set_column(k, &(u.column(j) / norms[j]));
        }
        vt.set_row(k, &v.column(j).transpose());
    }
    Ok(ThinSvd { w, s, vt })
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Thin QR of a tall matrix with the diagonal of R made nonnegative.
///
/// Returns `(q, r)`. Fails when the matrix is numerically rank deficient.
pub fn thin_qr(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (d, r) = a.shape();
    if r > d {
        return Err(Error::ContractViolation(format!(
            "thin QR needs rows >= cols, got {d}x{r}"
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite entry passed to QR".into()));
    }
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut rf = qr.r();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for j in 0..r {
        let diag = rf[(j, j)];
        if diag.abs() <= 1e-14 * scale {
            return Err(Error::Numeric(format!(
                "rank-deficient matrix in QR (|R[{j},{j}]| = {:e})",
                diag.abs()
            )));
        }
        if diag < 0.0 {
            q.column_mut(j).neg_mut();
            rf.row_mut(j).neg_mut();
        }
    }
    Ok((q, rf))
}

/// `‖UᵀU − I‖_F`
pub fn orthonormality_residual(u: &DMatrix<f64>) -> f64 {
    let g = u.tr_mul(u);
    let r = g.nrows();
    (g - DMatrix::<f64>::identity(r, r)).norm()
}

/// 2-norm condition number of a square matrix; infinite when singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = match thin_svd(m) {
        Ok(svd) => svd.s,
        Err(_) => return f64::INFINITY,
    };
    let max = s.max();
    let min = s.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimum-norm solution of `min ‖A a − b‖² + reg ‖a‖²`.
///
/// Uses the normal equations through a Cholesky factorization and falls back
/// to an SVD pseudo-inverse when `A` is (numerically) rank deficient.
pub fn regularized_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, reg: f64) -> DVector<f64> {
    let (k, r) = a.shape();
    if k >= r || reg > 0.0 {
        let mut gram = a.tr_mul(a);
        for i in 0..r {
            gram[(i, i)] += reg;
        }
        let rhs = a.tr_mul(b);
        if let Some(chol) = gram.clone().cholesky() {
            let l = chol.l_dirty();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..r {
                lo = lo.min(l[(i, i)].abs());
                hi = hi.max(l[(i, i)].abs());
            }
            if hi > 0.0 && (lo / hi) > 1e-7 {
                return chol.solve(&rhs);
            }
        }
    }
    pinv_solve(a, b, reg)
}

fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, reg: f64) -> DVector<f64> {
    let (_, r) = a.shape();
    let svd = match thin_svd(a) {
        Ok(svd) => svd,
        Err(_) => return DVector::zeros(r),
    };
    let (u, vt, s) = (&svd.w, &svd.vt, &svd.s);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cutoff = smax * 1e-12 * (a.nrows().max(r) as f64);
    let utb = u.tr_mul(b);
    let mut coef = DVector::zeros(s.len());
    for i in 0..s.len() {
        if s[i] > cutoff {
            coef[i] = s[i] * utb[i] / (s[i] * s[i] + reg);
        }
    }
    vt.tr_mul(&coef)
}
