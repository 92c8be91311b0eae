#![allow(dead_code)]

use nalgebra::{DMatrix, SVD};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riemann_svrg::grassmann::{exp, gaussian_matrix, random_point, random_tangent};
use riemann_svrg::{GrassmannPoint, GrassmannTangent, MatrixPoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform r×r orthogonal matrix.
pub fn random_orthogonal<R: Rng>(r: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(r, r, rng);
    let qr = g.qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..r {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// A point at geodesic distance `radius` from `p` in a random direction.
pub fn point_at<R: Rng>(p: &GrassmannPoint, radius: f64, rng: &mut R) -> GrassmannPoint {
    let xi = random_tangent(p, rng).scale(radius);
    exp(p, &xi).unwrap()
}

pub fn random_pair<R: Rng>(d: usize, r: usize, radius: f64, rng: &mut R) -> (GrassmannPoint, GrassmannPoint) {
    let p = random_point(d, r, rng).unwrap();
    let q = point_at(&p, radius, rng);
    (p, q)
}

/// `‖UUᵀ − VVᵀ‖_F`, computed directly from the projectors.
pub fn projector_gap(p: &GrassmannPoint, q: &GrassmannPoint) -> f64 {
    let a = p.matrix() * p.matrix().transpose();
    let b = q.matrix() * q.matrix().transpose();
    (a - b).norm()
}

/// Principal angles from the singular values of UᵀV.
pub fn principal_angle_oracle(p: &GrassmannPoint, q: &GrassmannPoint) -> Vec<f64> {
    let m = p.matrix().transpose() * q.matrix();
    let svd = SVD::new(m, false, false);
    svd.singular_values.iter().map(|s| s.min(1.0).acos()).collect()
}

/// `trace(AᵀB)` by explicit double loop.
pub fn trace_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Ordinary least squares `y ≈ a x + b`; returns `(a, b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let a = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, my - a * mx, r2)
}

/// Best relative error of central differences of `f` along the geodesic
/// `t ↦ exp(p, tξ)` against `⟨grad, ξ⟩`, over `h ∈ {1e-4, 1e-5, 1e-6}`.
pub fn fd_relative_error<F>(p: &GrassmannPoint, grad: &GrassmannTangent, xi: &GrassmannTangent, f: F) -> f64
where
    F: Fn(&GrassmannPoint) -> f64,
{
    let expected = trace_inner(grad.carrier(), xi.carrier());
    let scale = expected.abs().max(1e-12);
    [1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&h| {
            let plus = f(&exp(p, &xi.scale(h)).unwrap());
            let minus = f(&exp(p, &xi.scale(-h)).unwrap());
            ((plus - minus) / (2.0 * h) - expected).abs() / scale
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}
