//! The Grassmann manifold Gr(r, d) of r-dimensional subspaces of R^d.
//!
//! Points are d×r matrices with orthonormal columns; tangent vectors are
//! horizontal d×r matrices (`Uᵀξ = 0`) and the metric is `trace(ξᵀζ)`.
//! Two geometries are offered:
//!
//! * [`GeometryKind::Exact`]: exponential map, parallel translation and the
//!   logarithm map, all in closed form from a thin SVD.
//! * [`GeometryKind::QrProjection`]: QR retraction, its exact inverse, and
//!   projection transport rescaled to be isometric.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, orthonormality_residual, thin_qr, thin_svd, ThinSvd};
use crate::manifold::{Manifold, MatrixPoint, Tangent};

/// Orthonormality tolerance accepted for point construction.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Subspace-equality tolerance on `‖UUᵀ − VVᵀ‖_F`.
pub const SUBSPACE_TOL: f64 = 1e-8;
/// `UᵀV` condition number beyond which the log map is declared undefined.
pub const LOG_COND_LIMIT: f64 = 1e12;
/// Drift above which `exp` re-orthonormalizes its output.
const EXP_DRIFT_TOL: f64 = 1e-12;

/// A representative `U` (d×r, orthonormal columns) of a subspace `[U]`.
///
/// Cloning is cheap; clones share storage and count as the same base point.
#[derive(Clone, Debug)]
pub struct GrassmannPoint {
    u: Arc<DMatrix<f64>>,
}

impl GrassmannPoint {
    /// Wraps an orthonormal matrix, rejecting drift above [`ORTHONORMAL_TOL`].
    pub fn new(u: DMatrix<f64>) -> Result<Self> {
        if u.ncols() == 0 || u.ncols() > u.nrows() {
            return Err(Error::ContractViolation(format!(
                "need 0 < r <= d, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite point".into()));
        }
        let res = orthonormality_residual(&u);
        if res > ORTHONORMAL_TOL {
            return Err(Error::ContractViolation(format!(
                "columns not orthonormal (‖UᵀU − I‖ = {res:e})"
            )));
        }
        Ok(Self { u: Arc::new(u) })
    }

    /// Orthonormalizes an arbitrary full-rank d×r matrix (Q factor of its QR).
    pub fn from_span(a: &DMatrix<f64>) -> Result<Self> {
        let (q, _) = thin_qr(a)?;
        Ok(Self { u: Arc::new(q) })
    }

    fn from_trusted(u: DMatrix<f64>) -> Self {
        Self { u: Arc::new(u) }
    }

    pub fn d(&self) -> usize {
        self.u.nrows()
    }

    pub fn r(&self) -> usize {
        self.u.ncols()
    }

    /// `‖UUᵀ − VVᵀ‖_F`, computed as `√2 ‖(I − UUᵀ)V‖_F` to avoid cancellation.
    pub fn projector_distance(&self, other: &Self) -> f64 {
        let u = &*self.u;
        let v = &*other.u;
        let resid = v - u * u.tr_mul(v);
        std::f64::consts::SQRT_2 * resid.norm()
    }

    /// Subspace equality up to [`SUBSPACE_TOL`].
    pub fn same_subspace(&self, other: &Self) -> bool {
        self.projector_distance(other) <= SUBSPACE_TOL
    }

    /// The representative `U O` for an r×r orthogonal `O`.
    pub fn rotated(&self, o: &DMatrix<f64>) -> Result<Self> {
        Self::new(&*self.u * o)
    }
}

impl MatrixPoint for GrassmannPoint {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    fn is_same_base(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.u, &other.u) || *self.u == *other.u
    }
}

pub type GrassmannTangent = Tangent<GrassmannPoint>;

/// Which retraction / transport pair the optimizer uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    /// Exponential map, parallel translation, logarithm map.
    Exact,
    /// QR retraction, isometric projection transport, inverse QR retraction.
    QrProjection,
}

impl std::str::FromStr for GeometryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "qr" => Ok(Self::QrProjection),
            other => Err(Error::Config(format!("unknown geometry '{other}'"))),
        }
    }
}

impl std::fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::QrProjection => "qr",
        })
    }
}

/// Gr(r, d) with a chosen geometry.
#[derive(Clone, Copy, Debug)]
pub struct Grassmann {
    d: usize,
    r: usize,
    kind: GeometryKind,
}

impl Grassmann {
    pub fn new(d: usize, r: usize, kind: GeometryKind) -> Result<Self> {
        if r == 0 || r > d {
            return Err(Error::Config(format!("need 0 < r <= d, got r={r}, d={d}")));
        }
        Ok(Self { d, r, kind })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    fn check_point(&self, p: &GrassmannPoint) -> Result<()> {
        if p.d() != self.d || p.r() != self.r {
            return Err(Error::ContractViolation(format!(
                "point is {}x{}, manifold is Gr({}, {})",
                p.d(),
                p.r(),
                self.r,
                self.d
            )));
        }
        Ok(())
    }
}

/// `(I − UUᵀ) v`
pub fn horizontal_project(p: &GrassmannPoint, v: DMatrix<f64>) -> GrassmannTangent {
    let u = p.matrix();
    let coef = u.tr_mul(&v);
    let mut out = v;
    out.gemm(-1.0, u, &coef, 1.0);
    Tangent::new_unchecked(p.clone(), out)
}

/// Principal angles between `[U]` and `[V]`, ascending, via `arccos σ(UᵀV)`.
pub fn principal_angles(p: &GrassmannPoint, q: &GrassmannPoint) -> Vec<f64> {
    let m = p.matrix().tr_mul(q.matrix());
    let sigma = match thin_svd(&m) {
        Ok(svd) => svd.s,
        Err(_) => m.singular_values(),
    };
    let mut angles: Vec<f64> = sigma
        .iter()
        .map(|s| s.clamp(-1.0, 1.0).acos())
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles
}

// Geodesic data for ξ = W diag(θ) Vᵀ, with `vt` holding Vᵀ.
struct Geodesic {
    w: DMatrix<f64>,
    theta: DVector<f64>,
    vt: DMatrix<f64>,
}

impl Geodesic {
    fn from_svd(svd: ThinSvd) -> Self {
        Self {
            w: svd.w,
            theta: svd.s,
            vt: svd.vt,
        }
    }

    fn tangent_carrier(&self) -> DMatrix<f64> {
        let mut ws = self.w.clone();
        for (j, t) in self.theta.iter().enumerate() {
            ws.column_mut(j).scale_mut(*t);
        }
        ws * &self.vt
    }

    // U(1) = [U V, W] [cos Θ; sin Θ] Vᵀ
    fn endpoint(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let mut uv = u * self.vt.transpose();
        let mut ws = self.w.clone();
        for (j, t) in self.theta.iter().enumerate() {
            uv.column_mut(j).scale_mut(t.cos());
            ws.column_mut(j).scale_mut(t.sin());
        }
        (uv + ws) * &self.vt
    }

    // ζ(1) = ζ + ([U V, W] [−sin Θ; cos Θ − I]) Wᵀζ
    fn translate(&self, u: &DMatrix<f64>, zeta: &DMatrix<f64>) -> DMatrix<f64> {
        let wz = self.w.tr_mul(zeta);
        let mut uv = u * self.vt.transpose();
        let mut ws = self.w.clone();
        for (j, t) in self.theta.iter().enumerate() {
            uv.column_mut(j).scale_mut(-t.sin());
            ws.column_mut(j).scale_mut(t.cos() - 1.0);
        }
        let mut out = zeta.clone();
        out.gemm(1.0, &(uv + ws), &wz, 1.0);
        out
    }
}

fn finalize_point(u1: DMatrix<f64>) -> Result<GrassmannPoint> {
    if u1.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite point after exp".into()));
    }
    if orthonormality_residual(&u1) > EXP_DRIFT_TOL {
        let (q, _) = thin_qr(&u1)?;
        return Ok(GrassmannPoint::from_trusted(q));
    }
    Ok(GrassmannPoint::from_trusted(u1))
}

fn geodesic_of(xi: &GrassmannTangent) -> Result<Geodesic> {
    Ok(Geodesic::from_svd(thin_svd(xi.carrier())?))
}

/// Exponential map `U(1) = [U V, W] [cos Σ; sin Σ] Vᵀ` with `ξ = W Σ Vᵀ`.
pub fn exp(p: &GrassmannPoint, xi: &GrassmannTangent) -> Result<GrassmannPoint> {
    xi.check_base(p)?;
    let g = geodesic_of(xi)?;
    finalize_point(g.endpoint(p.matrix()))
}

/// Parallel translation of `zeta` along the geodesic with initial velocity `eta`.
/// The result is tangent at `exp(p, eta)` (the returned point).
pub fn exp_and_translate(
    p: &GrassmannPoint,
    eta: &GrassmannTangent,
    zeta: &GrassmannTangent,
) -> Result<(GrassmannPoint, GrassmannTangent)> {
    eta.check_base(p)?;
    zeta.check_base(p)?;
    let g = geodesic_of(eta)?;
    let dest = finalize_point(g.endpoint(p.matrix()))?;
    let moved = g.translate(p.matrix(), zeta.carrier());
    Ok((dest.clone(), Tangent::new_unchecked(dest, moved)))
}

pub fn parallel_translate(
    p: &GrassmannPoint,
    eta: &GrassmannTangent,
    zeta: &GrassmannTangent,
) -> Result<GrassmannTangent> {
    exp_and_translate(p, eta, zeta).map(|(_, t)| t)
}

fn log_geodesic(p: &GrassmannPoint, q: &GrassmannPoint) -> Result<Geodesic> {
    let u = p.matrix();
    let v = q.matrix();
    if u.shape() != v.shape() {
        return Err(Error::ContractViolation("log between different Gr(r, d)".into()));
    }
    let m = u.tr_mul(v);
    let msvd = thin_svd(&m)?;
    let smin = msvd.s.min();
    if smin <= 0.0 || msvd.s.max() / smin > LOG_COND_LIMIT {
        return Err(Error::Domain(
            "log undefined: orthogonal principal direction".into(),
        ));
    }
    // (V − U UᵀV)(UᵀV)⁻¹ with (UᵀV)⁻¹ = Z S⁻¹ Yᵀ from UᵀV = Y S Zᵀ
    let mut resid = v.clone();
    resid.gemm(-1.0, u, &m, 1.0);
    let mut z_sinv = msvd.vt.transpose();
    for (j, s) in msvd.s.iter().enumerate() {
        z_sinv.column_mut(j).scale_mut(1.0 / s);
    }
    let minv = z_sinv * msvd.w.transpose();
    let a = resid * minv;
    let mut g = Geodesic::from_svd(thin_svd(&a)?);
    g.theta.iter_mut().for_each(|s| *s = s.atan());
    Ok(g)
}

/// Logarithm map `ξ = W arctan(Σ) Vᵀ` where `W Σ Vᵀ` is the thin SVD of
/// `(V − UUᵀV)(UᵀV)⁻¹`.
///
/// Fails with [`Error::Domain`] when `UᵀV` is numerically singular.
pub fn log(p: &GrassmannPoint, q: &GrassmannPoint) -> Result<GrassmannTangent> {
    if p.is_same_base(q) {
        return Ok(Tangent::zero(p));
    }
    let g = log_geodesic(p, q)?;
    Ok(horizontal_project(p, g.tangent_carrier()))
}

/// Geodesic distance `‖log(p, q)‖`.
pub fn dist(p: &GrassmannPoint, q: &GrassmannPoint) -> Result<f64> {
    Ok(log(p, q)?.carrier().norm())
}

/// Q factor of the thin QR of `U + ξ`, R diagonal positive.
pub fn qr_retract(p: &GrassmannPoint, xi: &GrassmannTangent) -> Result<GrassmannPoint> {
    xi.check_base(p)?;
    let (q, _) = thin_qr(&(p.matrix() + xi.carrier()))?;
    Ok(GrassmannPoint::from_trusted(q))
}

fn check_log_domain(m: &DMatrix<f64>) -> Result<()> {
    if condition_number(m) > LOG_COND_LIMIT {
        return Err(Error::Domain(
            "inverse retraction undefined: orthogonal principal direction".into(),
        ));
    }
    Ok(())
}

/// Exact inverse of [`qr_retract`]: `ξ = V (UᵀV)⁻¹ − U`, for which
/// `span(U + ξ) = span(V)`.
pub fn qr_inverse_retract(p: &GrassmannPoint, q: &GrassmannPoint) -> Result<GrassmannTangent> {
    if p.is_same_base(q) {
        return Ok(Tangent::zero(p));
    }
    let u = p.matrix();
    let v = q.matrix();
    let m = u.tr_mul(v);
    check_log_domain(&m)?;
    let minv = m
        .try_inverse()
        .ok_or_else(|| Error::Domain("inverse retraction: singular UᵀV".into()))?;
    let xi = v * minv - u;
    Ok(horizontal_project(p, xi))
}

/// Projects onto the horizontal space at `q` and rescales to the original norm.
fn project_isometric(q: &GrassmannPoint, xi: &DMatrix<f64>) -> GrassmannTangent {
    let target = xi.norm();
    let mut out = horizontal_project(q, xi.clone()).into_carrier();
    let n = out.norm();
    if n > 0.0 {
        out *= target / n;
    }
    Tangent::new_unchecked(q.clone(), out)
}

/// Projection transport to `qr_retract(p, eta)`, rescaled to preserve the norm.
pub fn project_transport(
    p: &GrassmannPoint,
    eta: &GrassmannTangent,
    xi: &GrassmannTangent,
) -> Result<GrassmannTangent> {
    xi.check_base(p)?;
    let q = qr_retract(p, eta)?;
    Ok(project_isometric(&q, xi.carrier()))
}

/// Karcher mean of subspaces; see [`crate::manifold::karcher_mean`].
pub fn karcher_mean(points: &[GrassmannPoint], tol: f64, max_iter: usize) -> Result<GrassmannPoint> {
    let p0 = points
        .first()
        .ok_or_else(|| Error::ContractViolation("Karcher mean of an empty set".into()))?;
    let g = Grassmann::new(p0.d(), p0.r(), GeometryKind::Exact)?;
    crate::manifold::karcher_mean(&g, points, tol, max_iter)
}

/// Standard-normal d×r matrix.
pub fn gaussian_matrix<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(d, r, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniformly distributed subspace: Q of the thin QR of a Gaussian draw.
pub fn random_point<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Result<GrassmannPoint> {
    if r == 0 || r > d {
        return Err(Error::Config(format!("need 0 < r <= d, got r={r}, d={d}")));
    }
    GrassmannPoint::from_span(&gaussian_matrix(d, r, rng))
}

/// Unit-norm horizontal tangent at `p` with a Gaussian direction.
pub fn random_tangent<R: Rng + ?Sized>(p: &GrassmannPoint, rng: &mut R) -> GrassmannTangent {
    loop {
        let t = horizontal_project(p, gaussian_matrix(p.d(), p.r(), rng));
        let n = t.carrier().norm();
        if n > 1e-300 {
            return t.scale(1.0 / n);
        }
    }
}

impl Manifold for Grassmann {
    type Point = GrassmannPoint;

    fn dim_ambient(&self) -> usize {
        self.d
    }

    fn dim_subspace(&self) -> usize {
        self.r
    }

    fn inner(&self, p: &GrassmannPoint, xi: &GrassmannTangent, zeta: &GrassmannTangent) -> Result<f64> {
        xi.check_base(p)?;
        zeta.check_base(p)?;
        Ok(xi.carrier().dot(zeta.carrier()))
    }

    fn project(&self, p: &GrassmannPoint, v: DMatrix<f64>) -> GrassmannTangent {
        horizontal_project(p, v)
    }

    fn retract(&self, p: &GrassmannPoint, xi: &GrassmannTangent) -> Result<GrassmannPoint> {
        self.check_point(p)?;
        match self.kind {
            GeometryKind::Exact => exp(p, xi),
            GeometryKind::QrProjection => qr_retract(p, xi),
        }
    }

    fn inverse_retract(&self, p: &GrassmannPoint, q: &GrassmannPoint) -> Result<GrassmannTangent> {
        self.check_point(p)?;
        self.check_point(q)?;
        match self.kind {
            GeometryKind::Exact => log(p, q),
            GeometryKind::QrProjection => qr_inverse_retract(p, q),
        }
    }

    fn transport(
        &self,
        p: &GrassmannPoint,
        eta: &GrassmannTangent,
        xi: &GrassmannTangent,
    ) -> Result<GrassmannTangent> {
        match self.kind {
            GeometryKind::Exact => parallel_translate(p, eta, xi),
            GeometryKind::QrProjection => project_transport(p, eta, xi),
        }
    }

    fn transport_to(
        &self,
        p: &GrassmannPoint,
        q: &GrassmannPoint,
        xi: &GrassmannTangent,
    ) -> Result<GrassmannTangent> {
        xi.check_base(p)?;
        if p.is_same_base(q) {
            return Ok(Tangent::new_unchecked(q.clone(), xi.carrier().clone()));
        }
        match self.kind {
            GeometryKind::Exact => {
                let g = log_geodesic(p, q)?;
                let u1 = g.endpoint(p.matrix());
                let moved = g.translate(p.matrix(), xi.carrier());
                // U(1) and q span the same subspace; re-express at q's representative
                let o = u1.tr_mul(q.matrix());
                let at_q = horizontal_project(q, moved * o).into_carrier();
                Ok(Tangent::new_unchecked(q.clone(), at_q))
            }
            GeometryKind::QrProjection => {
                check_log_domain(&p.matrix().tr_mul(q.matrix()))?;
                Ok(project_isometric(q, xi.carrier()))
            }
        }
    }

    fn exp(&self, p: &GrassmannPoint, xi: &GrassmannTangent) -> Result<GrassmannPoint> {
        exp(p, xi)
    }

    fn log(&self, p: &GrassmannPoint, q: &GrassmannPoint) -> Result<GrassmannTangent> {
        log(p, q)
    }
}
