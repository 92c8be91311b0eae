//! The geometric vocabulary shared by every optimizer: points, tangent
//! vectors tied to their base point, and the operations a matrix manifold
//! must provide (metric, retraction and its inverse, vector transport,
//! exponential and logarithm maps).
//!
//! Everything here is a pure function of its arguments, so geometry calls can
//! be issued from any number of worker threads.

use std::fmt::Debug;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A manifold point backed by a matrix representative.
pub trait MatrixPoint: Clone + Send + Sync + Debug {
    fn matrix(&self) -> &DMatrix<f64>;

    /// True when both values hold the same representative (storage identity
    /// or bitwise-equal matrices). This is *not* subspace equality.
    fn is_same_base(&self, other: &Self) -> bool;
}

/// A tangent vector together with the point whose tangent space it lives in.
///
/// Arithmetic between vectors with different base points is rejected with
/// [`Error::ContractViolation`].
#[derive(Clone, Debug)]
pub struct Tangent<P> {
    base: P,
    carrier: DMatrix<f64>,
}

impl<P: MatrixPoint> Tangent<P> {
    pub fn new(base: P, carrier: DMatrix<f64>) -> Result<Self> {
        if base.matrix().shape() != carrier.shape() {
            return Err(Error::ContractViolation(format!(
                "tangent of shape {:?} at a point of shape {:?}",
                carrier.shape(),
                base.matrix().shape()
            )));
        }
        Ok(Self { base, carrier })
    }

    pub(crate) fn new_unchecked(base: P, carrier: DMatrix<f64>) -> Self {
        debug_assert_eq!(base.matrix().shape(), carrier.shape());
        Self { base, carrier }
    }

    pub fn zero(base: &P) -> Self {
        let (d, r) = base.matrix().shape();
        Self {
            base: base.clone(),
            carrier: DMatrix::zeros(d, r),
        }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn carrier(&self) -> &DMatrix<f64> {
        &self.carrier
    }

    pub fn into_carrier(self) -> DMatrix<f64> {
        self.carrier
    }

    /// Errors unless this vector lives at `p`.
    pub fn check_base(&self, p: &P) -> Result<()> {
        if self.base.is_same_base(p) {
            Ok(())
        } else {
            Err(Error::ContractViolation(
                "tangent vector used at a point other than its base".into(),
            ))
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        other.check_base(&self.base)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            base: self.base.clone(),
            carrier: &self.carrier * c,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            base: self.base.clone(),
            carrier: &self.carrier + &other.carrier,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            base: self.base.clone(),
            carrier: &self.carrier - &other.carrier,
        })
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            base: self.base.clone(),
            carrier: &self.carrier * a + &other.carrier * b,
        })
    }
}

/// Operations every manifold implementation provides.
///
/// Retraction, transport and their inverses may be cheaper surrogates of the
/// exponential map and parallel translation; `exp`, `log` and `dist` are
/// always the exact Riemannian ones.
pub trait Manifold: Send + Sync {
    type Point: MatrixPoint;

    /// Ambient dimension `d`.
    fn dim_ambient(&self) -> usize;
    /// Subspace (or column) dimension `r`.
    fn dim_subspace(&self) -> usize;

    fn inner(
        &self,
        p: &Self::Point,
        xi: &Tangent<Self::Point>,
        zeta: &Tangent<Self::Point>,
    ) -> Result<f64>;

    fn norm(&self, p: &Self::Point, xi: &Tangent<Self::Point>) -> Result<f64> {
        Ok(self.inner(p, xi, xi)?.max(0.0).sqrt())
    }

    /// Orthogonal projection of an ambient matrix onto the tangent space at `p`.
    fn project(&self, p: &Self::Point, v: DMatrix<f64>) -> Tangent<Self::Point>;

    fn retract(&self, p: &Self::Point, xi: &Tangent<Self::Point>) -> Result<Self::Point>;

    fn inverse_retract(&self, p: &Self::Point, q: &Self::Point) -> Result<Tangent<Self::Point>>;

    /// Transports `xi` (at `p`) along `eta` (at `p`); the result lives at
    /// `retract(p, eta)`.
    fn transport(
        &self,
        p: &Self::Point,
        eta: &Tangent<Self::Point>,
        xi: &Tangent<Self::Point>,
    ) -> Result<Tangent<Self::Point>>;

    /// Transports `xi` from `p` to `q` along `inverse_retract(p, q)`, with the
    /// result expressed at the representative `q` (not at a recomputed
    /// `retract(p, inverse_retract(p, q))`).
    fn transport_to(
        &self,
        p: &Self::Point,
        q: &Self::Point,
        xi: &Tangent<Self::Point>,
    ) -> Result<Tangent<Self::Point>>;

    fn exp(&self, p: &Self::Point, xi: &Tangent<Self::Point>) -> Result<Self::Point>;

    fn log(&self, p: &Self::Point, q: &Self::Point) -> Result<Tangent<Self::Point>>;

    /// Geodesic distance `‖log(p, q)‖`.
    fn dist(&self, p: &Self::Point, q: &Self::Point) -> Result<f64> {
        let v = self.log(p, q)?;
        self.norm(p, &v)
    }
}

/// Karcher mean by unit-step fixed-point iteration
/// `w ← exp(w, (1/m) Σ log(w, w_i))`, started at `points[0]`.
///
/// Stops once the mean tangent has norm at most `tol`; returns
/// [`Error::Convergence`] carrying the last iterate after `max_iter` steps.
pub fn karcher_mean<M: Manifold>(
    manifold: &M,
    points: &[M::Point],
    tol: f64,
    max_iter: usize,
) -> Result<M::Point> {
    let first = points
        .first()
        .ok_or_else(|| Error::ContractViolation("Karcher mean of an empty set".into()))?;
    let mut w = first.clone();
    let m = points.len() as f64;
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iter {
        let mut acc = DMatrix::zeros(w.matrix().nrows(), w.matrix().ncols());
        for q in points {
            acc += manifold.log(&w, q)?.carrier();
        }
        acc /= m;
        let step = Tangent::new_unchecked(w.clone(), acc);
        residual = manifold.norm(&w, &step)?;
        if residual <= tol {
            return Ok(w);
        }
        w = manifold.exp(&w, &step)?;
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
        last: Box::new(w.matrix().clone()),
    })
}
