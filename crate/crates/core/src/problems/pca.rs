use nalgebra::{DMatrix, SymmetricEigen};

use super::Objective;
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::manifold::MatrixPoint;

/// `min (1/N) Σ ‖x_n − UUᵀx_n‖²` over Gr(r, d).
#[derive(Clone, Debug)]
pub struct PcaProblem {
    x: DMatrix<f64>,
    r: usize,
}

/// Eigendecomposition optimum: top-r eigenvectors of `(1/N) X Xᵀ`.
#[derive(Clone, Debug)]
pub struct PcaOracle {
    pub point: GrassmannPoint,
    pub loss: f64,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

impl PcaProblem {
    /// `x` is d×N with one sample per column.
    pub fn new(x: DMatrix<f64>, r: usize) -> Result<Self> {
        let (d, n) = x.shape();
        if n == 0 {
            return Err(Error::Config("PCA needs at least one sample".into()));
        }
        if r == 0 || r > d {
            return Err(Error::Config(format!("need 0 < r <= d, got r={r}, d={d}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("PCA data contains non-finite entries".into()));
        }
        Ok(Self { x, r })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Maximization form `(1/N) Σ x_nᵀUUᵀx_n`.
    pub fn explained(&self, p: &GrassmannPoint) -> f64 {
        let proj = p.matrix().tr_mul(&self.x);
        proj.norm_squared() / self.x.ncols() as f64
    }

    /// `(1/N) Σ ‖x_n‖²`
    pub fn total_energy(&self) -> f64 {
        self.x.norm_squared() / self.x.ncols() as f64
    }

    pub fn oracle(&self) -> Result<PcaOracle> {
        let (d, n) = self.x.shape();
        let cov = (&self.x * self.x.transpose()) / n as f64;
        let eig = SymmetricEigen::try_new(cov, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut u = DMatrix::zeros(d, self.r);
        for (j, &k) in order.iter().take(self.r).enumerate() {
            u.set_column(j, &eig.eigenvectors.column(k));
        }
        let point = GrassmannPoint::from_span(&u)?;
        let loss = self.cost(&point)?;
        Ok(PcaOracle {
            point,
            loss,
            eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        })
    }
}

impl Objective for PcaProblem {
    fn n_samples(&self) -> usize {
        self.x.ncols()
    }

    fn dims(&self) -> (usize, usize) {
        (self.x.nrows(), self.r)
    }

    fn sample_cost(&self, p: &GrassmannPoint, n: usize) -> Result<f64> {
        let x = self.x.column(n);
        let y = p.matrix().tr_mul(&x);
        let res = x - p.matrix() * y;
        Ok(res.norm_squared())
    }

    // −2 (I − UUᵀ) x xᵀU, written directly in horizontal form
    fn add_sample_grad(&self, p: &GrassmannPoint, n: usize, acc: &mut DMatrix<f64>) -> Result<()> {
        let u = p.matrix();
        let x = self.x.column(n);
        let y = u.tr_mul(&x);
        let mut res = x.clone_owned();
        res.gemv(-1.0, u, &y, 1.0);
        acc.ger(-2.0, &res, &y, 1.0);
        Ok(())
    }
}
