use nalgebra::DMatrix;

use super::Objective;
use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint, ORTHONORMAL_TOL};
use crate::linalg::orthonormality_residual;
use crate::manifold::MatrixPoint;

/// Karcher mean of subspaces: `min (1/2N) Σ dist(U, Q_n)²`.
#[derive(Clone, Debug)]
pub struct KarcherProblem {
    points: Vec<GrassmannPoint>,
    d: usize,
    r: usize,
}

impl KarcherProblem {
    pub fn new(points: Vec<GrassmannPoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Config("Karcher problem needs at least one point".into()))?;
        let (d, r) = (first.d(), first.r());
        for (i, q) in points.iter().enumerate() {
            if (q.d(), q.r()) != (d, r) {
                return Err(Error::Config(format!("point {i} has a different shape")));
            }
            if orthonormality_residual(q.matrix()) > ORTHONORMAL_TOL {
                return Err(Error::Config(format!("point {i} is not orthonormal")));
            }
        }
        Ok(Self { points, d, r })
    }

    pub fn points(&self) -> &[GrassmannPoint] {
        &self.points
    }
}

impl Objective for KarcherProblem {
    fn n_samples(&self) -> usize {
        self.points.len()
    }

    fn dims(&self) -> (usize, usize) {
        (self.d, self.r)
    }

    fn sample_cost(&self, p: &GrassmannPoint, n: usize) -> Result<f64> {
        let dist = grassmann::dist(p, &self.points[n])?;
        Ok(0.5 * dist * dist)
    }

    // grad f_n = −log(U, Q_n)
    fn add_sample_grad(&self, p: &GrassmannPoint, n: usize, acc: &mut DMatrix<f64>) -> Result<()> {
        let v = grassmann::log(p, &self.points[n])?;
        *acc -= v.carrier();
        Ok(())
    }
}
