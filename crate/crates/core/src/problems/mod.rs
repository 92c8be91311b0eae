//! Finite-sum objectives `f(U) = (1/N) Σ f_n(U)` on the Grassmann manifold.

mod completion;
mod karcher;
mod pca;

pub use completion::{CompletionProblem, SparseColumn};
pub use karcher::KarcherProblem;
pub use pca::{PcaOracle, PcaProblem};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grassmann::{horizontal_project, GrassmannPoint, GrassmannTangent};
use crate::manifold::MatrixPoint;
use crate::parallel::{chunked_matrix_sum, chunked_scalar_sum, Execution};

/// A finite-sum objective on Gr(r, d).
///
/// Implementors supply per-sample costs and per-sample *ambient* gradient
/// contributions whose horizontal projection is the sample's Riemannian
/// gradient. Batch and full gradients are the projected arithmetic mean of
/// those contributions, reduced in a fixed order (see [`crate::parallel`]).
pub trait Objective: Sync {
    fn n_samples(&self) -> usize;

    /// `(d, r)`
    fn dims(&self) -> (usize, usize);

    fn sample_cost(&self, p: &GrassmannPoint, n: usize) -> Result<f64>;

    /// Adds an ambient d×r matrix whose horizontal projection at `p` is
    /// `grad f_n(p)`.
    fn add_sample_grad(&self, p: &GrassmannPoint, n: usize, acc: &mut DMatrix<f64>) -> Result<()>;

    /// Held-out loss, when the problem carries a test set.
    fn test_loss(&self, _p: &GrassmannPoint) -> Option<Result<f64>> {
        None
    }

    fn sample_grad(&self, p: &GrassmannPoint, n: usize) -> Result<GrassmannTangent> {
        self.check_index(n)?;
        let mut acc = DMatrix::zeros(p.d(), p.r());
        self.add_sample_grad(p, n, &mut acc)?;
        Ok(horizontal_project(p, acc))
    }

    /// Mean of the member sample gradients at `p`.
    fn batch_grad(&self, p: &GrassmannPoint, batch: &[usize]) -> Result<GrassmannTangent> {
        batch_grad_with(self, p, batch, Execution::default())
    }

    fn grad(&self, p: &GrassmannPoint) -> Result<GrassmannTangent> {
        full_grad_with(self, p, Execution::default())
    }

    fn cost(&self, p: &GrassmannPoint) -> Result<f64> {
        full_cost_with(self, p, Execution::default())
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.n_samples() {
            return Err(Error::ContractViolation(format!(
                "sample index {n} out of range (N = {})",
                self.n_samples()
            )));
        }
        Ok(())
    }

    fn check_point(&self, p: &GrassmannPoint) -> Result<()> {
        if (p.d(), p.r()) != self.dims() {
            return Err(Error::ContractViolation(format!(
                "point is {}x{}, problem expects {:?}",
                p.d(),
                p.r(),
                self.dims()
            )));
        }
        Ok(())
    }
}

/// Batch gradient with an explicit execution mode.
pub fn batch_grad_with<O: Objective + ?Sized>(
    obj: &O,
    p: &GrassmannPoint,
    batch: &[usize],
    exec: Execution,
) -> Result<GrassmannTangent> {
    obj.check_point(p)?;
    if batch.is_empty() {
        return Err(Error::ContractViolation("empty batch".into()));
    }
    for &n in batch {
        obj.check_index(n)?;
    }
    let sum = chunked_matrix_sum(batch, (p.d(), p.r()), exec, |n, acc| {
        obj.add_sample_grad(p, n, acc)
    })?;
    let mean = horizontal_project(p, sum).scale(1.0 / batch.len() as f64);
    debug_assert!(mean.base().is_same_base(p));
    Ok(mean)
}

/// Full gradient `(1/N) Σ grad f_n`, identical to `batch_grad` over `0..N`.
pub fn full_grad_with<O: Objective + ?Sized>(
    obj: &O,
    p: &GrassmannPoint,
    exec: Execution,
) -> Result<GrassmannTangent> {
    let all: Vec<usize> = (0..obj.n_samples()).collect();
    batch_grad_with(obj, p, &all, exec)
}

pub fn full_cost_with<O: Objective + ?Sized>(
    obj: &O,
    p: &GrassmannPoint,
    exec: Execution,
) -> Result<f64> {
    obj.check_point(p)?;
    let all: Vec<usize> = (0..obj.n_samples()).collect();
    let s = chunked_scalar_sum(&all, exec, |n| obj.sample_cost(p, n))?;
    Ok(s / obj.n_samples() as f64)
}
