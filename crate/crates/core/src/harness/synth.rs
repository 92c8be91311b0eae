//! Synthetic instances: Gaussian PCA data, random subspace clouds, and
//! planted low-rank completion problems with controlled CN and OS.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grassmann::{gaussian_matrix, random_point, GrassmannPoint};
use crate::linalg::thin_qr;
use crate::problems::{CompletionProblem, KarcherProblem, PcaProblem, SparseColumn};

/// d×N matrix of i.i.d. standard normal columns.
pub fn gen_pca<R: Rng + ?Sized>(n: usize, d: usize, r: usize, rng: &mut R) -> Result<PcaProblem> {
    PcaProblem::new(gaussian_matrix(d, n, rng), r)
}

/// `n` uniformly random points of Gr(r, d).
pub fn gen_karcher<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    r: usize,
    rng: &mut R,
) -> Result<KarcherProblem> {
    let points = (0..n)
        .map(|_| random_point(d, r, rng))
        .collect::<Result<Vec<_>>>()?;
    KarcherProblem::new(points)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCompletionSpec {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// Oversampling ratio: `os·(N + d − r)·r` training entries.
    pub os: f64,
    /// Condition number of the planted matrix.
    pub cn: f64,
    pub noise_std: f64,
    pub reg: f64,
}

impl Default for SyntheticCompletionSpec {
    fn default() -> Self {
        Self {
            n: 5000,
            d: 500,
            r: 5,
            os: 5.0,
            cn: 5.0,
            noise_std: 0.0,
            reg: 0.0,
        }
    }
}

impl SyntheticCompletionSpec {
    /// Number of training entries (the test set has the same size).
    pub fn known_entries(&self) -> usize {
        (self.os * ((self.n + self.d - self.r) * self.r) as f64).round() as usize
    }

    /// Planted singular values `σ_i = CN^{−(i−1)/(r−1)}`, geometric from 1
    /// down to 1/CN (all ones when r = 1).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.r == 1 {
            return vec![1.0];
        }
        (0..self.r)
            .map(|i| self.cn.powf(-(i as f64) / (self.r - 1) as f64))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r > self.d || self.r > self.n {
            return Err(Error::Config(format!(
                "need 0 < r <= min(d, N), got r={}, d={}, N={}",
                self.r, self.d, self.n
            )));
        }
        if !(self.cn >= 1.0) {
            return Err(Error::Config(format!("CN must be >= 1, got {}", self.cn)));
        }
        if !(self.os > 0.0) {
            return Err(Error::Config(format!("OS must be positive, got {}", self.os)));
        }
        let total = self.n * self.d;
        if 2 * self.known_entries() > total {
            return Err(Error::Config(format!(
                "OS too large: {} training plus as many test entries exceed the {total} entries",
                self.known_entries()
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Config("noise_std must be >= 0".into()));
        }
        Ok(())
    }
}

/// A planted completion instance and its ground-truth column space.
#[derive(Clone, Debug)]
pub struct SyntheticCompletion {
    pub problem: CompletionProblem,
    pub planted: GrassmannPoint,
    pub singular_values: Vec<f64>,
}

/// `X = L diag(σ) Rᵀ` with orthonormal `L` (d×r) and `R` (N×r); training and
/// test entries are disjoint uniform samples of equal size.
pub fn gen_completion<R: Rng + ?Sized>(
    spec: &SyntheticCompletionSpec,
    rng: &mut R,
) -> Result<SyntheticCompletion> {
    spec.validate()?;
    let (n, d, r) = (spec.n, spec.d, spec.r);
    let (left, _) = thin_qr(&gaussian_matrix(d, r, rng))?;
    let (right, _) = thin_qr(&gaussian_matrix(n, r, rng))?;
    let sigma = spec.singular_values();
    // scaled left factor L diag(σ)
    let mut ls = left.clone();
    for (j, s) in sigma.iter().enumerate() {
        ls.column_mut(j).scale_mut(*s);
    }
    let k = spec.known_entries();
    let picks = rand::seq::index::sample(rng, n * d, 2 * k).into_vec();
    let mut train: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut test: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (t, &flat) in picks.iter().enumerate() {
        let (col, row) = (flat / d, flat % d);
        let mut v: f64 = (0..r).map(|j| ls[(row, j)] * right[(col, j)]).sum();
        if spec.noise_std > 0.0 {
            v += spec.noise_std * rng.sample::<f64, _>(StandardNormal);
        }
        if t < k {
            train[col].push((row, v));
        } else {
            test[col].push((row, v));
        }
    }
    let problem = CompletionProblem::new(
        d,
        r,
        train.into_iter().map(SparseColumn::from_pairs).collect(),
        Some(test.into_iter().map(SparseColumn::from_pairs).collect()),
        spec.reg,
    )?;
    Ok(SyntheticCompletion {
        problem,
        planted: GrassmannPoint::new(left)?,
        singular_values: sigma,
    })
}
