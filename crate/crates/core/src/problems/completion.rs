use nalgebra::{DMatrix, DVector};

use super::Objective;
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::linalg::regularized_lstsq;
use crate::manifold::MatrixPoint;

/// Observed entries of one column: sorted row indices and their values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseColumn {
    pub rows: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    /// Builds a column from unsorted `(row, value)` pairs.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let (rows, values) = pairs.into_iter().unzip();
        Self { rows, values }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Rank-r completion: `min (1/N) Σ_n min_a ‖P_Ωn(U a) − P_Ωn(x_n)‖² + λ‖a‖²`.
///
/// Columns with no training entries contribute zero cost and gradient.
#[derive(Clone, Debug)]
pub struct CompletionProblem {
    d: usize,
    r: usize,
    train: Vec<SparseColumn>,
    test: Option<Vec<SparseColumn>>,
    reg: f64,
}

fn validate_column(c: &SparseColumn, d: usize, n: usize, what: &str) -> Result<()> {
    if c.rows.len() != c.values.len() {
        return Err(Error::Config(format!("{what} column {n}: index/value length mismatch")));
    }
    for w in c.rows.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Config(format!(
                "{what} column {n}: row indices not strictly increasing"
            )));
        }
    }
    if let Some(&last) = c.rows.last() {
        if last >= d {
            return Err(Error::Config(format!("{what} column {n}: row {last} >= d = {d}")));
        }
    }
    if c.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{what} column {n}: non-finite value")));
    }
    Ok(())
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

impl CompletionProblem {
    pub fn new(
        d: usize,
        r: usize,
        train: Vec<SparseColumn>,
        test: Option<Vec<SparseColumn>>,
        reg: f64,
    ) -> Result<Self> {
        if r == 0 || r > d {
            return Err(Error::Config(format!("need 0 < r <= d, got r={r}, d={d}")));
        }
        if train.is_empty() {
            return Err(Error::Config("completion problem needs at least one column".into()));
        }
        if !(reg >= 0.0 && reg.is_finite()) {
            return Err(Error::Config(format!("regularizer must be >= 0, got {reg}")));
        }
        for (n, c) in train.iter().enumerate() {
            validate_column(c, d, n, "train")?;
        }
        if let Some(test) = &test {
            if test.len() != train.len() {
                return Err(Error::Config(format!(
                    "test set has {} columns, train has {}",
                    test.len(),
                    train.len()
                )));
            }
            for (n, (c, t)) in train.iter().zip(test).enumerate() {
                validate_column(t, d, n, "test")?;
                if !disjoint(&c.rows, &t.rows) {
                    return Err(Error::Config(format!(
                        "column {n}: train and test entries overlap"
                    )));
                }
            }
        }
        Ok(Self {
            d,
            r,
            train,
            test,
            reg,
        })
    }

    pub fn train(&self) -> &[SparseColumn] {
        &self.train
    }

    pub fn test(&self) -> Option<&[SparseColumn]> {
        self.test.as_deref()
    }

    pub fn regularizer(&self) -> f64 {
        self.reg
    }

    pub fn observed_count(&self) -> usize {
        self.train.iter().map(SparseColumn::len).sum()
    }

    fn restrict(u: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), u.ncols(), |i, j| u[(rows[i], j)])
    }

    /// Closed-form coefficients `a_n` fitted on the training entries of column `n`.
    pub fn solve_coefficients(&self, p: &GrassmannPoint, n: usize) -> Result<DVector<f64>> {
        self.check_index(n)?;
        let col = &self.train[n];
        if col.is_empty() {
            return Ok(DVector::zeros(self.r));
        }
        let a = Self::restrict(p.matrix(), &col.rows);
        let b = DVector::from_column_slice(&col.values);
        Ok(regularized_lstsq(&a, &b, self.reg))
    }

    // (restricted U, coefficients, residual on Ω_n)
    fn fit(&self, p: &GrassmannPoint, n: usize) -> (DVector<f64>, DVector<f64>) {
        let col = &self.train[n];
        let a = Self::restrict(p.matrix(), &col.rows);
        let b = DVector::from_column_slice(&col.values);
        let coef = regularized_lstsq(&a, &b, self.reg);
        let resid = a * &coef - b;
        (coef, resid)
    }

    /// `(1/N) Σ_n ‖P_Γn(U a_n) − P_Γn(x_n)‖²` with `a_n` fitted on Ω_n only.
    pub fn completion_test_loss(&self, p: &GrassmannPoint) -> Result<f64> {
        let test = self
            .test
            .as_ref()
            .ok_or_else(|| Error::Config("problem has no test set".into()))?;
        self.check_point(p)?;
        let u = p.matrix();
        let mut total = 0.0;
        for (n, t) in test.iter().enumerate() {
            if t.is_empty() {
                continue;
            }
            let coef = self.solve_coefficients(p, n)?;
            for (&row, &val) in t.rows.iter().zip(&t.values) {
                let pred = u.row(row).dot(&coef.transpose());
                total += (pred - val).powi(2);
            }
        }
        Ok(total / test.len() as f64)
    }
}

impl Objective for CompletionProblem {
    fn n_samples(&self) -> usize {
        self.train.len()
    }

    fn dims(&self) -> (usize, usize) {
        (self.d, self.r)
    }

    fn sample_cost(&self, p: &GrassmannPoint, n: usize) -> Result<f64> {
        if self.train[n].is_empty() {
            return Ok(0.0);
        }
        let (coef, resid) = self.fit(p, n);
        Ok(resid.norm_squared() + self.reg * coef.norm_squared())
    }

    // Euclidean gradient 2 ρ aᵀ (a held at its optimum), touching only rows in Ω_n
    fn add_sample_grad(&self, p: &GrassmannPoint, n: usize, acc: &mut DMatrix<f64>) -> Result<()> {
        let col = &self.train[n];
        if col.is_empty() {
            return Ok(());
        }
        let (coef, resid) = self.fit(p, n);
        for (k, &row) in col.rows.iter().enumerate() {
            let rho = 2.0 * resid[k];
            for j in 0..self.r {
                acc[(row, j)] += rho * coef[j];
            }
        }
        Ok(())
    }

    fn test_loss(&self, p: &GrassmannPoint) -> Option<Result<f64>> {
        self.test.as_ref().map(|_| self.completion_test_loss(p))
    }
}
