//! Order-stable reductions over sample indices.
//!
//! Indices are split into fixed-size chunks; each chunk is summed
//! sequentially and the chunk partials are combined in index order. The
//! partition never depends on the thread count, so the parallel and
//! sequential paths produce bitwise-identical results.

use nalgebra::DMatrix;

use crate::error::Result;

/// Number of samples summed sequentially before partials are combined.
pub const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Chunks are evaluated on the rayon pool (requires the `parallel` feature;
    /// falls back to sequential without it).
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

fn sum_chunk<F>(chunk: &[usize], shape: (usize, usize), f: &F) -> Result<DMatrix<f64>>
where
    F: Fn(usize, &mut DMatrix<f64>) -> Result<()>,
{
    let mut acc = DMatrix::zeros(shape.0, shape.1);
    for &i in chunk {
        f(i, &mut acc)?;
    }
    Ok(acc)
}

fn combine(partials: Vec<DMatrix<f64>>, shape: (usize, usize)) -> DMatrix<f64> {
    let mut it = partials.into_iter();
    let mut total = it.next().unwrap_or_else(|| DMatrix::zeros(shape.0, shape.1));
    for p in it {
        total += p;
    }
    total
}

/// Sums the matrix contributions `f(i, acc)` over `indices`.
pub fn chunked_matrix_sum<F>(
    indices: &[usize],
    shape: (usize, usize),
    exec: Execution,
    f: F,
) -> Result<DMatrix<f64>>
where
    F: Fn(usize, &mut DMatrix<f64>) -> Result<()> + Sync,
{
    if indices.len() <= CHUNK {
        return sum_chunk(indices, shape, &f);
    }
    let partials: Vec<DMatrix<f64>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            indices
                .par_chunks(CHUNK)
                .map(|c| sum_chunk(c, shape, &f))
                .collect::<Result<_>>()?
        }
        _ => indices
            .chunks(CHUNK)
            .map(|c| sum_chunk(c, shape, &f))
            .collect::<Result<_>>()?,
    };
    Ok(combine(partials, shape))
}

/// Sums the scalars `f(i)` over `indices` with the same chunking.
pub fn chunked_scalar_sum<F>(indices: &[usize], exec: Execution, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let chunk_sum = |c: &[usize]| -> Result<f64> {
        let mut s = 0.0;
        for &i in c {
            s += f(i)?;
        }
        Ok(s)
    };
    if indices.len() <= CHUNK {
        return chunk_sum(indices);
    }
    let partials: Vec<f64> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            indices
                .par_chunks(CHUNK)
                .map(chunk_sum)
                .collect::<Result<_>>()?
        }
        _ => indices.chunks(CHUNK).map(chunk_sum).collect::<Result<_>>()?,
    };
    Ok(partials.into_iter().fold(0.0, |a, b| a + b))
}

/// Maps `f` over `items`, on the rayon pool when `exec` is parallel.
/// Output order always follows input order.
pub fn ordered_map<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
