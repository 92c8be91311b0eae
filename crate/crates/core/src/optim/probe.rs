use rand::Rng;

use super::svrg_direction;
use crate::error::Result;
use crate::grassmann::GrassmannPoint;
use crate::manifold::Manifold;
use crate::problems::Objective;

/// Above this many samples the probe switches from enumeration to sampling.
pub const EXHAUSTIVE_LIMIT: usize = 200;

/// Second moments of singleton-batch search directions at `(w, w̃)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceProbe {
    /// `E ‖ξ_i‖²` for the variance-reduced direction.
    pub svrg_second_moment: f64,
    /// `E ‖grad f_i(w)‖²` for the plain stochastic direction.
    pub sgd_second_moment: f64,
    pub samples: usize,
    pub exhaustive: bool,
}

/// Exhaustive over all `i` when `N ≤ EXHAUSTIVE_LIMIT`, otherwise `trials`
/// uniform draws.
pub fn variance_probe<M, O, R>(
    geom: &M,
    obj: &O,
    w: &GrassmannPoint,
    w_tilde: &GrassmannPoint,
    trials: usize,
    rng: &mut R,
) -> Result<VarianceProbe>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let n = obj.n_samples();
    let full = obj.grad(w_tilde)?;
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    let indices: Vec<usize> = if exhaustive {
        (0..n).collect()
    } else {
        (0..trials.max(1)).map(|_| rng.random_range(0..n)).collect()
    };
    let (mut svrg, mut sgd) = (0.0, 0.0);
    for &i in &indices {
        let xi = svrg_direction(geom, obj, w, w_tilde, &full, &[i])?;
        let g = obj.sample_grad(w, i)?;
        svrg += geom.inner(w, &xi, &xi)?;
        sgd += geom.inner(w, &g, &g)?;
    }
    let m = indices.len() as f64;
    Ok(VarianceProbe {
        svrg_second_moment: svrg / m,
        sgd_second_moment: sgd / m,
        samples: indices.len(),
        exhaustive,
    })
}
