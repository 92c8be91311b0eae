use super::{Recorder, Reference, RunOutcome, Termination};
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::manifold::Manifold;
use crate::problems::Objective;

/// Steepest descent with Armijo backtracking.
#[derive(Clone, Debug)]
pub struct SdConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub alpha_init: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub max_halvings: usize,
    pub record_wall_clock: bool,
}

impl Default for SdConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            grad_tol: 1e-8,
            alpha_init: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_halvings: 50,
            record_wall_clock: true,
        }
    }
}

/// `w ← R_w(−α grad f(w))`, `α` backtracked from `alpha_init` until
/// `f(w_new) ≤ f(w) − c α ‖grad f(w)‖²`. One record per iteration, each
/// iteration costing N gradient evaluations.
pub fn run_rsd<M, O>(
    geom: &M,
    obj: &O,
    init: &GrassmannPoint,
    cfg: &SdConfig,
    reference: &Reference,
) -> Result<RunOutcome>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective,
{
    if !(cfg.alpha_init > 0.0 && cfg.shrink > 0.0 && cfg.shrink < 1.0) {
        return Err(Error::Config("invalid line-search parameters".into()));
    }
    obj.check_point(init)?;
    let n = obj.n_samples() as u64;
    let recorder = Recorder::new(obj, reference, cfg.record_wall_clock);
    let mut records = Vec::new();
    let mut w = init.clone();
    let mut evals = 0u64;

    let result = (|| -> Result<Termination> {
        let mut grad = obj.grad(&w)?;
        let mut grad_norm = geom.norm(&w, &grad)?;
        let mut cost = obj.cost(&w)?;
        for iter in 1..=cfg.max_iters {
            if grad_norm < cfg.grad_tol {
                return Ok(Termination::GradientTolerance);
            }
            evals += n;
            let slope = grad_norm * grad_norm;
            let mut alpha = cfg.alpha_init;
            let mut accepted = None;
            for _ in 0..=cfg.max_halvings {
                let cand = geom.retract(&w, &grad.scale(-alpha))?;
                let c = obj.cost(&cand)?;
                if c <= cost - cfg.sufficient_decrease * alpha * slope {
                    accepted = Some((cand, c));
                    break;
                }
                alpha *= cfg.shrink;
            }
            let Some((next, c)) = accepted else {
                return Ok(Termination::LineSearchFailed(format!(
                    "no sufficient decrease after {} halvings at iteration {iter}",
                    cfg.max_halvings
                )));
            };
            w = next;
            cost = c;
            grad = obj.grad(&w)?;
            grad_norm = geom.norm(&w, &grad)?;
            records.push(recorder.record(iter, evals, &w, grad_norm)?);
        }
        if grad_norm < cfg.grad_tol {
            Ok(Termination::GradientTolerance)
        } else {
            Ok(Termination::MaxEpochs)
        }
    })();

    let termination = match result {
        Ok(t) => t,
        Err(e @ Error::Config(_)) => return Err(e),
        Err(e) => Termination::Aborted(e.to_string()),
    };
    if let Termination::LineSearchFailed(msg) = &termination {
        log::warn!("steepest descent stopped: {msg}");
    }
    Ok(RunOutcome {
        point: w,
        records,
        termination,
    })
}
