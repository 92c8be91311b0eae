use rand::Rng;

use super::snapshot::Collector;
use super::{Recorder, Reference, RunOutcome, RunRecord, ScheduleSpec, SvrgConfig, Termination};
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannPoint, GrassmannTangent};
use crate::manifold::Manifold;
use crate::problems::Objective;
use crate::seeds::{rng_for, Stream};

/// Variance-reduced direction at `w` given the anchor `w_tilde` and its full
/// gradient:
///
/// `ξ = g_B(w) − T_{w̃→w}(g_B(w̃) − grad f(w̃))`
///
/// where `g_B` is the batch-mean gradient. The correction is transported once
/// (transport is linear, so this equals transporting each member).
pub fn svrg_direction<M, O>(
    geom: &M,
    obj: &O,
    w: &GrassmannPoint,
    w_tilde: &GrassmannPoint,
    full_at_tilde: &GrassmannTangent,
    batch: &[usize],
) -> Result<GrassmannTangent>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective + ?Sized,
{
    let at_w = obj.batch_grad(w, batch)?;
    let at_tilde = obj.batch_grad(w_tilde, batch)?;
    let correction = at_tilde.sub(full_at_tilde)?;
    let moved = geom.transport_to(w_tilde, w, &correction)?;
    at_w.sub(&moved)
}

/// [`svrg_direction`] computing the anchor's full gradient itself.
pub fn svrg_modified_grad<M, O>(
    geom: &M,
    obj: &O,
    w: &GrassmannPoint,
    w_tilde: &GrassmannPoint,
    batch: &[usize],
) -> Result<GrassmannTangent>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective + ?Sized,
{
    let full = obj.grad(w_tilde)?;
    svrg_direction(geom, obj, w, w_tilde, &full, batch)
}

/// Fills `buf` with `size` indices drawn uniformly with replacement from `0..n`.
pub fn draw_batch<R: Rng + ?Sized>(rng: &mut R, n: usize, buf: &mut Vec<usize>, size: usize) {
    buf.clear();
    buf.extend((0..size).map(|_| rng.random_range(0..n)));
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Sgd,
    Svrg,
}

/// Stochastic variance-reduced gradient.
///
/// Epoch `s`: take the full gradient at `w̃^{s−1}` (N evaluations), run `m_s`
/// steps `w ← R_w(−α ξ)` from `w̃^{s−1}` (2B evaluations each), then pick
/// `w̃^s` by the snapshot option. Stops when `‖grad f(w̃^s)‖ < grad_tol` or
/// after `max_epochs`.
pub fn run_rsvrg<M, O>(
    geom: &M,
    obj: &O,
    init: &GrassmannPoint,
    schedule: &ScheduleSpec,
    cfg: &SvrgConfig,
    reference: &Reference,
) -> Result<RunOutcome>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective,
{
    run_stochastic(Mode::Svrg, geom, obj, init, schedule, cfg, reference)
}

/// Plain Riemannian SGD with R-SVRG's epoch bookkeeping (B evaluations per
/// inner step, one metrics row per `m_s` steps).
pub fn run_rsgd<M, O>(
    geom: &M,
    obj: &O,
    init: &GrassmannPoint,
    schedule: &ScheduleSpec,
    cfg: &SvrgConfig,
    reference: &Reference,
) -> Result<RunOutcome>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective,
{
    run_stochastic(Mode::Sgd, geom, obj, init, schedule, cfg, reference)
}

fn run_stochastic<M, O>(
    mode: Mode,
    geom: &M,
    obj: &O,
    init: &GrassmannPoint,
    schedule: &ScheduleSpec,
    cfg: &SvrgConfig,
    reference: &Reference,
) -> Result<RunOutcome>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective,
{
    let n = obj.n_samples();
    schedule.validate()?;
    cfg.validate(n)?;
    obj.check_point(init)?;
    let mut rng = rng_for(cfg.seed, Stream::Sampling);
    let recorder = Recorder::new(obj, reference, cfg.record_wall_clock);

    let mut records = Vec::new();
    let mut state = State {
        anchor: init.clone(),
        current: init.clone(),
    };
    let result = epochs(
        mode, geom, obj, schedule, cfg, &recorder, &mut rng, &mut records, &mut state,
    );
    let (point, termination) = match result {
        Ok(t) => (state.anchor, t),
        Err(e @ Error::Config(_)) => return Err(e),
        Err(e) => {
            log::warn!("run aborted: {e}");
            (state.current, Termination::Aborted(e.to_string()))
        }
    };
    Ok(RunOutcome {
        point,
        records,
        termination,
    })
}

struct State {
    anchor: GrassmannPoint,
    current: GrassmannPoint,
}

#[allow(clippy::too_many_arguments)]
fn epochs<M, O, R>(
    mode: Mode,
    geom: &M,
    obj: &O,
    schedule: &ScheduleSpec,
    cfg: &SvrgConfig,
    recorder: &Recorder<'_, O>,
    rng: &mut R,
    records: &mut Vec<RunRecord>,
    state: &mut State,
) -> Result<Termination>
where
    M: Manifold<Point = GrassmannPoint>,
    O: Objective,
    R: Rng,
{
    let n = obj.n_samples();
    let m_s = cfg.inner_iterations(n);
    let b = cfg.batch_size;
    let mut full = obj.grad(&state.anchor)?;
    if geom.norm(&state.anchor, &full)? < cfg.grad_tol {
        return Ok(Termination::GradientTolerance);
    }
    let mut evals: u64 = 0;
    let mut k: u64 = 0;
    let mut batch = Vec::with_capacity(b);

    for epoch in 1..=cfg.max_epochs {
        let plain = mode == Mode::Sgd || (cfg.plus_variant && epoch == 1);
        if !plain {
            evals += n as u64;
        }
        let mut collector = Collector::new(cfg.snapshot, m_s, rng);
        let mut w = state.anchor.clone();
        for _ in 0..m_s {
            draw_batch(rng, n, &mut batch, b);
            let alpha = schedule.step_size(k, m_s);
            if !alpha.is_finite() {
                return Err(Error::Config(format!("step size became {alpha} at iteration {k}")));
            }
            k += 1;
            let xi = if plain {
                evals += b as u64;
                obj.batch_grad(&w, &batch)?
            } else {
                evals += 2 * b as u64;
                svrg_direction(geom, obj, &w, &state.anchor, &full, &batch)?
            };
            w = geom.retract(&w, &xi.scale(-alpha))?;
            state.current = w.clone();
            collector.push(&w);
        }
        state.anchor = collector.finish(geom)?;
        full = obj.grad(&state.anchor)?;
        let grad_norm = geom.norm(&state.anchor, &full)?;
        records.push(recorder.record(epoch, evals, &state.anchor, grad_norm)?);
        if grad_norm < cfg.grad_tol {
            return Ok(Termination::GradientTolerance);
        }
    }
    Ok(Termination::MaxEpochs)
}
