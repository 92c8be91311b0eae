//! Riemannian optimizers over finite-sum objectives.
//!
//! * [`run_rsvrg`]: stochastic variance-reduced gradient. Each epoch
//!   anchors at a snapshot `w̃` with its full gradient and takes `m_s`
//!   corrected stochastic steps; with `plus_variant` the first epoch is
//!   plain stochastic gradient (no anchor).
//! * [`run_rsgd`]: plain stochastic gradient with the same epoch layout.
//! * [`run_rsd`]: full-gradient steepest descent with Armijo backtracking.
//!
//! All runs are deterministic functions of their inputs and seed.

mod probe;
mod schedule;
mod sd;
mod snapshot;
mod stochastic;

pub use probe::{variance_probe, VarianceProbe};
pub use schedule::{ScheduleKind, ScheduleSpec};
pub use sd::{run_rsd, SdConfig};
pub use snapshot::{snapshot, SnapshotOption};
pub use stochastic::{draw_batch, run_rsgd, run_rsvrg, svrg_direction, svrg_modified_grad};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};
use crate::manifold::Manifold;
use crate::problems::Objective;

/// Inner-loop and stopping configuration shared by R-SGD and R-SVRG.
#[derive(Clone, Debug)]
pub struct SvrgConfig {
    /// `m_s = inner_mult · N` unless `inner_iters` is set.
    pub inner_mult: usize,
    pub inner_iters: Option<usize>,
    pub batch_size: usize,
    pub snapshot: SnapshotOption,
    /// R-SVRG+: plain stochastic updates in the first epoch.
    pub plus_variant: bool,
    pub max_epochs: usize,
    /// Stop once the full gradient norm at a snapshot falls below this.
    pub grad_tol: f64,
    pub seed: u64,
    pub record_wall_clock: bool,
}

impl Default for SvrgConfig {
    fn default() -> Self {
        Self {
            inner_mult: 5,
            inner_iters: None,
            batch_size: 10,
            snapshot: SnapshotOption::LastIterate,
            plus_variant: false,
            max_epochs: 100,
            grad_tol: 1e-8,
            seed: 0,
            record_wall_clock: true,
        }
    }
}

impl SvrgConfig {
    pub fn inner_iterations(&self, n: usize) -> usize {
        self.inner_iters.unwrap_or(self.inner_mult * n)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.inner_iterations(n) == 0 {
            return Err(Error::Config("inner iterations m_s must be >= 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > n {
            return Err(Error::Config(format!(
                "batch size must be in [1, N = {n}], got {}",
                self.batch_size
            )));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::Config("grad_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Known optimum and/or reference subspace used for gap and distance columns.
#[derive(Clone, Debug, Default)]
pub struct Reference {
    pub optimum: Option<f64>,
    pub point: Option<GrassmannPoint>,
}

/// One row of per-epoch metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub epoch: usize,
    /// Cumulative gradient evaluations (sample gradients).
    pub grad_evals: u64,
    pub grad_evals_over_n: f64,
    pub wall_ms: Option<f64>,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    pub grad_norm: f64,
    pub optimality_gap: Option<f64>,
    pub dist_ref: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    GradientTolerance,
    MaxEpochs,
    /// A geometric or numeric failure stopped the run; records are partial.
    Aborted(String),
    LineSearchFailed(String),
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub point: GrassmannPoint,
    pub records: Vec<RunRecord>,
    pub termination: Termination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Rsgd,
    Rsvrg,
    RsvrgPlus,
    Rsd,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rsgd => "rsgd",
            Self::Rsvrg => "rsvrg",
            Self::RsvrgPlus => "rsvrg+",
            Self::Rsd => "rsd",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsgd" => Ok(Self::Rsgd),
            "rsvrg" => Ok(Self::Rsvrg),
            "rsvrg+" | "rsvrg_plus" => Ok(Self::RsvrgPlus),
            "rsd" => Ok(Self::Rsd),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Dispatches to the optimizer for `algo`. `schedule` is ignored by R-SD,
/// which reads `max_epochs` and `grad_tol` from `cfg`.
pub fn run<M, O>(
    algo: Algorithm,
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
    match algo {
        Algorithm::Rsgd => run_rsgd(geom, obj, init, schedule, cfg, reference),
        Algorithm::Rsvrg => run_rsvrg(geom, obj, init, schedule, cfg, reference),
        Algorithm::RsvrgPlus => {
            let cfg = SvrgConfig {
                plus_variant: true,
                ..cfg.clone()
            };
            run_rsvrg(geom, obj, init, schedule, &cfg, reference)
        }
        Algorithm::Rsd => {
            let sd = SdConfig {
                max_iters: cfg.max_epochs,
                grad_tol: cfg.grad_tol,
                record_wall_clock: cfg.record_wall_clock,
                ..SdConfig::default()
            };
            run_rsd(geom, obj, init, &sd, reference)
        }
    }
}

/// Evaluates the per-epoch metrics at `w` given its gradient norm.
pub(crate) struct Recorder<'a, O: ?Sized> {
    obj: &'a O,
    reference: &'a Reference,
    start: Instant,
    wall_clock: bool,
    n: u64,
}

impl<'a, O: Objective + ?Sized> Recorder<'a, O> {
    pub(crate) fn new(obj: &'a O, reference: &'a Reference, wall_clock: bool) -> Self {
        Self {
            obj,
            reference,
            start: Instant::now(),
            wall_clock,
            n: obj.n_samples() as u64,
        }
    }

    pub(crate) fn record(
        &self,
        epoch: usize,
        grad_evals: u64,
        w: &GrassmannPoint,
        grad_norm: f64,
    ) -> Result<RunRecord> {
        let train_loss = self.obj.cost(w)?;
        let test_loss = self.obj.test_loss(w).transpose()?;
        let rec = RunRecord {
            epoch,
            grad_evals,
            grad_evals_over_n: grad_evals as f64 / self.n as f64,
            wall_ms: self
                .wall_clock
                .then(|| self.start.elapsed().as_secs_f64() * 1e3),
            train_loss,
            test_loss,
            grad_norm,
            optimality_gap: self.reference.optimum.map(|f| train_loss - f),
            dist_ref: self
                .reference
                .point
                .as_ref()
                .and_then(|q| grassmann::dist(w, q).ok()),
        };
        log::debug!(
            "epoch {epoch}: evals/N {:.1} loss {:.6e} |grad| {:.3e}",
            rec.grad_evals_over_n,
            rec.train_loss,
            rec.grad_norm
        );
        Ok(rec)
    }
}
