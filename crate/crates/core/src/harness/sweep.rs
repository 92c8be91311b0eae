//! Grid sweeps over step-size parameters and seeds, with best-tuned
//! selection by final training loss.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::experiment::{prepare, ExperimentConfig, Prepared};
use super::output::{csv_writer, fmt_float, fmt_opt, write_metrics_file};
use crate::error::Result;
use crate::optim::{Algorithm, RunOutcome, ScheduleKind, ScheduleSpec, SvrgConfig, Termination};
use crate::parallel::{ordered_map, Execution};

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub algos: Vec<Algorithm>,
    pub schedules: Vec<ScheduleKind>,
    pub alpha0s: Vec<f64>,
    /// Ignored by the fixed schedule.
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Per-run metrics CSVs are written here when set.
    pub out_dir: Option<PathBuf>,
    pub exec: Execution,
}

/// One finished run of a sweep.
#[derive(Clone, Debug)]
pub struct SweepRun {
    pub algo: Algorithm,
    /// `None` for R-SD, which has no step-size schedule.
    pub schedule: Option<ScheduleSpec>,
    pub seed: u64,
    pub outcome: std::result::Result<RunOutcome, String>,
    pub best_tuned: bool,
}

impl SweepRun {
    pub fn final_train_loss(&self) -> f64 {
        self.outcome
            .as_ref()
            .ok()
            .and_then(|o| o.records.last())
            .map(|r| r.train_loss)
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY)
    }

    pub fn schedule_label(&self) -> String {
        self.schedule
            .map(|s| s.kind.to_string())
            .unwrap_or_else(|| "armijo".into())
    }

    pub fn file_name(&self) -> String {
        match &self.schedule {
            Some(s) => format!(
                "{}_{}_a{}_l{}_s{}.csv",
                self.algo.name().replace('+', "plus"),
                s.kind,
                s.alpha0,
                s.lambda,
                self.seed
            ),
            None => format!("{}_s{}.csv", self.algo.name(), self.seed),
        }
    }
}

struct Job {
    algo: Algorithm,
    schedule: Option<ScheduleSpec>,
    seed_idx: usize,
}

fn expand(base: &ExperimentConfig, spec: &SweepSpec) -> Vec<Job> {
    let mut jobs = Vec::new();
    for seed_idx in 0..spec.seeds.len() {
        for &algo in &spec.algos {
            if algo == Algorithm::Rsd {
                jobs.push(Job {
                    algo,
                    schedule: None,
                    seed_idx,
                });
                continue;
            }
            for &kind in &spec.schedules {
                let lambdas: &[f64] = if kind == ScheduleKind::Fixed {
                    &[0.0]
                } else {
                    &spec.lambdas
                };
                for &alpha0 in &spec.alpha0s {
                    for &lambda in lambdas {
                        jobs.push(Job {
                            algo,
                            schedule: Some(ScheduleSpec {
                                kind,
                                alpha0,
                                lambda,
                                s_th: base.schedule.s_th,
                            }),
                            seed_idx,
                        });
                    }
                }
            }
        }
    }
    jobs
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::INFINITY
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Marks, per (algorithm, schedule kind), the (α₀, λ) with the lowest median
/// final training loss across seeds.
pub fn mark_best_tuned(runs: &mut [SweepRun]) {
    type Key = (Algorithm, String);
    let mut groups: BTreeMap<String, BTreeMap<(u64, u64), Vec<usize>>> = BTreeMap::new();
    let key = |r: &SweepRun| -> Key { (r.algo, r.schedule_label()) };
    for (i, r) in runs.iter().enumerate() {
        let (a, s) = key(r);
        let params = r
            .schedule
            .map(|s| (s.alpha0.to_bits(), s.lambda.to_bits()))
            .unwrap_or((0, 0));
        groups
            .entry(format!("{}/{}", a.name(), s))
            .or_default()
            .entry(params)
            .or_default()
            .push(i);
    }
    for combos in groups.values() {
        let best = combos
            .values()
            .map(|idx| (median(idx.iter().map(|&i| runs[i].final_train_loss()).collect()), idx))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, idx)) = best {
            for &i in idx {
                runs[i].best_tuned = true;
            }
        }
    }
}

/// Runs every (algorithm, schedule, α₀, λ, seed) combination of `spec` on
/// the problem described by `base`. Data and the initial point are built once
/// per seed and shared by all runs at that seed.
pub fn sweep(base: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRun>> {
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let prepared: Vec<Prepared> = spec
        .seeds
        .iter()
        .map(|&seed| {
            prepare(&ExperimentConfig {
                seed,
                ..base.clone()
            })
        })
        .collect::<Result<_>>()?;
    let jobs = expand(base, spec);
    let mut runs: Vec<SweepRun> = ordered_map(&jobs, spec.exec, |job| {
        let seed = spec.seeds[job.seed_idx];
        let cfg = SvrgConfig {
            seed,
            ..base.svrg.clone()
        };
        let schedule = job.schedule.unwrap_or(base.schedule);
        let outcome = prepared[job.seed_idx]
            .run(job.algo, base.geometry, &schedule, &cfg)
            .map_err(|e| e.to_string());
        SweepRun {
            algo: job.algo,
            schedule: job.schedule,
            seed,
            outcome,
            best_tuned: false,
        }
    });
    mark_best_tuned(&mut runs);
    if let Some(dir) = &spec.out_dir {
        for run in &runs {
            if let Ok(o) = &run.outcome {
                write_metrics_file(&dir.join(run.file_name()), &o.records)?;
            }
        }
    }
    Ok(runs)
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "algo",
    "schedule",
    "alpha0",
    "lambda",
    "seed",
    "epochs",
    "grad_evals_over_N",
    "final_train_loss",
    "final_test_loss",
    "final_grad_norm",
    "final_optimality_gap",
    "termination",
    "file",
    "best_tuned",
];

fn termination_label(t: &Termination) -> String {
    match t {
        Termination::GradientTolerance => "grad_tol".into(),
        Termination::MaxEpochs => "max_epochs".into(),
        Termination::Aborted(m) => format!("aborted: {m}"),
        Termination::LineSearchFailed(m) => format!("line_search: {m}"),
    }
}

pub fn write_summary(path: &Path, runs: &[SweepRun]) -> Result<()> {
    let mut out = csv_writer(std::io::BufWriter::new(std::fs::File::create(path)?));
    out.write_record(SUMMARY_HEADER)?;
    for run in runs {
        let (alpha0, lambda) = run
            .schedule
            .map(|s| (fmt_float(s.alpha0), fmt_float(s.lambda)))
            .unwrap_or_default();
        let (epochs, evals, train, test, grad, gap, term) = match &run.outcome {
            Ok(o) => {
                let last = o.records.last();
                (
                    o.records.len().to_string(),
                    fmt_opt(last.map(|r| r.grad_evals_over_n)),
                    fmt_opt(last.map(|r| r.train_loss)),
                    fmt_opt(last.and_then(|r| r.test_loss)),
                    fmt_opt(last.map(|r| r.grad_norm)),
                    fmt_opt(last.and_then(|r| r.optimality_gap)),
                    termination_label(&o.termination),
                )
            }
            Err(e) => (
                "0".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("error: {e}"),
            ),
        };
        out.write_record([
            run.algo.name().to_string(),
            run.schedule_label(),
            alpha0,
            lambda,
            run.seed.to_string(),
            epochs,
            evals,
            train,
            test,
            grad,
            gap,
            term,
            run.file_name(),
            u8::from(run.best_tuned).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
