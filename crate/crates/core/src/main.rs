use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riemann_svrg::harness::{self, DataSource, ExperimentConfig, ProblemKind, SweepSpec};
use riemann_svrg::optim::{Algorithm, ScheduleKind, ScheduleSpec, SnapshotOption, Termination};
use riemann_svrg::parallel::Execution;
use riemann_svrg::{Error, GeometryKind};

#[derive(Parser)]
#[command(name = "riemann-svrg", version, about = "Riemannian SVRG / SGD / SD benchmarks on the Grassmann manifold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write per-epoch metrics.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "rsvrg")]
        algo: Algorithm,
        #[arg(long, default_value = "hybrid")]
        schedule: ScheduleKind,
        #[arg(long)]
        alpha0: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Metrics CSV destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid over algorithms, schedules, α₀, λ and seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "rsgd,rsvrg,rsvrg+,rsd")]
        algo: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',', default_value = "fixed,decay,hybrid")]
        schedules: Vec<ScheduleKind>,
        #[arg(long, value_delimiter = ',', default_value = "1e-3,2e-3,3e-3,4e-3,5e-3,6e-3,7e-3,8e-3,9e-3,1e-2")]
        alpha0_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        lambda_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Directory for per-run metrics CSVs.
        #[arg(long)]
        out_dir: PathBuf,
        /// Summary CSV (defaults to OUT_DIR/summary.csv).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Run the grid on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "pca")]
    problem: ProblemKind,
    #[arg(long, default_value = "exact")]
    geometry: GeometryKind,
    #[arg(long, default_value_t = 5)]
    sth: usize,
    /// Maximum epochs (outer iterations; R-SD iterations).
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 10)]
    batch: usize,
    /// Inner iterations per epoch as a multiple of N.
    #[arg(long, default_value_t = 5)]
    inner_mult: usize,
    #[arg(long, default_value = "last")]
    snapshot: SnapshotOption,
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    /// Synthetic sample count N (problem default when omitted).
    #[arg(long)]
    n: Option<usize>,
    /// Synthetic ambient dimension d (problem default when omitted).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    os: f64,
    #[arg(long, default_value_t = 5.0)]
    cn: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Ridge term in the completion coefficient solve.
    #[arg(long, default_value_t = 0.0)]
    reg: f64,
    /// Subtract the mean training rating (loaded data).
    #[arg(long)]
    center: bool,
    /// MovieLens per-user held-out fraction.
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    /// `synthetic` or a ratings file.
    #[arg(long, default_value = "synthetic")]
    data: String,
    /// movielens | jester (inferred from the extension when omitted).
    #[arg(long)]
    format: Option<String>,
    /// Leave the wall_ms column empty so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::new(self.problem);
        cfg.geometry = self.geometry;
        cfg.schedule.s_th = self.sth;
        cfg.svrg.max_epochs = self.epochs;
        cfg.svrg.batch_size = self.batch;
        cfg.svrg.inner_mult = self.inner_mult;
        cfg.svrg.snapshot = self.snapshot;
        cfg.svrg.grad_tol = self.grad_tol;
        cfg.svrg.record_wall_clock = !self.no_timing;
        cfg.r = self.rank;
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        cfg.os = self.os;
        cfg.cn = self.cn;
        cfg.noise_std = self.noise;
        cfg.ratings.reg = self.reg;
        cfg.ratings.center = self.center;
        cfg.ratings.holdout = self.holdout;
        cfg.data = DataSource::parse(&self.data, self.format.as_deref())?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run {
            common,
            algo,
            schedule,
            alpha0,
            lambda,
            seed,
            out,
        } => {
            let mut cfg = common.config()?;
            cfg.algo = algo;
            cfg.schedule = ScheduleSpec {
                kind: schedule,
                alpha0: alpha0.unwrap_or(cfg.schedule.alpha0),
                lambda,
                s_th: common.sth,
            };
            cfg.seed = seed;
            cfg.output = Some(out.clone());
            let outcome = harness::run_experiment(&cfg)?;
            let last = outcome.records.last();
            log::info!(
                "{} epochs, evals/N {}, final loss {}, |grad| {}",
                outcome.records.len(),
                last.map(|r| r.grad_evals_over_n).unwrap_or(0.0),
                last.map(|r| r.train_loss).unwrap_or(f64::NAN),
                last.map(|r| r.grad_norm).unwrap_or(f64::NAN),
            );
            log::info!("metrics written to {}", out.display());
            match outcome.termination {
                Termination::Aborted(msg) => {
                    eprintln!("run aborted: {msg}");
                    Ok(ExitCode::from(2))
                }
                _ => Ok(ExitCode::SUCCESS),
            }
        }
        Command::Sweep {
            common,
            algo,
            schedules,
            alpha0_grid,
            lambda_grid,
            seeds,
            out_dir,
            summary,
            sequential,
        } => {
            let cfg = common.config()?;
            let spec = SweepSpec {
                algos: algo,
                schedules,
                alpha0s: alpha0_grid,
                lambdas: lambda_grid,
                seeds,
                out_dir: Some(out_dir.clone()),
                exec: if sequential {
                    Execution::Sequential
                } else {
                    Execution::default()
                },
            };
            let runs = harness::sweep(&cfg, &spec)?;
            let summary = summary.unwrap_or_else(|| out_dir.join("summary.csv"));
            harness::write_summary(&summary, &runs)?;
            for run in runs.iter().filter(|r| r.best_tuned) {
                log::info!(
                    "best {} {} alpha0={:?} lambda={:?} seed {}: final loss {}",
                    run.algo,
                    run.schedule_label(),
                    run.schedule.map(|s| s.alpha0),
                    run.schedule.map(|s| s.lambda),
                    run.seed,
                    run.final_train_loss()
                );
            }
            log::info!("summary written to {}", summary.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
