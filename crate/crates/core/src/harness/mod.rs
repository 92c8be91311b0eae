//! Experiment harness: data generation and loading, single runs, sweeps and
//! CSV output. The `riemann-svrg` binary is a thin layer over this module.

pub mod experiment;
pub mod loaders;
pub mod output;
pub mod sweep;
pub mod synth;

pub use experiment::{prepare, run_experiment, BuiltProblem, DataSource, ExperimentConfig, Prepared, ProblemKind};
pub use loaders::{load_jester, load_movielens, LoadReport, RatingsOptions};
pub use output::{metrics_to_string, write_metrics, write_metrics_file, METRICS_HEADER};
pub use sweep::{mark_best_tuned, sweep, write_summary, SweepRun, SweepSpec};
pub use synth::{gen_completion, gen_karcher, gen_pca, SyntheticCompletion, SyntheticCompletionSpec};
