use std::path::PathBuf;

use super::loaders::{load_jester, load_movielens, RatingsOptions};
use super::output::write_metrics_file;
use super::synth::{gen_completion, gen_karcher, gen_pca, SyntheticCompletionSpec};
use crate::error::{Error, Result};
use crate::grassmann::{random_point, GeometryKind, Grassmann, GrassmannPoint};
use crate::optim::{self, Algorithm, Reference, RunOutcome, ScheduleSpec, SvrgConfig};
use crate::problems::{CompletionProblem, KarcherProblem, PcaProblem};
use crate::seeds::{rng_for, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Pca,
    Karcher,
    Completion,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(Self::Pca),
            "karcher" => Ok(Self::Karcher),
            "completion" => Ok(Self::Completion),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pca => "pca",
            Self::Karcher => "karcher",
            Self::Completion => "completion",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Synthetic,
    MovieLens(PathBuf),
    Jester(PathBuf),
}

impl DataSource {
    /// `synthetic`, or a path whose format is inferred from its extension
    /// (`.dat` → MovieLens, `.csv` → Jester) unless `format` names it.
    pub fn parse(spec: &str, format: Option<&str>) -> Result<Self> {
        if spec == "synthetic" {
            return Ok(Self::Synthetic);
        }
        let path = PathBuf::from(spec);
        let fmt = match format {
            Some(f) => f.to_string(),
            None => match path.extension().and_then(|e| e.to_str()) {
                Some("dat") => "movielens".into(),
                Some("csv") => "jester".into(),
                _ => {
                    return Err(Error::Config(format!(
                        "cannot infer the format of '{spec}'; pass --format movielens|jester"
                    )))
                }
            },
        };
        match fmt.as_str() {
            "movielens" => Ok(Self::MovieLens(path)),
            "jester" => Ok(Self::Jester(path)),
            other => Err(Error::Config(format!("unknown data format '{other}'"))),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub algo: Algorithm,
    pub geometry: GeometryKind,
    pub schedule: ScheduleSpec,
    pub svrg: SvrgConfig,
    pub data: DataSource,
    /// Synthetic sizes: samples N, ambient d, rank r (r also applies to loaded data).
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub os: f64,
    pub cn: f64,
    pub noise_std: f64,
    pub ratings: RatingsOptions,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `problem`, with the instance sizes used in the benchmarks.
    pub fn new(problem: ProblemKind) -> Self {
        let (n, d, r, alpha0) = match problem {
            ProblemKind::Pca => (10_000, 20, 5, 0.005),
            ProblemKind::Karcher => (1000, 300, 5, 0.5),
            ProblemKind::Completion => (5000, 500, 5, 0.005),
        };
        Self {
            problem,
            algo: Algorithm::Rsvrg,
            geometry: GeometryKind::Exact,
            schedule: ScheduleSpec::hybrid(alpha0, 1e-3, 5),
            svrg: SvrgConfig::default(),
            data: DataSource::Synthetic,
            n,
            d,
            r,
            os: 5.0,
            cn: 5.0,
            noise_std: 0.0,
            ratings: RatingsOptions::default(),
            seed: 0,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r > self.d {
            return Err(Error::Config(format!(
                "need 0 < r <= d, got r={}, d={}",
                self.r, self.d
            )));
        }
        match (&self.data, self.problem) {
            (DataSource::Synthetic, _) => {}
            (DataSource::MovieLens(p) | DataSource::Jester(p), ProblemKind::Completion) => {
                if !p.exists() {
                    return Err(Error::Config(format!("data file {} does not exist", p.display())));
                }
            }
            (_, other) => {
                return Err(Error::Config(format!(
                    "problem '{other}' only supports synthetic data"
                )))
            }
        }
        self.schedule.validate()
    }

    pub fn completion_spec(&self) -> SyntheticCompletionSpec {
        SyntheticCompletionSpec {
            n: self.n,
            d: self.d,
            r: self.r,
            os: self.os,
            cn: self.cn,
            noise_std: self.noise_std,
            reg: self.ratings.reg,
        }
    }
}

#[derive(Clone, Debug)]
pub enum BuiltProblem {
    Pca(PcaProblem),
    Karcher(KarcherProblem),
    Completion(CompletionProblem),
}

/// Data, reference metrics and initial point for one seed. Shared by every
/// run of a sweep at that seed.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub problem: BuiltProblem,
    pub reference: Reference,
    pub init: GrassmannPoint,
    pub d: usize,
    pub r: usize,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let mut data_rng = rng_for(config.seed, Stream::Data);
    let mut split_rng = rng_for(config.seed, Stream::Split);
    let ratings = RatingsOptions {
        rank: config.r,
        ..config.ratings.clone()
    };
    let (problem, reference, d) = match (&config.data, config.problem) {
        (DataSource::Synthetic, ProblemKind::Pca) => {
            let pca = gen_pca(config.n, config.d, config.r, &mut data_rng)?;
            let oracle = pca.oracle()?;
            let reference = Reference {
                optimum: Some(oracle.loss),
                point: Some(oracle.point),
            };
            (BuiltProblem::Pca(pca), reference, config.d)
        }
        (DataSource::Synthetic, ProblemKind::Karcher) => {
            let k = gen_karcher(config.n, config.d, config.r, &mut data_rng)?;
            (BuiltProblem::Karcher(k), Reference::default(), config.d)
        }
        (DataSource::Synthetic, ProblemKind::Completion) => {
            let inst = gen_completion(&config.completion_spec(), &mut data_rng)?;
            let reference = Reference {
                optimum: None,
                point: Some(inst.planted),
            };
            (BuiltProblem::Completion(inst.problem), reference, config.d)
        }
        (DataSource::MovieLens(path), ProblemKind::Completion) => {
            let rep = load_movielens(path, &ratings, &mut split_rng)?;
            let d = crate::problems::Objective::dims(&rep.problem).0;
            (BuiltProblem::Completion(rep.problem), Reference::default(), d)
        }
        (DataSource::Jester(path), ProblemKind::Completion) => {
            let rep = load_jester(path, &ratings, &mut split_rng)?;
            let d = crate::problems::Objective::dims(&rep.problem).0;
            (BuiltProblem::Completion(rep.problem), Reference::default(), d)
        }
        (_, other) => {
            return Err(Error::Config(format!(
                "problem '{other}' only supports synthetic data"
            )))
        }
    };
    let init = random_point(d, config.r, &mut rng_for(config.seed, Stream::Init))?;
    Ok(Prepared {
        problem,
        reference,
        init,
        d,
        r: config.r,
    })
}

impl Prepared {
    pub fn run(
        &self,
        algo: Algorithm,
        geometry: GeometryKind,
        schedule: &ScheduleSpec,
        cfg: &SvrgConfig,
    ) -> Result<RunOutcome> {
        let geom = Grassmann::new(self.d, self.r, geometry)?;
        match &self.problem {
            BuiltProblem::Pca(p) => optim::run(algo, &geom, p, &self.init, schedule, cfg, &self.reference),
            BuiltProblem::Karcher(p) => {
                optim::run(algo, &geom, p, &self.init, schedule, cfg, &self.reference)
            }
            BuiltProblem::Completion(p) => {
                optim::run(algo, &geom, p, &self.init, schedule, cfg, &self.reference)
            }
        }
    }

    pub fn n_samples(&self) -> usize {
        use crate::problems::Objective;
        match &self.problem {
            BuiltProblem::Pca(p) => p.n_samples(),
            BuiltProblem::Karcher(p) => p.n_samples(),
            BuiltProblem::Completion(p) => p.n_samples(),
        }
    }
}

/// Runs one configured experiment; writes the metrics CSV when an output
/// path is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    // fail on an unwritable destination before spending time on the run
    if let Some(path) = &config.output {
        std::fs::File::create(path)?;
    }
    let prepared = prepare(config)?;
    let cfg = SvrgConfig {
        seed: config.seed,
        ..config.svrg.clone()
    };
    let outcome = prepared.run(config.algo, config.geometry, &config.schedule, &cfg)?;
    if let Some(path) = &config.output {
        write_metrics_file(path, &outcome.records)?;
    }
    Ok(outcome)
}
