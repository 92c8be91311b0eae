use rand::Rng;

use crate::error::{Error, Result};
use crate::manifold::{karcher_mean, Manifold};

/// Karcher-mean solver settings used for epoch snapshots.
pub const KARCHER_TOL: f64 = 1e-10;
pub const KARCHER_MAX_ITER: usize = 100;

/// How the next epoch's anchor is chosen from the inner iterates `w_1..w_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SnapshotOption {
    /// Karcher mean of all inner iterates.
    KarcherMean,
    /// One inner iterate drawn uniformly.
    RandomIterate,
    /// The final inner iterate.
    LastIterate,
}

impl std::str::FromStr for SnapshotOption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "karcher" => Ok(Self::KarcherMean),
            "random" => Ok(Self::RandomIterate),
            "last" => Ok(Self::LastIterate),
            other => Err(Error::Config(format!("unknown snapshot option '{other}'"))),
        }
    }
}

pub fn snapshot<M: Manifold, R: Rng + ?Sized>(
    geom: &M,
    iterates: &[M::Point],
    option: SnapshotOption,
    rng: &mut R,
) -> Result<M::Point> {
    if iterates.is_empty() {
        return Err(Error::ContractViolation("snapshot of an empty epoch".into()));
    }
    match option {
        SnapshotOption::LastIterate => Ok(iterates[iterates.len() - 1].clone()),
        SnapshotOption::RandomIterate => Ok(iterates[rng.random_range(0..iterates.len())].clone()),
        SnapshotOption::KarcherMean => karcher_mean(geom, iterates, KARCHER_TOL, KARCHER_MAX_ITER),
    }
}

/// Streaming form of [`snapshot`] used inside the epoch loop, so that only
/// the Karcher option has to keep every iterate.
pub(crate) enum Collector<P> {
    All(Vec<P>),
    Pick { target: usize, seen: usize, chosen: Option<P> },
    Last(Option<P>),
}

impl<P: Clone> Collector<P> {
    pub(crate) fn new<R: Rng + ?Sized>(option: SnapshotOption, m: usize, rng: &mut R) -> Self {
        match option {
            SnapshotOption::KarcherMean => Collector::All(Vec::with_capacity(m)),
            SnapshotOption::RandomIterate => Collector::Pick {
                target: rng.random_range(0..m),
                seen: 0,
                chosen: None,
            },
            SnapshotOption::LastIterate => Collector::Last(None),
        }
    }

    pub(crate) fn push(&mut self, w: &P) {
        match self {
            Collector::All(v) => v.push(w.clone()),
            Collector::Pick {
                target,
                seen,
                chosen,
            } => {
                if *seen == *target {
                    *chosen = Some(w.clone());
                }
                *seen += 1;
            }
            Collector::Last(last) => *last = Some(w.clone()),
        }
    }

    pub(crate) fn finish<M: Manifold<Point = P>>(self, geom: &M) -> Result<P> {
        let missing = || Error::ContractViolation("snapshot of an empty epoch".into());
        match self {
            Collector::All(v) => {
                if v.is_empty() {
                    return Err(missing());
                }
                karcher_mean(geom, &v, KARCHER_TOL, KARCHER_MAX_ITER)
            }
            Collector::Pick { chosen, .. } => chosen.ok_or_else(missing),
            Collector::Last(last) => last.ok_or_else(missing),
        }
    }
}
