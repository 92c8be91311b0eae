//! Rating-file ingestion for MovieLens-1M and Jester-1.
//!
//! Both loaders produce a [`CompletionProblem`] with items as rows and users
//! as columns, together with a short report of what was read.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::{CompletionProblem, SparseColumn};

/// Jester's marker for an unrated joke.
pub const JESTER_MISSING: f64 = 99.0;

#[derive(Clone, Debug)]
pub struct RatingsOptions {
    pub rank: usize,
    pub reg: f64,
    /// Subtract the mean training rating from every entry.
    pub center: bool,
    /// MovieLens per-user held-out fraction.
    pub holdout: f64,
    /// Jester ratings per user moved to the test set.
    pub jester_test_per_user: usize,
}

impl Default for RatingsOptions {
    fn default() -> Self {
        Self {
            rank: 5,
            reg: 0.0,
            center: false,
            holdout: 0.2,
            jester_test_per_user: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadReport {
    pub problem: CompletionProblem,
    /// Distinct (user, item) ratings retained.
    pub entries: usize,
    /// Lines overwritten by a later rating of the same pair.
    pub duplicates: usize,
    pub train_entries: usize,
    pub test_entries: usize,
    /// Mean subtracted when centering was requested.
    pub offset: f64,
}

fn build(
    d: usize,
    mut per_user: Vec<Vec<(usize, f64)>>,
    opts: &RatingsOptions,
    mut split: impl FnMut(&mut Vec<(usize, f64)>) -> usize,
    duplicates: usize,
) -> Result<LoadReport> {
    let entries = per_user.iter().map(Vec::len).sum();
    let mut train = Vec::with_capacity(per_user.len());
    let mut test = Vec::with_capacity(per_user.len());
    for ratings in per_user.iter_mut() {
        let n_test = split(ratings);
        let tail = ratings.split_off(n_test);
        test.push(std::mem::take(ratings));
        train.push(tail);
    }
    let train_entries: usize = train.iter().map(Vec::len).sum();
    let test_entries: usize = test.iter().map(Vec::len).sum();
    let offset = if opts.center && train_entries > 0 {
        train.iter().flatten().map(|&(_, v)| v).sum::<f64>() / train_entries as f64
    } else {
        0.0
    };
    let shift = |col: Vec<(usize, f64)>| {
        SparseColumn::from_pairs(col.into_iter().map(|(i, v)| (i, v - offset)).collect())
    };
    let problem = CompletionProblem::new(
        d,
        opts.rank,
        train.into_iter().map(shift).collect(),
        Some(test.into_iter().map(shift).collect()),
        opts.reg,
    )?;
    Ok(LoadReport {
        problem,
        entries,
        duplicates,
        train_entries,
        test_entries,
        offset,
    })
}

/// Parses `UserID::MovieID::Rating::Timestamp` lines. Movies become rows
/// (`MovieID − 1`), users become columns (`UserID − 1`); users without
/// ratings are kept as empty columns. A seeded `holdout` fraction of each
/// user's ratings (rounded) goes to the test set.
pub fn load_movielens<R: Rng + ?Sized>(
    path: &Path,
    opts: &RatingsOptions,
    rng: &mut R,
) -> Result<LoadReport> {
    let file = std::fs::File::open(path)?;
    parse_movielens(std::io::BufReader::new(file), opts, rng)
}

pub fn parse_movielens<B: BufRead, R: Rng + ?Sized>(
    reader: B,
    opts: &RatingsOptions,
    rng: &mut R,
) -> Result<LoadReport> {
    if !(0.0..=1.0).contains(&opts.holdout) {
        return Err(Error::Config(format!("holdout must be in [0, 1], got {}", opts.holdout)));
    }
    let mut ratings: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut duplicates = 0;
    let (mut max_user, mut max_movie) = (0usize, 0usize);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 '::'-separated fields, got {}", fields.len())));
        }
        let id = |s: &str, what: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(bad(format!("invalid {what} id '{s}'"))),
            }
        };
        let user = id(fields[0], "user")?;
        let movie = id(fields[1], "movie")?;
        let value: f64 = fields[2]
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| bad(format!("invalid rating '{}'", fields[2])))?;
        max_user = max_user.max(user);
        max_movie = max_movie.max(movie);
        if ratings.insert((user - 1, movie - 1), value).is_some() {
            duplicates += 1;
            log::warn!("line {}: duplicate rating for user {user}, movie {movie}; keeping the last", lineno + 1);
        }
    }
    if ratings.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no ratings found".into(),
        });
    }
    let mut per_user = vec![Vec::new(); max_user];
    for ((u, m), v) in ratings {
        per_user[u].push((m, v));
    }
    let holdout = opts.holdout;
    build(
        max_movie,
        per_user,
        opts,
        |col| {
            col.shuffle(rng);
            (holdout * col.len() as f64).round() as usize
        },
        duplicates,
    )
}

/// Parses Jester-1 rows: a rated-joke count followed by one field per joke,
/// `99` marking a missing rating. Jokes become rows, users columns. Per user,
/// `jester_test_per_user` observed ratings (seeded) go to the test set and
/// the rest to training.
pub fn load_jester<R: Rng + ?Sized>(path: &Path, opts: &RatingsOptions, rng: &mut R) -> Result<LoadReport> {
    let file = std::fs::File::open(path)?;
    parse_jester(file, opts, rng)
}

pub fn parse_jester<Rd: std::io::Read, R: Rng + ?Sized>(
    reader: Rd,
    opts: &RatingsOptions,
    rng: &mut R,
) -> Result<LoadReport> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut per_user = Vec::new();
    let mut d = None;
    for (lineno, rec) in csv.records().enumerate() {
        let rec = rec?;
        let line = lineno + 1;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let jokes = rec.len().saturating_sub(1);
        match d {
            None => d = Some(jokes),
            Some(expected) if expected != jokes => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {expected} rating fields, got {jokes}"),
                })
            }
            _ => {}
        }
        let mut col = Vec::new();
        for (j, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid rating '{field}'"),
            })?;
            if v == JESTER_MISSING {
                continue;
            }
            if !(-10.0..=10.0).contains(&v) {
                return Err(Error::Parse {
                    line,
                    message: format!("rating {v} outside [-10, 10]"),
                });
            }
            col.push((j, v));
        }
        per_user.push(col);
    }
    let d = d.filter(|&d| d > 0).ok_or_else(|| Error::Parse {
        line: 0,
        message: "no rating rows found".into(),
    })?;
    let k = opts.jester_test_per_user;
    build(
        d,
        per_user,
        opts,
        |col| {
            col.shuffle(rng);
            k.min(col.len())
        },
        0,
    )
}
