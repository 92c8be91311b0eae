//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 1 3 10`.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use riemann_svrg::grassmann::{
    dist, exp, karcher_mean, log, parallel_translate, random_point,
    random_tangent,
};
use riemann_svrg::harness::{gen_completion, gen_pca, metrics_to_string, prepare};
use riemann_svrg::harness::{ExperimentConfig, Prepared, ProblemKind, SyntheticCompletionSpec};
use riemann_svrg::optim::{
    svrg_direction, SdConfig, variance_probe, Algorithm, RunOutcome, RunRecord, ScheduleSpec, SvrgConfig,
};
use riemann_svrg::parallel::{ordered_map, Execution};
use riemann_svrg::problems::{Objective, PcaProblem};
use riemann_svrg::{GeometryKind, Grassmann, GrassmannPoint, Manifold, MatrixPoint};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// A metrics CSV produced during the run, with what is needed to recompute
/// its accounting column.
struct Emitted {
    label: String,
    algo: Algorithm,
    n: usize,
    batch: usize,
    inner: usize,
    csv: String,
}

#[derive(Default)]
struct Shared {
    emitted: Vec<Emitted>,
    /// A criterion-6 run to repeat for the determinism check.
    repeat: Option<(Algorithm, ScheduleSpec, SvrgConfig, String)>,
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

// ---------------------------------------------------------------- geometry

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = rng(101);
    let (d, r) = (20, 5);
    let qr = Grassmann::new(d, r, GeometryKind::QrProjection).unwrap();
    let (mut exp0, mut log0, mut round, mut oracle, mut iso) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut slope_lo, mut slope_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let ts = [1e-2, 1e-3, 1e-4];
    for _ in 0..1000 {
        let p = random_point(d, r, &mut rng).unwrap();
        let zero = random_tangent(&p, &mut rng).scale(0.0);
        exp0 = exp0.max(projector_gap(&exp(&p, &zero).unwrap(), &p));
        log0 = log0.max(log(&p, &p).unwrap().carrier().norm());

        let radius = rng.random::<f64>() * FRAC_PI_4 * 0.999;
        let q = point_at(&p, radius, &mut rng);
        let l = log(&p, &q).unwrap();
        round = round.max(projector_gap(&exp(&p, &l).unwrap(), &q));
        let angles = principal_angle_oracle(&p, &q);
        let expected = angles.iter().map(|t| t * t).sum::<f64>().sqrt();
        oracle = oracle.max((l.carrier().norm() - expected).abs());

        let xi = random_tangent(&p, &mut rng);
        let zeta = random_tangent(&p, &mut rng).scale(log_uniform(&mut rng, 0.1, 10.0));
        let moved = parallel_translate(&p, &xi, &zeta).unwrap();
        iso = iso.max((moved.carrier().norm() - zeta.carrier().norm()).abs());

        // projector expansion: π(R(tξ)) = UUᵀ + t(ξUᵀ + Uξᵀ) + O(t²), and the
        // t² term cannot vanish for ξ ≠ 0
        let unit = xi.scale(1.0 / xi.carrier().norm());
        let proj = p.matrix() * p.matrix().transpose();
        let dproj = unit.carrier() * p.matrix().transpose() + p.matrix() * unit.carrier().transpose();
        let errs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let moved = qr.retract(&p, &unit.scale(t)).unwrap();
                (moved.matrix() * moved.matrix().transpose() - &proj - t * &dproj).norm()
            })
            .collect();
        let slope = loglog_slope(&ts, &errs);
        slope_lo = slope_lo.min(slope);
        slope_hi = slope_hi.max(slope);
    }
    let elapsed = start.elapsed();
    let pass = exp0 <= 1e-12
        && log0 <= 1e-12
        && round <= 1e-8
        && oracle <= 1e-8
        && iso <= 1e-10
        && slope_lo >= 1.8
        && slope_hi <= 2.2
        && within(elapsed, 10.0);
    verdict(
        pass,
        format!(
            "1000 cases: exp(p,0) {exp0:.1e}, log(p,p) {log0:.1e}, exp∘log {round:.1e}, \
             |log| vs angles {oracle:.1e}, translation isometry {iso:.1e}, \
             QR slope range [{slope_lo:.3}, {slope_hi:.3}], {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- gradients

fn worst_fd<O: Objective>(obj: &O, points: &[GrassmannPoint], seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for p in points {
        let g = obj.grad(p).unwrap();
        for _ in 0..3 {
            let xi = random_tangent(p, &mut rng);
            worst = worst.max(fd_relative_error(p, &g, &xi, |q| obj.cost(q).unwrap()));
        }
    }
    worst
}

/// Top-`r` eigenvectors of the sample covariance, independent of the
/// library's own oracle.
fn pca_eigen_optimum(pca: &PcaProblem, r: usize) -> GrassmannPoint {
    let x = pca.data();
    let cov = x * x.transpose();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let cols: Vec<DVector<f64>> = order[..r].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    GrassmannPoint::new(DMatrix::from_columns(&cols)).unwrap()
}

/// Least squares through Householder QR of the restricted basis.
fn dense_lstsq(u: &DMatrix<f64>, rows: &[usize], values: &[f64]) -> DVector<f64> {
    let a = DMatrix::from_fn(rows.len(), u.ncols(), |i, j| u[(rows[i], j)]);
    let b = DVector::from_column_slice(values);
    let qr = a.qr();
    let rhs = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&rhs).unwrap()
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut rng = rng(201);
    let pca = gen_pca(500, 20, 5, &mut rng).unwrap();
    let karcher = {
        let c = random_point(20, 5, &mut rng).unwrap();
        riemann_svrg::problems::KarcherProblem::new((0..50).map(|_| point_at(&c, 0.5, &mut rng)).collect()).unwrap()
    };
    let spec = SyntheticCompletionSpec {
        n: 200,
        d: 100,
        r: 5,
        ..SyntheticCompletionSpec::default()
    };
    let completion = gen_completion(&spec, &mut rng).unwrap().problem;
    let pts = |d: usize, r: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<GrassmannPoint> {
        (0..4).map(|_| random_point(d, r, rng).unwrap()).collect()
    };
    let fd_pca = worst_fd(&pca, &pts(20, 5, &mut rng), 202);
    let centre = karcher.points()[0].clone();
    let near: Vec<GrassmannPoint> = (0..4).map(|_| point_at(&centre, 0.3, &mut rng)).collect();
    let fd_karcher = worst_fd(&karcher, &near, 203);
    let fd_completion = worst_fd(&completion, &pts(100, 5, &mut rng), 204);

    let opt = pca_eigen_optimum(&pca, 5);
    let grad_at_opt = pca.grad(&opt).unwrap().carrier().norm();

    let mut coef_err = 0.0f64;
    let p = random_point(100, 5, &mut rng).unwrap();
    for (n, col) in completion.train().iter().enumerate() {
        if col.len() < 5 {
            continue;
        }
        let got = completion.solve_coefficients(&p, n).unwrap();
        let want = dense_lstsq(p.matrix(), &col.rows, &col.values);
        coef_err = coef_err.max((got - &want).norm() / want.norm().max(1.0));
    }
    let elapsed = start.elapsed();
    let pass = fd_pca <= 1e-4
        && fd_karcher <= 1e-4
        && fd_completion <= 1e-4
        && grad_at_opt <= 1e-8
        && coef_err <= 1e-10
        && within(elapsed, 30.0);
    verdict(
        pass,
        format!(
            "FD rel. error pca {fd_pca:.1e}, karcher {fd_karcher:.1e}, completion {fd_completion:.1e}; \
             |grad| at eigen optimum {grad_at_opt:.1e}; a_n vs QR least squares {coef_err:.1e}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- SVRG directions

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = rng(301);
    let pca = gen_pca(50, 8, 2, &mut rng).unwrap();
    let g = Grassmann::new(8, 2, GeometryKind::Exact).unwrap();
    let (mut svrg_err, mut sgd_err) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let w_tilde = random_point(8, 2, &mut rng).unwrap();
        let w = point_at(&w_tilde, rng.random_range(0.05..1.0), &mut rng);
        let full_tilde = pca.grad(&w_tilde).unwrap();
        let target = pca.grad(&w).unwrap();
        let (mut svrg, mut sgd) = (DMatrix::zeros(8, 2), DMatrix::zeros(8, 2));
        for i in 0..50 {
            svrg += svrg_direction(&g, &pca, &w, &w_tilde, &full_tilde, &[i]).unwrap().carrier();
            sgd += pca.sample_grad(&w, i).unwrap().carrier();
        }
        svrg_err = svrg_err.max((svrg / 50.0 - target.carrier()).norm());
        sgd_err = sgd_err.max((sgd / 50.0 - target.carrier()).norm());
    }
    let elapsed = start.elapsed();
    verdict(
        svrg_err <= 1e-12 && sgd_err <= 1e-12 && within(elapsed, 5.0),
        format!(
            "20 pairs, exact geometry: max |mean ξ - grad f| {svrg_err:.1e}, stochastic {sgd_err:.1e}; {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let g = Grassmann::new(8, 2, GeometryKind::Exact).unwrap();
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        let mut rng = rng(400 + seed);
        let pca = gen_pca(50, 8, 2, &mut rng).unwrap();
        let opt = pca_eigen_optimum(&pca, 2);
        let w = point_at(&opt, rng.random_range(0.0..0.05), &mut rng);
        let w_tilde = point_at(&opt, rng.random_range(0.0..0.05), &mut rng);
        let probe = variance_probe(&g, &pca, &w, &w_tilde, 0, &mut rng).unwrap();
        assert!(probe.exhaustive);
        ratios.push(probe.svrg_second_moment / probe.sgd_second_moment);
    }
    let med = median(ratios.clone());
    let elapsed = start.elapsed();
    verdict(
        med <= 0.2 && within(elapsed, 10.0),
        format!(
            "E|ξ|² / E|grad f_i|² per seed {:?}, median {med:.2e}; {:.2}s",
            ratios.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- Karcher mean

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let mut rng = rng(501);
    let (mut violations, mut worst_ratio, mut worst_opt) = (0, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let c = random_point(10, 3, &mut rng).unwrap();
        let pts: Vec<GrassmannPoint> = (0..7)
            .map(|_| {
                let radius = rng.random_range(0.0..0.5);
                point_at(&c, radius, &mut rng)
            })
            .collect();
        let w = karcher_mean(&pts, 1e-12, 200).unwrap();
        let mut acc = DMatrix::zeros(10, 3);
        for q in &pts {
            acc += log(&w, q).unwrap().carrier();
        }
        worst_opt = worst_opt.max((acc / 7.0).norm());
        let radius = rng.random_range(0.0..0.5);
        let p = point_at(&c, radius, &mut rng);
        let lhs = dist(&p, &w).unwrap().powi(2);
        let rhs = pts.iter().map(|q| dist(&p, q).unwrap().powi(2)).sum::<f64>() * 4.0 / 7.0;
        worst_ratio = worst_ratio.max(lhs / rhs);
        if lhs > rhs {
            violations += 1;
        }
    }
    let line = |t: f64| GrassmannPoint::new(DMatrix::from_column_slice(2, 1, &[t.cos(), t.sin()])).unwrap();
    let mid = karcher_mean(&[line(0.2), line(1.0)], 1e-12, 200).unwrap();
    let mid_err = projector_gap(&mid, &line(0.6));
    let elapsed = start.elapsed();
    verdict(
        violations == 0 && worst_opt <= 1e-10 && mid_err <= 1e-8 && within(elapsed, 20.0),
        format!(
            "100 instances: {violations} inequality violations (max lhs/rhs {worst_ratio:.3}), \
             max |mean log| {worst_opt:.1e}, Gr(1,2) midpoint {mid_err:.1e}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- figure reproductions

fn alpha_grid(scale: f64) -> Vec<f64> {
    (1..=10).map(|k| k as f64 * scale).collect()
}

const LAMBDAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

fn run_cfg(base: &ExperimentConfig, seed: u64, epochs: usize) -> SvrgConfig {
    SvrgConfig {
        seed,
        max_epochs: epochs,
        record_wall_clock: false,
        ..base.svrg.clone()
    }
}

fn run_one(
    prep: &Prepared,
    base: &ExperimentConfig,
    algo: Algorithm,
    schedule: &ScheduleSpec,
    seed: u64,
    epochs: usize,
) -> Option<RunOutcome> {
    prep.run(algo, base.geometry, schedule, &run_cfg(base, seed, epochs)).ok()
}

fn final_train_loss(o: &Option<RunOutcome>) -> f64 {
    o.as_ref()
        .and_then(|o| o.records.last())
        .map(|r| r.train_loss)
        .filter(|v| v.is_finite())
        .unwrap_or(f64::INFINITY)
}

/// Candidate with the lowest final train loss after a short run on `prep`.
fn tune(
    prep: &Prepared,
    base: &ExperimentConfig,
    algo: Algorithm,
    candidates: &[ScheduleSpec],
    seed: u64,
    epochs: usize,
) -> ScheduleSpec {
    let losses = ordered_map(candidates, Execution::default(), |s| {
        final_train_loss(&run_one(prep, base, algo, s, seed, epochs))
    });
    let best = (0..candidates.len()).min_by(|&i, &j| losses[i].total_cmp(&losses[j])).unwrap();
    eprintln!(
        "  tuned {algo} over {} candidates ({epochs} epochs): {:?} α₀={} λ={} loss {:.6e}",
        candidates.len(),
        candidates[best].kind,
        candidates[best].alpha0,
        candidates[best].lambda,
        losses[best]
    );
    candidates[best]
}

fn record(shared: &mut Shared, label: String, base: &ExperimentConfig, algo: Algorithm, prep: &Prepared, o: &RunOutcome) {
    shared.emitted.push(Emitted {
        label,
        algo,
        n: prep.n_samples(),
        batch: base.svrg.batch_size,
        inner: base.svrg.inner_iterations(prep.n_samples()),
        csv: metrics_to_string(&o.records).unwrap(),
    });
}

fn last(o: &RunOutcome) -> &RunRecord {
    o.records.last().expect("at least one epoch")
}

fn hybrid_grid(alphas: &[f64], lambdas: &[f64]) -> Vec<ScheduleSpec> {
    let mut v = Vec::new();
    for &a in alphas {
        for &l in lambdas {
            v.push(ScheduleSpec::hybrid(a, l, 5));
        }
    }
    v
}

/// Epochs of a stochastic gradient run matching `svrg_epochs` of R-SVRG in
/// gradient evaluations, rounded up.
fn sgd_epochs_for(svrg_epochs: usize, n: usize, batch: usize, inner: usize) -> usize {
    let svrg = svrg_epochs * (n + 2 * batch * inner);
    svrg.div_ceil(batch * inner)
}

const SVRG_EPOCHS_PCA: usize = 30;
const SLOPE_WINDOW: usize = 20;
/// Fewest pre-tolerance epochs accepted for the rate fit when a run converges
/// in under `SLOPE_WINDOW` epochs.
const SLOPE_MIN_POINTS: usize = 5;

fn criterion_6(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    let mut base = ExperimentConfig::new(ProblemKind::Pca);
    base.svrg.record_wall_clock = false;
    let seeds: Vec<u64> = (0..5).collect();
    let prepared: Vec<Prepared> = seeds
        .iter()
        .map(|&seed| prepare(&ExperimentConfig { seed, ..base.clone() }).unwrap())
        .collect();
    let n = prepared[0].n_samples();
    let inner = base.svrg.inner_iterations(n);
    let alphas = alpha_grid(1e-3);

    let svrg_hybrid = tune(&prepared[0], &base, Algorithm::Rsvrg, &hybrid_grid(&alphas, &LAMBDAS), 0, 2);
    let mut sgd_candidates: Vec<ScheduleSpec> = alphas.iter().map(|&a| ScheduleSpec::fixed(a)).collect();
    for &a in &alphas {
        for &l in &LAMBDAS {
            sgd_candidates.push(ScheduleSpec::decay(a, l));
        }
    }
    sgd_candidates.extend(hybrid_grid(&alphas, &LAMBDAS));
    let sgd_best = tune(&prepared[0], &base, Algorithm::Rsgd, &sgd_candidates, 0, 4);
    let fixed: Vec<ScheduleSpec> = alphas.iter().map(|&a| ScheduleSpec::fixed(a)).collect();
    let svrg_fixed = tune(&prepared[0], &base, Algorithm::Rsvrg, &fixed, 0, 2);

    let sgd_epochs = sgd_epochs_for(SVRG_EPOCHS_PCA, n, base.svrg.batch_size, inner);
    let (mut gaps, mut norms) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
    let mut slopes = Vec::new();
    let f_star = prepared[0].reference.optimum.unwrap();
    for (prep, &seed) in prepared.iter().zip(&seeds) {
        let svrg = run_one(prep, &base, Algorithm::Rsvrg, &svrg_hybrid, seed, SVRG_EPOCHS_PCA).unwrap();
        let sgd = run_one(prep, &base, Algorithm::Rsgd, &sgd_best, seed, sgd_epochs).unwrap();
        let fixed_run = run_one(prep, &base, Algorithm::Rsvrg, &svrg_fixed, seed, SVRG_EPOCHS_PCA).unwrap();
        gaps.0.push(last(&svrg).optimality_gap.unwrap());
        gaps.1.push(last(&sgd).optimality_gap.unwrap());
        norms.0.push(last(&svrg).grad_norm);
        norms.1.push(last(&sgd).grad_norm);

        // gaps below a few ulps of f* are rounding noise, not progress
        let f_opt = prep.reference.optimum.unwrap();
        let floor = 64.0 * f64::EPSILON * f_opt.abs();
        let resolved: Vec<&RunRecord> =
            fixed_run.records.iter().filter(|r| r.optimality_gap.unwrap() > floor).collect();
        let window = &resolved[resolved.len().saturating_sub(SLOPE_WINDOW)..];
        let xs: Vec<f64> = window.iter().map(|r| r.epoch as f64).collect();
        let ys: Vec<f64> = window.iter().map(|r| r.optimality_gap.unwrap().ln()).collect();
        let (slope, _, r2) = if window.len() >= 2 { linear_fit(&xs, &ys) } else { (f64::NAN, 0.0, 0.0) };
        slopes.push((slope, r2, window.len()));
        eprintln!(
            "  seed {seed}: gap svrg {:.2e} sgd {:.2e}; |grad| svrg {:.2e} sgd {:.2e}; fixed slope {slope:.3} R² {r2:.4} over {} epochs",
            gaps.0.last().unwrap(),
            gaps.1.last().unwrap(),
            norms.0.last().unwrap(),
            norms.1.last().unwrap(),
            window.len()
        );

        record(shared, format!("pca rsvrg hybrid seed {seed}"), &base, Algorithm::Rsvrg, prep, &svrg);
        record(shared, format!("pca rsgd seed {seed}"), &base, Algorithm::Rsgd, prep, &sgd);
        record(shared, format!("pca rsvrg fixed seed {seed}"), &base, Algorithm::Rsvrg, prep, &fixed_run);
        if seed == 0 {
            shared.repeat = Some((
                Algorithm::Rsvrg,
                svrg_hybrid,
                run_cfg(&base, seed, SVRG_EPOCHS_PCA),
                metrics_to_string(&svrg.records).unwrap(),
            ));
        }
    }
    let (gap_svrg, gap_sgd) = (median(gaps.0), median(gaps.1));
    let (norm_svrg, norm_sgd) = (median(norms.0), median(norms.1));
    let slopes_ok = slopes.iter().all(|&(s, r2, len)| s < 0.0 && r2 >= 0.9 && len >= SLOPE_MIN_POINTS);
    let elapsed = start.elapsed();
    let pass = gap_svrg < gap_sgd && norm_sgd >= 10.0 * norm_svrg && slopes_ok && within(elapsed, 900.0);
    verdict(
        pass,
        format!(
            "f*={f_star:.4}; median gap R-SVRG {gap_svrg:.2e} vs R-SGD {gap_sgd:.2e}; median |grad| {norm_svrg:.2e} vs \
             {norm_sgd:.2e} (ratio {:.1}); fixed-step slope/R²/epochs {}; {:.0}s",
            norm_sgd / norm_svrg,
            slopes
                .iter()
                .map(|(s, r2, len)| format!("{s:.3}/{r2:.3}/{len}"))
                .collect::<Vec<_>>()
                .join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

const SVRG_EPOCHS_KARCHER: usize = 5;

fn criterion_7(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    let mut base = ExperimentConfig::new(ProblemKind::Karcher);
    base.svrg.record_wall_clock = false;
    let seeds: Vec<u64> = (0..3).collect();
    let prepared: Vec<Prepared> = seeds
        .iter()
        .map(|&seed| prepare(&ExperimentConfig { seed, ..base.clone() }).unwrap())
        .collect();
    let n = prepared[0].n_samples();
    let inner = base.svrg.inner_iterations(n);
    let grid = hybrid_grid(&alpha_grid(0.1), &[1e-3]);
    let svrg_s = tune(&prepared[0], &base, Algorithm::Rsvrg, &grid, 0, 1);
    let sgd_s = tune(&prepared[0], &base, Algorithm::Rsgd, &grid, 0, 2);
    let sgd_epochs = sgd_epochs_for(SVRG_EPOCHS_KARCHER, n, base.svrg.batch_size, inner);
    let (mut svrg_l, mut sgd_l, mut sd_l) = (Vec::new(), Vec::new(), Vec::new());
    for (prep, &seed) in prepared.iter().zip(&seeds) {
        let svrg = run_one(prep, &base, Algorithm::Rsvrg, &svrg_s, seed, SVRG_EPOCHS_KARCHER).unwrap();
        let sgd = run_one(prep, &base, Algorithm::Rsgd, &sgd_s, seed, sgd_epochs).unwrap();
        let sd = run_one(prep, &base, Algorithm::Rsd, &svrg_s, seed, SdConfig::default().max_iters).unwrap();
        svrg_l.push(last(&svrg).train_loss);
        sgd_l.push(last(&sgd).train_loss);
        sd_l.push(last(&sd).train_loss);
        eprintln!(
            "  seed {seed}: loss svrg {:.6} sgd {:.6} sd {:.6}",
            svrg_l.last().unwrap(),
            sgd_l.last().unwrap(),
            sd_l.last().unwrap()
        );
        record(shared, format!("karcher rsvrg seed {seed}"), &base, Algorithm::Rsvrg, prep, &svrg);
        record(shared, format!("karcher rsgd seed {seed}"), &base, Algorithm::Rsgd, prep, &sgd);
        record(shared, format!("karcher rsd seed {seed}"), &base, Algorithm::Rsd, prep, &sd);
    }
    let (a, b, c) = (median(svrg_l), median(sgd_l), median(sd_l));
    let elapsed = start.elapsed();
    verdict(
        a < b && a < c && within(elapsed, 1200.0),
        format!(
            "median final loss R-SVRG {a:.6} vs R-SGD {b:.6} vs R-SD {c:.6}; {:.0}s",
            elapsed.as_secs_f64()
        ),
    )
}

const SVRG_EPOCHS_COMPLETION: usize = 20;

fn criterion_8(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    let mut base = ExperimentConfig::new(ProblemKind::Completion);
    base.svrg.record_wall_clock = false;
    let seeds: Vec<u64> = (0..3).collect();
    let prepared: Vec<Prepared> = seeds
        .iter()
        .map(|&seed| prepare(&ExperimentConfig { seed, ..base.clone() }).unwrap())
        .collect();
    let n = prepared[0].n_samples();
    let inner = base.svrg.inner_iterations(n);
    let grid = hybrid_grid(&alpha_grid(1e-3), &[1e-3]);
    let svrg_s = tune(&prepared[0], &base, Algorithm::Rsvrg, &grid, 0, 2);
    let sgd_s = tune(&prepared[0], &base, Algorithm::Rsgd, &grid, 0, 4);
    let sgd_epochs = sgd_epochs_for(SVRG_EPOCHS_COMPLETION, n, base.svrg.batch_size, inner);
    let (mut svrg_t, mut sgd_t, mut reach) = (Vec::new(), Vec::new(), Vec::new());
    for (prep, &seed) in prepared.iter().zip(&seeds) {
        let svrg = run_one(prep, &base, Algorithm::Rsvrg, &svrg_s, seed, SVRG_EPOCHS_COMPLETION).unwrap();
        let sgd = run_one(prep, &base, Algorithm::Rsgd, &sgd_s, seed, sgd_epochs).unwrap();
        let target = last(&sgd).test_loss.unwrap();
        let budget = last(&sgd).grad_evals_over_n;
        let hit = svrg
            .records
            .iter()
            .find(|r| r.test_loss.unwrap() <= target)
            .map(|r| r.grad_evals_over_n / budget)
            .unwrap_or(f64::INFINITY);
        svrg_t.push(last(&svrg).test_loss.unwrap());
        sgd_t.push(target);
        reach.push(hit);
        eprintln!(
            "  seed {seed}: test loss svrg {:.4e} sgd {target:.4e}; budget fraction to reach sgd {hit:.3}",
            svrg_t.last().unwrap()
        );
        record(shared, format!("completion rsvrg seed {seed}"), &base, Algorithm::Rsvrg, prep, &svrg);
        record(shared, format!("completion rsgd seed {seed}"), &base, Algorithm::Rsgd, prep, &sgd);
    }
    let (a, b, frac) = (median(svrg_t), median(sgd_t), median(reach));
    let elapsed = start.elapsed();
    verdict(
        a <= b && frac <= 0.7 && within(elapsed, 1800.0),
        format!(
            "median final test loss R-SVRG {a:.4e} vs R-SGD {b:.4e}; median budget fraction for R-SVRG to reach \
             R-SGD's final test loss {frac:.3}; {:.0}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- reproducibility

fn criterion_9(shared: &Shared) -> Verdict {
    let start = Instant::now();
    let mut base = ExperimentConfig::new(ProblemKind::Pca);
    base.svrg.record_wall_clock = false;
    let (algo, schedule, cfg, first) = match &shared.repeat {
        Some((a, s, c, csv)) => (*a, *s, c.clone(), Some(csv.clone())),
        None => (
            Algorithm::Rsvrg,
            ScheduleSpec::hybrid(0.005, 1e-3, 5),
            run_cfg(&base, 0, SVRG_EPOCHS_PCA),
            None,
        ),
    };
    let prep = prepare(&ExperimentConfig { seed: cfg.seed, ..base.clone() }).unwrap();
    let mut again = || metrics_to_string(&prep.run(algo, base.geometry, &schedule, &cfg).unwrap().records).unwrap();
    let first = first.unwrap_or_else(&mut again);
    let second = again();
    let elapsed = start.elapsed();
    verdict(
        first.as_bytes() == second.as_bytes(),
        format!(
            "{algo} {:?} α₀={} seed {}: {} CSV bytes, identical={}; {:.0}s",
            schedule.kind,
            schedule.alpha0,
            cfg.seed,
            first.len(),
            first == second,
            elapsed.as_secs_f64()
        ),
    )
}

fn expected_evals(algo: Algorithm, epoch: usize, n: usize, batch: usize, inner: usize) -> u64 {
    let (n, b, m, s) = (n as u64, batch as u64, inner as u64, epoch as u64);
    match algo {
        Algorithm::Rsvrg => s * (n + 2 * b * m),
        Algorithm::RsvrgPlus => b * m + (s - 1) * (n + 2 * b * m),
        Algorithm::Rsgd => s * b * m,
        Algorithm::Rsd => s * n,
    }
}

/// Small runs of every algorithm on every problem, so the accounting check
/// covers all code paths even when the long criteria were skipped.
fn accounting_runs(shared: &mut Shared) {
    for problem in [ProblemKind::Pca, ProblemKind::Karcher, ProblemKind::Completion] {
        let mut base = ExperimentConfig::new(problem);
        base.svrg.record_wall_clock = false;
        base.svrg.inner_mult = 1;
        base.svrg.batch_size = 3;
        match problem {
            ProblemKind::Pca => (base.n, base.d, base.r) = (300, 10, 3),
            ProblemKind::Karcher => (base.n, base.d, base.r) = (40, 12, 3),
            ProblemKind::Completion => (base.n, base.d, base.r, base.os) = (120, 60, 3, 3.0),
        }
        let prep = prepare(&base).unwrap();
        for algo in [Algorithm::Rsvrg, Algorithm::RsvrgPlus, Algorithm::Rsgd, Algorithm::Rsd] {
            let o = run_one(&prep, &base, algo, &ScheduleSpec::hybrid(1e-3, 1e-2, 2), 0, 4).unwrap();
            record(shared, format!("{problem} {algo} small"), &base, algo, &prep, &o);
        }
    }
}

fn criterion_10(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    accounting_runs(shared);
    let (mut rows, mut bad) = (0usize, Vec::new());
    for e in &shared.emitted {
        let mut reader = csv::Reader::from_reader(e.csv.as_bytes());
        for row in reader.records() {
            let row = row.unwrap();
            let epoch: usize = row[0].parse().unwrap();
            let got: f64 = row[1].parse().unwrap();
            let want = expected_evals(e.algo, epoch, e.n, e.batch, e.inner) as f64 / e.n as f64;
            rows += 1;
            if got != want {
                bad.push(format!("{} epoch {epoch}: {got} != {want}", e.label));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        bad.is_empty() && rows > 0,
        format!(
            "{} CSVs, {rows} rows, {} mismatches{}; {:.1}s",
            shared.emitted.len(),
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut shared = Shared::default();
    let mut failed = 0;
    for k in 1..=10u32 {
        if !wanted(k) {
            continue;
        }
        eprintln!("criterion {k}: running");
        let v = match k {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&mut shared),
            7 => criterion_7(&mut shared),
            8 => criterion_8(&mut shared),
            9 => criterion_9(&shared),
            _ => criterion_10(&mut shared),
        };
        if !v.pass {
            failed += 1;
        }
        println!("criterion {k}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        println!("acceptance: all selected criteria passed");
        ExitCode::SUCCESS
    }
}
