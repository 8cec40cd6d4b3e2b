//! Named Monte Carlo comparisons between a conditioned diffusion and an
//! independent construction of the same law.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diffop::DiffusionModel;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::{ball, bessel_hat, deltoid, jacobi, laguerre, matrix_jacobi, weyl_dyson, MatrixKind};
use crate::polyring::rat;
use crate::simkit::{
    conditioned_paths, matrix_brownian, matrix_brownian_from, path_rng, spectral_map, EnsembleSample, SimConfig,
    SpectralMap,
};
use crate::stats::{energy_permutation_test, ks_two_sample, ComparisonReport, StatKind};

pub const EXPERIMENTS: [&str; 7] = [
    "bessel13",
    "jacobi-chebyshev",
    "ou-laguerre",
    "deltoid-su3",
    "ball-sphere",
    "matrix-jacobi",
    "weyl-dyson",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n_paths: usize,
    pub dt: f64,
    /// Horizon of the reference side; the conditioned side may be rescaled.
    pub t: f64,
    pub seed: u64,
    /// KS threshold for the KS-based experiments.
    pub threshold: f64,
    /// Permutations for the energy-distance experiments.
    pub permutations: usize,
    pub level: f64,
    /// Matrix size for weyl-dyson.
    pub d: usize,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_paths: 10_000,
            dt: 1e-3,
            t: 1.0,
            seed: 20_240_917,
            threshold: 0.035,
            permutations: 500,
            level: 0.99,
            d: 3,
            execution: Execution::Parallel,
        }
    }
}

/// Documented default parameters for each experiment.
pub fn default_config(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::default();
    Ok(match name {
        "bessel13" => ExperimentConfig {
            n_paths: 20_000,
            threshold: 0.025,
            ..base
        },
        "jacobi-chebyshev" | "ou-laguerre" => ExperimentConfig { t: 0.5, ..base },
        "deltoid-su3" => ExperimentConfig { t: 0.3, ..base },
        "ball-sphere" | "matrix-jacobi" => ExperimentConfig {
            n_paths: 4000,
            t: 0.3,
            permutations: 200,
            ..base
        },
        "weyl-dyson" => ExperimentConfig {
            dt: 5e-4,
            t: 0.5,
            ..base
        },
        other => return Err(Error::UnknownExperiment(other.into())),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub config: ExperimentConfig,
    pub reports: Vec<ComparisonReport>,
    pub rejected_steps: u64,
    pub pass: bool,
}

pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let (reports, rejected_steps) = match name {
        "bessel13" => bessel13(cfg)?,
        "jacobi-chebyshev" => jacobi_chebyshev(cfg)?,
        "ou-laguerre" => ou_laguerre(cfg)?,
        "deltoid-su3" => deltoid_su3(cfg)?,
        "ball-sphere" => ball_sphere(cfg)?,
        "matrix-jacobi" => matrix_jacobi_block(cfg)?,
        "weyl-dyson" => weyl_dyson_hermitian(cfg)?,
        other => return Err(Error::UnknownExperiment(other.into())),
    };
    Ok(ExperimentResult {
        name: name.to_string(),
        config: cfg.clone(),
        pass: reports.iter().all(|r| r.pass),
        reports,
        rejected_steps,
    })
}

fn sim(cfg: &ExperimentConfig, t: f64, seed: u64) -> SimConfig {
    SimConfig::new(t, cfg.dt, cfg.n_paths, seed).with_execution(cfg.execution)
}

fn conditioned(m: &DiffusionModel, x0: &[f64], cfg: &ExperimentConfig, t: f64) -> Result<EnsembleSample> {
    conditioned_paths(m, x0, &sim(cfg, t, cfg.seed))
}

fn ks_report(label: String, a: &[f64], b: &[f64], threshold: f64) -> Result<ComparisonReport> {
    Ok(ComparisonReport::new(StatKind::Ks, label, ks_two_sample(a, b)?, a.len(), b.len(), threshold))
}

fn energy_report(label: &str, a: &[Vec<f64>], b: &[Vec<f64>], cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    let t = energy_permutation_test(a, b, cfg.permutations, cfg.level, cfg.seed ^ 0x5eed, cfg.execution)?;
    let mut r = ComparisonReport::new(StatKind::Energy, label, t.statistic, a.len(), b.len(), t.quantile);
    r.pass = t.pass();
    Ok(r)
}

/// Exact Gaussian draws, one stream per path.
fn gaussian_points(n_paths: usize, dim: usize, seed: u64, exec: Execution) -> Vec<Vec<f64>> {
    exec.map(n_paths, |i| {
        let mut rng = path_rng(seed, i);
        (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    })
}

/// `bessel_hat(1)` conditioned by `h = x^{-1/2}` (the square of `|B|`
/// conditioned by `h = |x|`) against `|x0 + W_t|` for a 3-d Brownian motion.
fn bessel13(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let x0: f64 = 0.5;
    let cond = conditioned(&bessel_hat(&rat(1, 1))?, &[x0 * x0], cfg, cfg.t)?;
    let radial: Vec<f64> = cond.column(0).iter().map(|y| y.max(0.0).sqrt()).collect();
    let st = cfg.t.sqrt();
    let exact: Vec<f64> = gaussian_points(cfg.n_paths, 3, cfg.seed.wrapping_add(1), cfg.execution)
        .iter()
        .map(|g| ((x0 + st * g[0]).powi(2) + (st * g[1]).powi(2) + (st * g[2]).powi(2)).sqrt())
        .collect();
    let r = ks_report("|BM^1| conditioned vs |BM^3|".into(), &radial, &exact, cfg.threshold)?;
    Ok((vec![r], cond.rejected_step_count))
}

/// Rotation whose first row is `r` (a unit vector).
fn rotation_with_first_row(r: &[f64]) -> DMatrix<Complex64> {
    let d = r.len();
    let mut v: Vec<f64> = r.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let nv: f64 = v.iter().map(|x| x * x).sum();
    let mut h = DMatrix::<f64>::identity(d, d);
    if nv > 1e-300 {
        for i in 0..d {
            for j in 0..d {
                h[(i, j)] -= 2.0 * v[i] * v[j] / nv;
            }
        }
        // the reflection has det -1; flip a row other than the first
        h.row_mut(d - 1).neg_mut();
    }
    h.map(|x| Complex64::new(x, 0.0))
}

/// `jacobi(1/2, 1/2)` conditioned against one entry of an SO(4) Brownian
/// matrix, which is `jacobi(3/2, 3/2)`.
fn jacobi_chebyshev(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let x0 = 0.5f64;
    let cond = conditioned(&jacobi(&rat(1, 2), &rat(1, 2))?, &[x0], cfg, cfg.t)?;
    let start = rotation_with_first_row(&[x0, (1.0 - x0 * x0).sqrt(), 0.0, 0.0]);
    let so = matrix_brownian_from(MatrixKind::SOd, 4, &start, &sim(cfg, cfg.t, cfg.seed.wrapping_add(1)))?;
    let m11 = spectral_map(&so, SpectralMap::FirstColumnBlock { p: 1, q: 1 })?.column(0);
    let r = ks_report("jacobi(1/2,1/2) conditioned vs SO(4) entry".into(), &cond.column(0), &m11, cfg.threshold)?;
    Ok((vec![r], cond.rejected_step_count))
}

/// `laguerre(1/2)` conditioned against `|X_{t/2}|^2 / 2` for a 3-d OU process
/// sampled exactly.
fn ou_laguerre(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let y0 = 1.0f64;
    let cond = conditioned(&laguerre(&rat(1, 2))?, &[y0], cfg, cfg.t)?;
    let s = cfg.t / 2.0;
    let (decay, sd) = ((-s).exp(), (1.0 - (-2.0 * s).exp()).sqrt());
    let x0 = (2.0 * y0).sqrt();
    let exact: Vec<f64> = gaussian_points(cfg.n_paths, 3, cfg.seed.wrapping_add(1), cfg.execution)
        .iter()
        .map(|g| ((x0 * decay + sd * g[0]).powi(2) + (sd * g[1]).powi(2) + (sd * g[2]).powi(2)) / 2.0)
        .collect();
    let r = ks_report("laguerre(1/2) conditioned vs |OU^3|^2/2".into(), &cond.column(0), &exact, cfg.threshold)?;
    Ok((vec![r], cond.rejected_step_count))
}

/// `deltoid(1)` conditioned (which is `deltoid(4)`) from the cusp `Z = 1` up
/// to time `8/3 t`, against the normalised trace of an SU(3) Brownian matrix
/// at time `t`.
fn deltoid_su3(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let m = deltoid(&rat(1, 1))?.to_real()?;
    let cond = conditioned(&m, &[1.0, 0.0], cfg, 8.0 / 3.0 * cfg.t)?;
    let su = matrix_brownian(MatrixKind::SU3, 3, &sim(cfg, cfg.t, cfg.seed.wrapping_add(1)))?;
    let z = spectral_map(&su, SpectralMap::TraceSu3)?;
    let r = energy_report("deltoid(4) at 8t/3 vs SU(3) trace at t", &cond.points, &z.points, cfg)?;
    Ok((vec![r], cond.rejected_step_count))
}

/// `ball(2, 1)` conditioned (which is `ball(2, 5)`) against the first two
/// entries of a row of an SO(6) Brownian matrix.
fn ball_sphere(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let x0 = [0.3, 0.2];
    let cond = conditioned(&ball(2, &rat(1, 1))?, &x0, cfg, cfg.t)?;
    let rest = (1.0f64 - 0.13).sqrt();
    let start = rotation_with_first_row(&[0.3, 0.2, rest, 0.0, 0.0, 0.0]);
    let so = matrix_brownian_from(MatrixKind::SOd, 6, &start, &sim(cfg, cfg.t, cfg.seed.wrapping_add(1)))?;
    let block = spectral_map(&so, SpectralMap::FirstColumnBlock { p: 1, q: 2 })?;
    let r = energy_report("ball(2,1) conditioned vs SO(6) row", &cond.points, &block.points, cfg)?;
    Ok((vec![r], cond.rejected_step_count))
}

/// `matrix_jacobi(2, 2, 4)` conditioned (which is `matrix_jacobi(2, 2, 6)`)
/// against the upper-left 2x2 block of an SO(6) Brownian matrix.
fn matrix_jacobi_block(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let mut a = DMatrix::<f64>::zeros(6, 6);
    for i in 0..6 {
        for j in i + 1..6 {
            let v = 0.35 * (1.0 + ((i + 2 * j) % 5) as f64) / 5.0;
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    let start = a.exp();
    let x0: Vec<f64> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| start[(i, j)]).collect();
    let cond = conditioned(&matrix_jacobi(2, 2, &rat(4, 1))?, &x0, cfg, cfg.t)?;
    let so = matrix_brownian_from(
        MatrixKind::SOd,
        6,
        &start.map(|x| Complex64::new(x, 0.0)),
        &sim(cfg, cfg.t, cfg.seed.wrapping_add(1)),
    )?;
    let block = spectral_map(&so, SpectralMap::FirstColumnBlock { p: 2, q: 2 })?;
    let r = energy_report("matrix_jacobi(2,2,4) conditioned vs SO(6) block", &cond.points, &block.points, cfg)?;
    Ok((vec![r], cond.rejected_step_count))
}

/// Coefficients `a_0..a_{d-1}` of the monic polynomial with the given roots.
pub fn coefficients_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &v) in c.iter().enumerate() {
            next[k + 1] += v;
            next[k] -= r * v;
        }
        c = next;
    }
    c.pop();
    c
}

/// Sorted real parts of the roots of `X^d + sum a_i X^i`.
pub fn roots_from_coefficients(a: &[f64]) -> Vec<f64> {
    let d = a.len();
    let comp = DMatrix::<f64>::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -a[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut r: Vec<f64> = comp.complex_eigenvalues().iter().map(|z| z.re).collect();
    r.sort_by(|x, y| x.total_cmp(y));
    r
}

/// Brownian motion in the Weyl chamber conditioned to stay there, run in
/// characteristic-polynomial coordinates, against the sorted spectrum of a
/// Hermitian Brownian matrix.
fn weyl_dyson_hermitian(cfg: &ExperimentConfig) -> Result<(Vec<ComparisonReport>, u64)> {
    let d = cfg.d;
    if !(2..=4).contains(&d) {
        return Err(Error::Unsupported(format!("weyl-dyson with d = {d}")));
    }
    let roots0: Vec<f64> = (0..d).map(|k| k as f64 - (d as f64 - 1.0) / 2.0).collect();
    let a0 = coefficients_from_roots(&roots0);
    let cond = conditioned(&weyl_dyson(d, &rat(-1, 2))?, &a0, cfg, cfg.t)?;
    let spectra: Vec<Vec<f64>> = cond.points.iter().map(|a| roots_from_coefficients(a)).collect();
    let start = DMatrix::<Complex64>::from_fn(d, d, |i, j| if i == j { Complex64::new(roots0[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let h = matrix_brownian_from(MatrixKind::Hermitian, d, &start, &sim(cfg, cfg.t, cfg.seed.wrapping_add(1)))?;
    let eig = spectral_map(&h, SpectralMap::SpectrumSorted)?;
    let reports = (0..d)
        .map(|k| {
            let a: Vec<f64> = spectra.iter().map(|s| s[k]).collect();
            ks_report(format!("eigenvalue {}", k + 1), &a, &eig.column(k), cfg.threshold)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((reports, cond.rejected_step_count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_paths: n,
            dt: 2e-3,
            threshold: 0.08,
            permutations: 100,
            ..default_config(name).unwrap()
        }
    }

    #[test]
    fn root_coefficient_round_trip() {
        assert_eq!(coefficients_from_roots(&[-1.0, 0.0, 1.0]), vec![0.0, -1.0, 0.0]);
        let r = roots_from_coefficients(&coefficients_from_roots(&[0.5, -2.0, 3.0]));
        for (x, y) in r.iter().zip([-2.0, 0.5, 3.0]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_has_the_requested_row() {
        let r = [0.3, 0.2, (0.87f64).sqrt(), 0.0];
        let m = rotation_with_first_row(&r).map(|z| z.re);
        for (j, v) in r.iter().enumerate() {
            assert!((m[(0, j)] - v).abs() < 1e-14);
        }
        assert!((m.determinant() - 1.0).abs() < 1e-12);
        assert!((&m * m.transpose() - DMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn small_runs_of_the_kolmogorov_experiments() {
        for name in ["bessel13", "jacobi-chebyshev", "ou-laguerre", "weyl-dyson"] {
            let r = run_experiment(name, &small(name, 3000)).unwrap();
            assert!(r.pass, "{name}: {:?}", r.reports);
        }
    }

    #[test]
    fn small_runs_of_the_energy_experiments() {
        for name in ["deltoid-su3", "ball-sphere", "matrix-jacobi"] {
            let r = run_experiment(name, &small(name, 800)).unwrap();
            assert!(r.pass, "{name}: {:?}", r.reports);
        }
    }

    #[test]
    fn unknown_experiment() {
        assert!(matches!(default_config("nope"), Err(Error::UnknownExperiment(_))));
        assert!(matches!(
            run_experiment("nope", &ExperimentConfig::default()),
            Err(Error::UnknownExperiment(_))
        ));
    }
}
