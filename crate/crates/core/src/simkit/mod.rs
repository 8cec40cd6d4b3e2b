//! Euler–Maruyama simulation of polynomial diffusion models and Brownian
//! motions on matrix groups and spaces.

mod matrix;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diffop::{h_transform, DiffusionModel};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::polyring::CompiledPoly;

pub use matrix::{
    generator_check, matrix_brownian, matrix_brownian_from, spectral_map, table_point, GeneratorReport, GeneratorRow,
    MatrixEnsemble, SpectralMap,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Redraw the increment; halve `dt` after ten consecutive rejections.
    #[default]
    RejectStep,
    /// Halve `dt` and redraw on every rejection.
    HalveDt,
    /// Stop the path at its last interior position.
    Absorb,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    EulerMaruyama,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub t_final: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub boundary_policy: BoundaryPolicy,
    pub scheme: Scheme,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_final: 1.0,
            dt: 1e-3,
            n_paths: 1000,
            seed: 7,
            boundary_policy: BoundaryPolicy::RejectStep,
            scheme: Scheme::EulerMaruyama,
            execution: Execution::Parallel,
        }
    }
}

impl SimConfig {
    pub fn new(t_final: f64, dt: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            t_final,
            dt,
            n_paths,
            seed,
            ..Default::default()
        }
    }

    pub fn with_execution(mut self, e: Execution) -> Self {
        self.execution = e;
        self
    }

    pub fn with_policy(mut self, p: BoundaryPolicy) -> Self {
        self.boundary_policy = p;
        self
    }

    /// `t_final = 0` is accepted and returns the initial points.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::BadConfig(format!("dt = {}", self.dt)));
        }
        if !(self.t_final == 0.0 || (self.t_final >= self.dt && self.t_final.is_finite())) {
            return Err(Error::BadConfig(format!("t_final = {} with dt = {}", self.t_final, self.dt)));
        }
        if self.n_paths == 0 {
            return Err(Error::BadConfig("n_paths must be at least 1".into()));
        }
        Ok(())
    }
}

/// Independent stream for path `idx`.
pub fn path_rng(seed: u64, idx: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    rng
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Terminal-time points of an ensemble of paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub label: String,
    pub vars: Vec<String>,
    pub time: f64,
    pub dt: f64,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    pub rejected_step_count: u64,
    pub absorbed_count: usize,
}

impl EnsembleSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[i]).collect()
    }

    /// Apply `f` to every point.
    pub fn map(&self, label: &str, vars: Vec<String>, f: impl Fn(&[f64]) -> Vec<f64>) -> EnsembleSample {
        EnsembleSample {
            label: label.to_string(),
            vars,
            points: self.points.iter().map(|p| f(p)).collect(),
            ..self.clone()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# label={} t={} dt={} seed={}\n", self.label, self.time, self.dt, self.seed);
        s.push_str(&self.vars.join(","));
        s.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Lower-triangular `l` with `l l^T = a` for a positive semidefinite `a`
/// (row-major, `n x n`). Pivots within `1e-12` of zero, relative to the
/// largest diagonal entry, are clamped to zero.
pub fn psd_cholesky(a: &[f64], n: usize, l: &mut [f64]) -> Result<()> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    l.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n {
        let mut s = a[j * n + j];
        for k in 0..j {
            s -= l[j * n + k] * l[j * n + k];
        }
        if s < -tol {
            return Err(Error::Cholesky { row: j, pivot: s });
        }
        if s <= tol {
            continue;
        }
        let d = s.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut t = a[i * n + j];
            for k in 0..j {
                t -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = t / d;
        }
    }
    Ok(())
}

struct Compiled {
    n: usize,
    gamma: Vec<CompiledPoly>,
    drift: Vec<CompiledPoly>,
    predicates: Vec<CompiledPoly>,
}

impl Compiled {
    fn new(m: &DiffusionModel) -> Result<Self> {
        if !m.is_real_coordinates() {
            return Err(Error::ComplexCoordinates);
        }
        Ok(Compiled {
            n: m.nvars(),
            gamma: m.gamma.iter().flatten().map(|p| p.compile()).collect(),
            drift: m.drift.iter().map(|p| p.compile()).collect(),
            predicates: m.domain.positive.iter().map(|p| p.compile()).collect(),
        })
    }

    fn inside(&self, x: &[f64]) -> bool {
        self.predicates.iter().all(|p| p.eval(x) > 0.0)
    }
}

struct PathOutcome {
    x: Vec<f64>,
    rejected: u64,
    absorbed: bool,
}

fn run_path(c: &Compiled, x0: &[f64], cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<PathOutcome> {
    let n = c.n;
    let mut x = x0.to_vec();
    let (mut b, mut g, mut l) = (vec![0.0; n], vec![0.0; n * n], vec![0.0; n * n]);
    let (mut xi, mut y) = (vec![0.0; n], vec![0.0; n]);
    let base = cfg.dt;
    let mut cur = base;
    let mut t = 0.0;
    let mut rejected = 0u64;
    while cfg.t_final - t > 1e-12 * cfg.t_final.max(1.0) {
        for i in 0..n {
            b[i] = c.drift[i].eval(&x);
        }
        for (gi, p) in g.iter_mut().zip(&c.gamma) {
            *gi = 2.0 * p.eval(&x);
        }
        psd_cholesky(&g, n, &mut l)?;
        let mut h = cur.min(cfg.t_final - t);
        let mut streak = 0;
        loop {
            xi.iter_mut().for_each(|v| *v = normal(rng));
            let sq = h.sqrt();
            for i in 0..n {
                let noise: f64 = (0..=i).map(|k| l[i * n + k] * xi[k]).sum();
                y[i] = x[i] + b[i] * h + sq * noise;
            }
            if c.inside(&y) {
                break;
            }
            rejected += 1;
            match cfg.boundary_policy {
                BoundaryPolicy::Absorb => return Ok(PathOutcome { x, rejected, absorbed: true }),
                BoundaryPolicy::HalveDt => h /= 2.0,
                BoundaryPolicy::RejectStep => {
                    streak += 1;
                    if streak >= 10 {
                        streak = 0;
                        h /= 2.0;
                    }
                }
            }
            if h < 1e-12 * base {
                return Err(Error::StepUnderflow(t));
            }
        }
        cur = if h < cur { (2.0 * h).min(base) } else { base };
        t += h;
        std::mem::swap(&mut x, &mut y);
    }
    Ok(PathOutcome {
        x,
        rejected,
        absorbed: false,
    })
}

/// Euler–Maruyama paths of `m` from `x0`: `x += b dt + sigma sqrt(dt) xi`
/// with `sigma sigma^T = 2 Gamma`. The model must be in real coordinates;
/// `x0` may lie on the closed boundary.
pub fn sde_paths(m: &DiffusionModel, x0: &[f64], cfg: &SimConfig) -> Result<EnsembleSample> {
    cfg.validate()?;
    let c = Compiled::new(m)?;
    if x0.len() != c.n {
        return Err(Error::PointLength {
            got: x0.len(),
            expected: c.n,
        });
    }
    if let Some(i) = c.predicates.iter().position(|p| !(p.eval(x0) >= 0.0)) {
        return Err(Error::OutsideDomain(i));
    }
    let outcomes = cfg
        .execution
        .map(cfg.n_paths, |i| run_path(&c, x0, cfg, &mut path_rng(cfg.seed, i)));
    let mut points = Vec::with_capacity(cfg.n_paths);
    let (mut rejected, mut absorbed) = (0, 0);
    for o in outcomes {
        let o = o?;
        rejected += o.rejected;
        absorbed += o.absorbed as usize;
        points.push(o.x);
    }
    Ok(EnsembleSample {
        label: m.label.clone(),
        vars: m.vars.clone(),
        time: cfg.t_final,
        dt: cfg.dt,
        seed: cfg.seed,
        points,
        rejected_step_count: rejected,
        absorbed_count: absorbed,
    })
}

/// Paths of the h-transform of `m`.
pub fn conditioned_paths(m: &DiffusionModel, x0: &[f64], cfg: &SimConfig) -> Result<EnsembleSample> {
    if !m.is_real_coordinates() {
        return Err(Error::ComplexCoordinates);
    }
    let ht = h_transform(m)?;
    let mut out = sde_paths(&ht.model, x0, cfg)?;
    out.label = format!("{} conditioned", m.label);
    Ok(out)
}
