//! Brownian motions on SO(d), SU(3), Hermitian and real symmetric matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{normal, path_rng, EnsembleSample, SimConfig};
use crate::diffop::l_apply;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::{matrix_table, MatrixKind, MatrixTable};
use crate::polyring::Poly;

const REPROJECT_EVERY: usize = 100;

type CMat = DMatrix<Complex64>;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Terminal-time matrices of an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixEnsemble {
    pub kind: MatrixKind,
    pub d: usize,
    pub time: f64,
    pub dt: f64,
    pub seed: u64,
    pub matrices: Vec<CMat>,
}

fn check_kind(kind: MatrixKind, d: usize) -> Result<()> {
    let ok = match kind {
        MatrixKind::SOd => d >= 2,
        MatrixKind::SU3 => d == 3,
        MatrixKind::Hermitian | MatrixKind::Symmetric => d >= 1,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{} with d = {d}", kind.name())))
    }
}

fn steps(cfg: &SimConfig) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    while cfg.t_final - t > 1e-12 * cfg.t_final.max(1.0) {
        let h = cfg.dt.min(cfg.t_final - t);
        out.push(h);
        t += h;
    }
    out
}

/// Gell-Mann matrices.
fn gell_mann() -> [CMat; 8] {
    let z = cx(0.0, 0.0);
    let m = |e: [(usize, usize, Complex64); 4]| {
        let mut a = CMat::from_element(3, 3, z);
        for (i, j, v) in e {
            a[(i, j)] += v;
        }
        a
    };
    let one = cx(1.0, 0.0);
    let i = cx(0.0, 1.0);
    let s3 = 1.0 / 3f64.sqrt();
    [
        m([(0, 1, one), (1, 0, one), (0, 0, z), (0, 0, z)]),
        m([(0, 1, -i), (1, 0, i), (0, 0, z), (0, 0, z)]),
        m([(0, 0, one), (1, 1, -one), (0, 0, z), (0, 0, z)]),
        m([(0, 2, one), (2, 0, one), (0, 0, z), (0, 0, z)]),
        m([(0, 2, -i), (2, 0, i), (0, 0, z), (0, 0, z)]),
        m([(1, 2, one), (2, 1, one), (0, 0, z), (0, 0, z)]),
        m([(1, 2, -i), (2, 1, i), (0, 0, z), (0, 0, z)]),
        m([(0, 0, cx(s3, 0.0)), (1, 1, cx(s3, 0.0)), (2, 2, cx(-2.0 * s3, 0.0)), (0, 0, z)]),
    ]
}

fn reproject_so(o: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = o.clone().qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn reproject_su(g: &CMat) -> CMat {
    let svd = g.clone().svd(true, true);
    let u = svd.u.expect("u requested") * svd.v_t.expect("v requested");
    let det = u.determinant();
    u / det.powf(1.0 / 3.0)
}

fn so_path(d: usize, start: &CMat, hs: &[f64], seed: u64, idx: usize) -> CMat {
    let mut rng = path_rng(seed, idx);
    let mut o = start.map(|z| z.re);
    for (k, &h) in hs.iter().enumerate() {
        let s = (2.0 * h).sqrt();
        let mut a = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v = s * normal(&mut rng);
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        o *= a.exp();
        if (k + 1) % REPROJECT_EVERY == 0 {
            o = reproject_so(&o);
        }
    }
    o.map(|v| cx(v, 0.0))
}

fn su3_path(start: &CMat, hs: &[f64], basis: &[CMat; 8], seed: u64, idx: usize) -> CMat {
    let mut rng = path_rng(seed, idx);
    let mut g = start.clone();
    for (k, &h) in hs.iter().enumerate() {
        // sqrt(2h) sum xi_a (i sqrt(2) lambda_a)
        let s = cx(0.0, 2.0 * h.sqrt());
        let mut x = CMat::from_element(3, 3, cx(0.0, 0.0));
        for b in basis {
            x += b * cx(normal(&mut rng), 0.0);
        }
        g *= (x * s).exp();
        if (k + 1) % REPROJECT_EVERY == 0 {
            g = reproject_su(&g);
        }
    }
    g
}

fn additive_path(kind: MatrixKind, d: usize, start: &CMat, hs: &[f64], seed: u64, idx: usize) -> CMat {
    let mut rng = path_rng(seed, idx);
    let mut m = start.clone();
    for &h in hs {
        let sd = (2.0 * h).sqrt();
        let so = h.sqrt();
        for i in 0..d {
            m[(i, i)] += cx(sd * normal(&mut rng), 0.0);
            for j in i + 1..d {
                let inc = match kind {
                    MatrixKind::Hermitian => cx(so * normal(&mut rng), so * normal(&mut rng)),
                    _ => cx(so * normal(&mut rng), 0.0),
                };
                m[(i, j)] += inc;
                m[(j, i)] += inc.conj();
            }
        }
    }
    m
}

/// Brownian motion started at the identity.
pub fn matrix_brownian(kind: MatrixKind, d: usize, cfg: &SimConfig) -> Result<MatrixEnsemble> {
    matrix_brownian_from(kind, d, &CMat::identity(d, d), cfg)
}

/// SO(d) and SU(3) take right-multiplicative exponential steps
/// `g <- g exp(sqrt(2 dt) sum xi_a E_a)`, with `E_ab = e_a e_b^T - e_b e_a^T`
/// for SO(d) and `E_a = i sqrt(2) lambda_a` (Gell-Mann) for SU(3), and are
/// re-projected onto the group every 100 steps. Hermitian and symmetric
/// matrices take additive Gaussian steps.
pub fn matrix_brownian_from(kind: MatrixKind, d: usize, start: &CMat, cfg: &SimConfig) -> Result<MatrixEnsemble> {
    check_kind(kind, d)?;
    cfg.validate()?;
    if start.nrows() != d || start.ncols() != d {
        return Err(Error::PointLength {
            got: start.nrows() * start.ncols(),
            expected: d * d,
        });
    }
    let hs = steps(cfg);
    let basis = gell_mann();
    let matrices = cfg.execution.map(cfg.n_paths, |i| match kind {
        MatrixKind::SOd => so_path(d, start, &hs, cfg.seed, i),
        MatrixKind::SU3 => su3_path(start, &hs, &basis, cfg.seed, i),
        _ => additive_path(kind, d, start, &hs, cfg.seed, i),
    });
    Ok(MatrixEnsemble {
        kind,
        d,
        time: cfg.t_final,
        dt: cfg.dt,
        seed: cfg.seed,
        matrices,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMap {
    CharpolyCoeffs,
    TraceSu3,
    SpectrumSorted,
    FirstColumnBlock { p: usize, q: usize },
}

/// Coefficients `a_0..a_{d-1}` of `det(X - M)` by Faddeev–LeVerrier.
fn charpoly(m: &CMat) -> Vec<Complex64> {
    let d = m.nrows();
    let id = CMat::identity(d, d);
    let mut c = vec![cx(0.0, 0.0); d + 1];
    c[d] = cx(1.0, 0.0);
    let mut mk = CMat::zeros(d, d);
    for k in 1..=d {
        mk = m * &mk + &id * c[d - k + 1];
        c[d - k] = -(m * &mk).trace() / (k as f64);
    }
    c.truncate(d);
    c
}

pub fn spectral_map(e: &MatrixEnsemble, map: SpectralMap) -> Result<EnsembleSample> {
    let incompatible = || Err(Error::Unsupported(format!("{map:?} on {}", e.kind.name())));
    let d = e.d;
    let (vars, points): (Vec<String>, Vec<Vec<f64>>) = match map {
        SpectralMap::CharpolyCoeffs => {
            if e.kind == MatrixKind::SU3 {
                return incompatible();
            }
            let pts = e.matrices.iter().map(|m| charpoly(m).iter().map(|z| z.re).collect()).collect();
            ((0..d).map(|i| format!("a{i}")).collect(), pts)
        }
        SpectralMap::TraceSu3 => {
            if e.kind != MatrixKind::SU3 {
                return incompatible();
            }
            let pts = e
                .matrices
                .iter()
                .map(|m| {
                    let z = m.trace() / 3.0;
                    vec![z.re, z.im]
                })
                .collect();
            (vec!["Z_re".into(), "Z_im".into()], pts)
        }
        SpectralMap::SpectrumSorted => {
            if !matches!(e.kind, MatrixKind::Hermitian | MatrixKind::Symmetric) {
                return incompatible();
            }
            let pts = e
                .matrices
                .iter()
                .map(|m| {
                    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
                    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    ev
                })
                .collect();
            ((1..=d).map(|i| format!("lambda{i}")).collect(), pts)
        }
        SpectralMap::FirstColumnBlock { p, q } => {
            if e.kind != MatrixKind::SOd || p == 0 || q == 0 || p > d || q > d {
                return incompatible();
            }
            let pts = e
                .matrices
                .iter()
                .map(|m| (0..p).flat_map(|i| (0..q).map(move |j| m[(i, j)].re)).collect())
                .collect();
            (
                (0..p).flat_map(|i| (0..q).map(move |j| format!("n{}{}", i + 1, j + 1))).collect(),
                pts,
            )
        }
    };
    Ok(EnsembleSample {
        label: format!("{} d={} {:?}", e.kind.name(), d, map),
        vars,
        time: e.time,
        dt: e.dt,
        seed: e.seed,
        points,
        rejected_step_count: 0,
        absorbed_count: 0,
    })
}

/// Values of the table variables at a matrix.
pub fn table_point(t: &MatrixTable, m: &CMat) -> Vec<Complex64> {
    t.entries
        .iter()
        .map(|e| {
            let v = m[(e.row, e.col)];
            if e.conj {
                v.conj()
            } else {
                v
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRow {
    pub monomial: String,
    /// `re` or `im`.
    pub part: String,
    /// Zero for the Richardson-extrapolated row.
    pub dt: f64,
    pub estimate: f64,
    pub target: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub kind: MatrixKind,
    pub d: usize,
    pub n_paths: usize,
    pub sigmas: f64,
    pub rows: Vec<GeneratorRow>,
    pub extrapolated: Vec<GeneratorRow>,
}

impl GeneratorReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&GeneratorRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn monomial_count(&self) -> usize {
        let mut m: Vec<&str> = self.rows.iter().map(|r| r.monomial.as_str()).collect();
        m.sort();
        m.dedup();
        m.len()
    }
}

fn degree_two_monomials(n: usize) -> Vec<Poly> {
    let mut out = vec![Poly::one(n)];
    out.extend((0..n).map(|i| Poly::var(n, i)));
    for i in 0..n {
        for j in i..n {
            out.push(&Poly::var(n, i) * &Poly::var(n, j));
        }
    }
    out
}

fn judge(est: f64, target: f64, se: f64, sigmas: f64) -> bool {
    (est - target).abs() <= sigmas * se + 1e-9 * (1.0 + target.abs())
}

/// One-step estimates `(E f(X_dt) - f(x0)) / dt` against `L(f)(x0)` from the
/// exact table, for every monomial of degree at most two in the entries,
/// starting at the identity.
pub fn generator_check(
    kind: MatrixKind,
    d: usize,
    n_paths: usize,
    dt_list: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<GeneratorReport> {
    let table = matrix_table(kind, d)?;
    let model = &table.model;
    let complex = !model.is_real_coordinates();
    let start = CMat::identity(d, d);
    let x0 = table_point(&table, &start);
    let monos = degree_two_monomials(model.nvars());
    let targets = monos
        .iter()
        .map(|f| Ok(l_apply(model, f)?.compile_complex().eval(&x0)))
        .collect::<Result<Vec<_>>>()?;
    let sigmas = 4.0;
    let mut rows = Vec::new();
    for (k, &dt) in dt_list.iter().enumerate() {
        let cfg = SimConfig::new(dt, dt, n_paths, seed.wrapping_add(k as u64)).with_execution(exec);
        let ens = matrix_brownian(kind, d, &cfg)?;
        let pts: Vec<Vec<Complex64>> = ens.matrices.iter().map(|m| table_point(&table, m)).collect();
        let per_mono = exec.map(monos.len(), |mi| {
            let f = monos[mi].compile_complex();
            let f0 = f.eval(&x0);
            let vals: Vec<Complex64> = pts.iter().map(|p| f.eval(p) - f0).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<Complex64>() / n;
            let var_re = vals.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let var_im = vals.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (mean / dt, (var_re / n).sqrt() / dt, (var_im / n).sqrt() / dt)
        });
        for (mi, (est, se_re, se_im)) in per_mono.into_iter().enumerate() {
            let name = crate::polyring::to_text(&monos[mi], &model.vars);
            let t = targets[mi];
            rows.push(GeneratorRow {
                monomial: name.clone(),
                part: "re".into(),
                dt,
                estimate: est.re,
                target: t.re,
                stderr: se_re,
                pass: judge(est.re, t.re, se_re, sigmas),
            });
            if complex {
                rows.push(GeneratorRow {
                    monomial: name,
                    part: "im".into(),
                    dt,
                    estimate: est.im,
                    target: t.im,
                    stderr: se_im,
                    pass: judge(est.im, t.im, se_im, sigmas),
                });
            }
        }
    }
    let mut extrapolated = Vec::new();
    if dt_list.len() == 2 {
        let (h1, h2) = (dt_list[0], dt_list[1]);
        let per = rows.len() / 2;
        for (a, b) in rows[..per].iter().zip(&rows[per..]) {
            let est = (h1 * b.estimate - h2 * a.estimate) / (h1 - h2);
            let se = ((h1 * b.stderr).powi(2) + (h2 * a.stderr).powi(2)).sqrt() / (h1 - h2).abs();
            extrapolated.push(GeneratorRow {
                monomial: a.monomial.clone(),
                part: a.part.clone(),
                dt: 0.0,
                estimate: est,
                target: a.target,
                stderr: se,
                pass: judge(est, a.target, se, sigmas),
            });
        }
    }
    Ok(GeneratorReport {
        kind,
        d,
        n_paths,
        sigmas,
        rows,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t: f64, dt: f64, n: usize) -> SimConfig {
        SimConfig::new(t, dt, n, 17)
    }

    #[test]
    fn gell_mann_normalisation() {
        // tr(lambda_a lambda_b) = 2 delta_ab and sum lambda_a^2 = 16/3 Id
        let b = gell_mann();
        let mut cas = CMat::zeros(3, 3);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let t = (x * y).trace();
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((t - cx(want, 0.0)).norm() < 1e-14);
            }
            cas += x * x;
        }
        assert!((cas - CMat::identity(3, 3) * cx(16.0 / 3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn group_members_stay_on_the_group() {
        let so = matrix_brownian(MatrixKind::SOd, 4, &cfg(0.3, 1e-3, 20)).unwrap();
        for m in &so.matrices {
            let o = m.map(|z| z.re);
            assert!((&o * o.transpose() - DMatrix::<f64>::identity(4, 4)).norm() < 1e-8);
        }
        let su = matrix_brownian(MatrixKind::SU3, 3, &cfg(0.3, 1e-3, 20)).unwrap();
        for g in &su.matrices {
            assert!((g * g.adjoint() - CMat::identity(3, 3)).norm() < 1e-8);
            assert!((g.determinant() - cx(1.0, 0.0)).norm() < 1e-8);
        }
        let h = matrix_brownian(MatrixKind::Hermitian, 3, &cfg(0.3, 1e-2, 5)).unwrap();
        assert!(h.matrices.iter().all(|m| m == &m.adjoint()));
        let s = matrix_brownian(MatrixKind::Symmetric, 3, &cfg(0.3, 1e-2, 5)).unwrap();
        assert!(s.matrices.iter().all(|m| m == &m.transpose() && m.iter().all(|z| z.im == 0.0)));
    }

    #[test]
    fn zero_time_is_identity() {
        let mut c = cfg(0.0, 1e-2, 3);
        c.t_final = 0.0;
        for (k, d) in [(MatrixKind::SOd, 3), (MatrixKind::SU3, 3), (MatrixKind::Hermitian, 2)] {
            let e = matrix_brownian(k, d, &c).unwrap();
            assert!(e.matrices.iter().all(|m| m == &CMat::identity(d, d)));
        }
        let su = matrix_brownian(MatrixKind::SU3, 3, &c).unwrap();
        let z = spectral_map(&su, SpectralMap::TraceSu3).unwrap();
        assert_eq!(z.points[0], vec![1.0, 0.0]);
        let h = matrix_brownian(MatrixKind::Hermitian, 3, &c).unwrap();
        // (X - 1)^3 = X^3 - 3X^2 + 3X - 1
        let a = spectral_map(&h, SpectralMap::CharpolyCoeffs).unwrap();
        assert_eq!(a.points[0], vec![-1.0, 3.0, -3.0]);
    }

    #[test]
    fn incompatible_maps_and_kinds() {
        let c = cfg(0.01, 1e-2, 2);
        assert!(matrix_brownian(MatrixKind::SU3, 4, &c).is_err());
        let su = matrix_brownian(MatrixKind::SU3, 3, &c).unwrap();
        assert!(spectral_map(&su, SpectralMap::SpectrumSorted).is_err());
        assert!(spectral_map(&su, SpectralMap::CharpolyCoeffs).is_err());
        let so = matrix_brownian(MatrixKind::SOd, 3, &c).unwrap();
        assert!(spectral_map(&so, SpectralMap::TraceSu3).is_err());
        assert_eq!(spectral_map(&so, SpectralMap::FirstColumnBlock { p: 1, q: 2 }).unwrap().points[0].len(), 2);
    }

    #[test]
    fn symmetric_diagonal_variance() {
        let e = matrix_brownian(MatrixKind::Symmetric, 2, &cfg(0.5, 0.05, 40_000)).unwrap();
        let v: Vec<f64> = e.matrices.iter().map(|m| m[(0, 0)].re - 1.0).collect();
        let n = v.len() as f64;
        let var = v.iter().map(|x| x * x).sum::<f64>() / n;
        // Var of x^2 for a centred Gaussian is 2 var^2
        let se = (2.0f64).sqrt() * 1.0 / n.sqrt();
        assert!((var - 1.0).abs() < 3.0 * se, "{var}");
    }

    #[test]
    fn charpoly_matches_eigenvalues() {
        let m = CMat::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0].map(|v| cx(v, 0.0)));
        let c = charpoly(&m);
        let ev = m.clone().symmetric_eigen().eigenvalues;
        for l in ev.iter() {
            let p = c[0] + c[1] * *l + c[2] * l * l + l * l * l;
            assert!(p.norm() < 1e-10);
        }
    }

    #[test]
    fn small_generator_check_passes() {
        let r = generator_check(MatrixKind::SOd, 3, 20_000, &[1e-3], 5, Execution::Parallel).unwrap();
        assert_eq!(r.monomial_count(), 1 + 9 + 45);
        assert!(r.all_pass(), "{:?}", r.failures());
        let c = r.rows.iter().find(|r| r.monomial == "1").unwrap();
        assert_eq!((c.estimate, c.target), (0.0, 0.0));
    }
}
