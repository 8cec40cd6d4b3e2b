//! Conditioning a finite Markov chain to stay in a subset: Perron ground
//! state of the restricted kernel, the Doob matrix, and brute-force path laws.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

pub const MAX_ITER: usize = 1_000_000;
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const MAX_PATHS: f64 = 1e7;

/// A square Markov kernel with rows summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
    pub row_sums: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        square(&entries)?;
        for (i, row) in entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(Error::Invalid(format!("entry ({i},{j}) = {v} is negative")));
                }
            }
        }
        let row_sums: Vec<f64> = entries.iter().map(|r| r.iter().sum()).collect();
        if let Some((i, s)) = row_sums.iter().enumerate().find(|(_, s)| (*s - 1.0).abs() > 1e-12) {
            return Err(Error::Invalid(format!("row {i} sums to {s}")));
        }
        Ok(StochasticMatrix { n, entries, row_sums })
    }

    /// Rows and columns indexed by `a`.
    pub fn restrict(&self, a: &[usize]) -> Result<Vec<Vec<f64>>> {
        check_subset(self.n, a)?;
        Ok(a.iter().map(|&i| a.iter().map(|&j| self.entries[i][j]).collect()).collect())
    }

    /// A random kernel on `n` states with entries bounded below by `floor`
    /// before row normalisation.
    pub fn random(n: usize, floor: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..n)
            .map(|_| {
                let row: Vec<f64> = (0..n).map(|_| floor + rng.gen::<f64>()).collect();
                let s: f64 = row.iter().sum();
                row.into_iter().map(|v| v / s).collect()
            })
            .collect::<Vec<Vec<f64>>>();
        let row_sums = entries.iter().map(|r: &Vec<f64>| r.iter().sum()).collect();
        StochasticMatrix { n, entries, row_sums }
    }
}

fn square(m: &[Vec<f64>]) -> Result<()> {
    let rows = m.len();
    if rows == 0 {
        return Err(Error::Invalid("empty matrix".into()));
    }
    match m.iter().position(|r| r.len() != rows) {
        Some(row) => Err(Error::NonSquare {
            rows,
            row,
            cols: m[row].len(),
        }),
        None => Ok(()),
    }
}

fn check_subset(n: usize, a: &[usize]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Invalid("empty subset".into()));
    }
    let mut seen = vec![false; n];
    for &i in a {
        if i >= n || seen[i] {
            return Err(Error::Invalid(format!("bad subset index {i}")));
        }
        seen[i] = true;
    }
    Ok(())
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub mu0: f64,
    /// Positive, largest entry equal to one.
    pub v0: Vec<f64>,
    pub iterations: usize,
}

/// Perron eigenpair of an entrywise positive square matrix by power iteration.
pub fn perron_ground_state(pa: &[Vec<f64>]) -> Result<GroundState> {
    let n = pa.len();
    square(pa)?;
    for (i, r) in pa.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NonPositiveEntry(i, j));
            }
        }
    }
    let mut v = vec![1.0; n];
    for it in 1..=MAX_ITER {
        let w = mat_vec(pa, &v);
        let mu = w.iter().cloned().fold(f64::MIN, f64::max);
        let next: Vec<f64> = w.iter().map(|x| x / mu).collect();
        let pv = mat_vec(pa, &next);
        let mu_next = pv.iter().cloned().fold(f64::MIN, f64::max);
        let resid = pv
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - mu_next * b).abs())
            .fold(0.0, f64::max);
        v = next;
        if resid < RESIDUAL_TOL {
            return Ok(GroundState {
                mu0: mu_next,
                v0: v,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence(MAX_ITER))
}

/// `Q(x,y) = V0(y) P(x,y) / (mu0 V0(x))` on the restricted index set.
pub fn doob_matrix(pa: &[Vec<f64>]) -> Result<StochasticMatrix> {
    let gs = perron_ground_state(pa)?;
    let n = pa.len();
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|x| (0..n).map(|y| gs.v0[y] * pa[x][y] / (gs.mu0 * gs.v0[x])).collect())
        .collect();
    // absorb the eigen-residual so rows sum to one up to rounding
    for row in &mut q {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    StochasticMatrix::new(q)
}

/// A distribution over finite state sequences.
pub type PathLaw = BTreeMap<Vec<usize>, f64>;

/// Law of `(X_0, .., X_n)` given `X_1, .., X_N` all in `a`, by enumerating
/// every length-`N` path that stays in `a`. Paths are reported in the
/// original state labels.
pub fn conditioned_path_law(
    p: &StochasticMatrix,
    a: &[usize],
    x0: usize,
    n: usize,
    big_n: usize,
    exec: Execution,
) -> Result<PathLaw> {
    check_subset(p.n, a)?;
    if !a.contains(&x0) {
        return Err(Error::Invalid(format!("x0 = {x0} is not in the subset")));
    }
    if n > big_n {
        return Err(Error::Invalid(format!("n = {n} exceeds N = {big_n}")));
    }
    let count = (a.len() as f64).powi(big_n as i32);
    if count > MAX_PATHS {
        return Err(Error::Infeasible(count));
    }
    let k = a.len();
    // shard on the first `depth` steps
    let depth = big_n.min(3);
    let shards = k.pow(depth as u32);
    let parts = exec.map(shards, |s| {
        let mut path = Vec::with_capacity(big_n + 1);
        path.push(x0);
        let mut w = 1.0;
        let mut code = s;
        let mut digits = vec![0; depth];
        for d in (0..depth).rev() {
            digits[d] = code % k;
            code /= k;
        }
        for &dg in &digits {
            let next = a[dg];
            w *= p.entries[*path.last().unwrap()][next];
            path.push(next);
        }
        let mut local = PathLaw::new();
        enumerate(p, a, &mut path, w, big_n, n, &mut local);
        local
    });
    let mut law = PathLaw::new();
    for part in parts {
        for (k, v) in part {
            *law.entry(k).or_insert(0.0) += v;
        }
    }
    normalise(law)
}

fn enumerate(p: &StochasticMatrix, a: &[usize], path: &mut Vec<usize>, w: f64, big_n: usize, n: usize, out: &mut PathLaw) {
    if path.len() == big_n + 1 {
        *out.entry(path[..=n].to_vec()).or_insert(0.0) += w;
        return;
    }
    let last = *path.last().unwrap();
    for &y in a {
        path.push(y);
        enumerate(p, a, path, w * p.entries[last][y], big_n, n, out);
        path.pop();
    }
}

fn normalise(law: PathLaw) -> Result<PathLaw> {
    let z: f64 = law.values().sum();
    if !(z > 0.0) {
        return Err(Error::Invalid("the conditioning event has probability zero".into()));
    }
    Ok(law.into_iter().map(|(k, v)| (k, v / z)).collect())
}

/// Law of `(X_0, .., X_n)` under the Doob chain `q` indexed by `a`.
pub fn q_chain_law(q: &StochasticMatrix, a: &[usize], x0: usize, n: usize) -> Result<PathLaw> {
    let start = a
        .iter()
        .position(|&s| s == x0)
        .ok_or_else(|| Error::Invalid(format!("x0 = {x0} is not in the subset")))?;
    let mut law: Vec<(Vec<usize>, f64)> = vec![(vec![start], 1.0)];
    for _ in 0..n {
        law = law
            .into_iter()
            .flat_map(|(path, w)| {
                let last = *path.last().unwrap();
                (0..a.len()).map(move |y| {
                    let mut p = path.clone();
                    p.push(y);
                    (p, w * q.entries[last][y])
                })
            })
            .collect();
    }
    Ok(law
        .into_iter()
        .map(|(path, w)| (path.into_iter().map(|i| a[i]).collect(), w))
        .collect())
}

pub fn tv_distance(p: &PathLaw, q: &PathLaw) -> f64 {
    let mut s = 0.0;
    for (k, v) in p {
        s += (v - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, v) in q {
        if !p.contains_key(k) {
            s += v.abs();
        }
    }
    s / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub subset: Vec<usize>,
    pub x0: usize,
    pub n: usize,
    pub big_n: usize,
    pub ground_state: GroundState,
    pub q: Vec<Vec<f64>>,
    pub law: Vec<(Vec<usize>, f64)>,
    pub tv_to_q_chain: f64,
}

pub fn condition(p: &StochasticMatrix, a: &[usize], x0: usize, n: usize, big_n: usize, exec: Execution) -> Result<ConditionReport> {
    let pa = p.restrict(a)?;
    let ground_state = perron_ground_state(&pa)?;
    let q = doob_matrix(&pa)?;
    let law = conditioned_path_law(p, a, x0, n, big_n, exec)?;
    let ql = q_chain_law(&q, a, x0, n)?;
    Ok(ConditionReport {
        subset: a.to_vec(),
        x0,
        n,
        big_n,
        ground_state,
        tv_to_q_chain: tv_distance(&law, &ql),
        q: q.entries,
        law: law.into_iter().collect(),
    })
}

/// TV distance to the Doob chain law for each conditioning horizon.
pub fn tv_sequence(
    p: &StochasticMatrix,
    a: &[usize],
    x0: usize,
    n: usize,
    horizons: &[usize],
    exec: Execution,
) -> Result<Vec<(usize, f64)>> {
    let q = doob_matrix(&p.restrict(a)?)?;
    let ql = q_chain_law(&q, a, x0, n)?;
    horizons
        .iter()
        .map(|&big_n| Ok((big_n, tv_distance(&conditioned_path_law(p, a, x0, n, big_n, exec)?, &ql))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constant_block() {
        let pa = vec![vec![0.25, 0.25], vec![0.25, 0.25]];
        let gs = perron_ground_state(&pa).unwrap();
        assert!(close(gs.mu0, 0.5, 1e-12));
        assert_eq!(gs.v0, vec![1.0, 1.0]);
        let q = doob_matrix(&pa).unwrap();
        assert_eq!(q.entries, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn two_by_two_perron_value() {
        let pa = vec![vec![0.5, 0.25], vec![0.25, 0.25]];
        let gs = perron_ground_state(&pa).unwrap();
        assert!(close(gs.mu0, (3.0 + 5f64.sqrt()) / 8.0, 1e-12));
        let pv = mat_vec(&pa, &gs.v0);
        assert!(pv.iter().zip(&gs.v0).all(|(a, b)| close(*a, gs.mu0 * b, 1e-10)));
    }

    #[test]
    fn scaling_and_rejections() {
        let pa = vec![vec![0.1, 0.3, 0.2], vec![0.2, 0.2, 0.4], vec![0.05, 0.1, 0.6]];
        let gs = perron_ground_state(&pa).unwrap();
        let scaled: Vec<Vec<f64>> = pa.iter().map(|r| r.iter().map(|v| v * 0.5).collect()).collect();
        let gs2 = perron_ground_state(&scaled).unwrap();
        assert!(close(gs2.mu0, 0.5 * gs.mu0, 1e-12));
        assert!(gs.v0.iter().zip(&gs2.v0).all(|(a, b)| close(*a, *b, 1e-10)));
        let q1 = doob_matrix(&pa).unwrap();
        let q2 = doob_matrix(&scaled).unwrap();
        for (r1, r2) in q1.entries.iter().zip(&q2.entries) {
            assert!(r1.iter().zip(r2).all(|(a, b)| close(*a, *b, 1e-10)));
        }
        assert!(matches!(perron_ground_state(&[vec![0.0, 1.0], vec![1.0, 1.0]]), Err(Error::NonPositiveEntry(0, 0))));
        assert!(StochasticMatrix::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn perron_value_matches_dense_eigen() {
        for seed in 0..5 {
            let p = StochasticMatrix::random(4, 0.1, seed);
            let pa = p.restrict(&[0, 1, 2]).unwrap();
            let gs = perron_ground_state(&pa).unwrap();
            let m = DMatrix::from_fn(3, 3, |i, j| pa[i][j]);
            let top = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(close(gs.mu0, top, 1e-10));
            let q = doob_matrix(&pa).unwrap();
            assert!(q.row_sums.iter().all(|s| close(*s, 1.0, 1e-12)));
            assert!(q.entries.iter().flatten().all(|v| *v >= 0.0));
        }
    }

    /// Independent route: survival probabilities `h_k = P_A^k 1`, and the
    /// conditioned law is `prod P * h_{N-n}(x_n) / h_N(x_0)`.
    #[test]
    fn enumeration_matches_survival_recursion() {
        let p = StochasticMatrix::random(4, 0.1, 42);
        let a = [0usize, 1, 2];
        let pa = p.restrict(&a).unwrap();
        let (n, big_n) = (2, 6);
        let mut h = vec![vec![1.0; 3]];
        for k in 1..=big_n {
            h.push(mat_vec(&pa, &h[k - 1]));
        }
        let law = conditioned_path_law(&p, &a, 1, n, big_n, Execution::Sequential).unwrap();
        for (path, prob) in &law {
            let w: f64 = path.windows(2).map(|s| p.entries[s[0]][s[1]]).product();
            let oracle = w * h[big_n - n][path[n]] / h[big_n][1];
            assert!(close(*prob, oracle, 1e-12), "{path:?}");
        }
        let par = conditioned_path_law(&p, &a, 1, n, big_n, Execution::Parallel).unwrap();
        assert!(tv_distance(&law, &par) < 1e-14);
    }

    #[test]
    fn trivial_horizons() {
        let p = StochasticMatrix::random(4, 0.1, 7);
        let a = [0usize, 1, 2];
        let law = conditioned_path_law(&p, &a, 2, 0, 5, Execution::Sequential).unwrap();
        assert_eq!(law.len(), 1);
        assert!(close(law[&vec![2]], 1.0, 1e-12));
        let flat = StochasticMatrix::new(vec![vec![0.25; 4]; 4]).unwrap();
        let law = conditioned_path_law(&flat, &a, 0, 3, 5, Execution::Sequential).unwrap();
        assert!(law.values().all(|v| close(*v, 1.0 / 27.0, 1e-12)));
        assert!(matches!(
            conditioned_path_law(&flat, &a, 0, 3, 20, Execution::Sequential),
            Err(Error::Infeasible(_))
        ));
        assert!(conditioned_path_law(&flat, &a, 3, 1, 2, Execution::Sequential).is_err());
    }

    #[test]
    fn tv_decays_at_the_spectral_gap_rate() {
        for seed in 0..5 {
            let p = StochasticMatrix::random(4, 0.1, 100 + seed);
            let a = [0usize, 1, 2];
            let pa = p.restrict(&a).unwrap();
            let m = DMatrix::from_fn(3, 3, |i, j| pa[i][j]);
            let mut mods: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
            mods.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let ratio = mods[1] / mods[0];
            let seq = tv_sequence(&p, &a, 0, 2, &[4, 6, 8, 10], Execution::Parallel).unwrap();
            let c = seq[0].1 / ratio.powi(2);
            for w in seq.windows(2) {
                assert!(w[1].1 < w[0].1, "seed {seed}: {seq:?}");
            }
            for (big_n, tv) in &seq {
                assert!(*tv <= 2.0 * c * ratio.powi(*big_n as i32 - 2) + 1e-14, "seed {seed}: {seq:?}");
            }
        }
    }
}
