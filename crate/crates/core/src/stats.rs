//! Two-sample comparisons: Kolmogorov–Smirnov, energy distance with a
//! permutation null, and raw-moment z-scores.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Points per sample kept by the energy statistic.
pub const ENERGY_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Ks,
    Energy,
    Moment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub kind: StatKind,
    pub label: String,
    pub value: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub threshold: f64,
    pub pass: bool,
}

impl ComparisonReport {
    /// Passes when `value < threshold`.
    pub fn new(kind: StatKind, label: impl Into<String>, value: f64, n_a: usize, n_b: usize, threshold: f64) -> Self {
        ComparisonReport {
            kind,
            label: label.into(),
            value,
            n_a,
            n_b,
            threshold,
            pass: value < threshold,
        }
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// Largest gap between the two empirical distribution functions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

fn check_points(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let k = a[0].len();
    if a.iter().chain(b).any(|p| p.len() != k) {
        return Err(Error::PointLength {
            got: b[0].len(),
            expected: k,
        });
    }
    Ok(k)
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn cap(v: &[Vec<f64>]) -> &[Vec<f64>] {
    &v[..v.len().min(ENERGY_CAP)]
}

/// `2 E|X - Y| - E|X - X'| - E|Y - Y'|` over all pairs (V-statistic, so it
/// is nonnegative), on at most [`ENERGY_CAP`] points of each sample.
pub fn energy_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check_points(a, b)?;
    let (a, b) = (cap(a), cap(b));
    let mean = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter().map(|p| y.iter().map(|q| dist(p, q)).sum::<f64>()).sum::<f64>() / (x.len() * y.len()) as f64
    };
    Ok((2.0 * mean(a, b) - mean(a, a) - mean(b, b)).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub statistic: f64,
    pub quantile: f64,
    pub level: f64,
    pub p_value: f64,
    pub permutations: usize,
}

impl PermutationTest {
    pub fn pass(&self) -> bool {
        self.statistic < self.quantile
    }
}

/// Energy distance against its permutation null, reporting the `level`
/// quantile of the permuted statistics.
pub fn energy_permutation_test(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    permutations: usize,
    level: f64,
    seed: u64,
    exec: Execution,
) -> Result<PermutationTest> {
    check_points(a, b)?;
    let (a, b) = (cap(a), cap(b));
    let pooled: Vec<&Vec<f64>> = a.iter().chain(b).collect();
    let n = pooled.len();
    let (na, nb) = (a.len(), b.len());
    // packed strict upper triangle, row i holds j > i
    let offsets: Vec<usize> = (0..n).scan(0, |acc, i| {
        let o = *acc;
        *acc += n - 1 - i;
        Some(o)
    }).collect();
    let rows: Vec<Vec<f32>> = exec.map(n, |i| ((i + 1)..n).map(|j| dist(pooled[i], pooled[j]) as f32).collect());
    let tri: Vec<f32> = rows.into_iter().flatten().collect();
    let totals: Vec<f64> = (0..n)
        .map(|i| tri[offsets[i]..offsets[i] + n - 1 - i].iter().map(|&v| v as f64).sum())
        .collect();
    let stat = |in_b: &[f32]| -> f64 {
        let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let row = &tri[offsets[i]..offsets[i] + n - 1 - i];
            let to_b: f64 = row.iter().zip(&in_b[i + 1..]).map(|(d, l)| d * l).sum::<f32>() as f64;
            if in_b[i] > 0.5 {
                bb += to_b;
                ab += totals[i] - to_b;
            } else {
                ab += to_b;
                aa += totals[i] - to_b;
            }
        }
        let (fa, fb) = (na as f64, nb as f64);
        2.0 * ab / (fa * fb) - 2.0 * aa / (fa * fa) - 2.0 * bb / (fb * fb)
    };
    let labels: Vec<f32> = (0..n).map(|i| if i < na { 0.0 } else { 1.0 }).collect();
    let observed = stat(&labels);
    let null = exec.map(permutations, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut l = labels.clone();
        l.shuffle(&mut rng);
        stat(&l)
    });
    let mut sorted_null = null.clone();
    sorted_null.sort_by(|x, y| x.total_cmp(y));
    let idx = ((level * permutations as f64).ceil() as usize).clamp(1, permutations) - 1;
    let exceed = null.iter().filter(|&&v| v >= observed).count();
    Ok(PermutationTest {
        statistic: observed.max(0.0),
        quantile: sorted_null[idx],
        level,
        p_value: (exceed + 1) as f64 / (permutations + 1) as f64,
        permutations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub order: u32,
    pub mean_a: f64,
    pub mean_b: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub report: ComparisonReport,
}

/// Raw moments of orders `1..=max_order` (at most 4), each difference divided
/// by its pooled standard error. The summary value is the largest `|z|`,
/// compared against `threshold`.
pub fn moment_report(a: &[f64], b: &[f64], max_order: u32, threshold: f64) -> Result<MomentReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(1..=4).contains(&max_order) {
        return Err(Error::Invalid(format!("moment order {max_order} is not in 1..=4")));
    }
    let stats = |v: &[f64], k: i32| {
        let n = v.len() as f64;
        let m = v.iter().map(|x| x.powi(k)).sum::<f64>() / n;
        let var = v.iter().map(|x| (x.powi(k) - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (m, var / n)
    };
    let rows: Vec<MomentRow> = (1..=max_order)
        .map(|k| {
            let (ma, va) = stats(a, k as i32);
            let (mb, vb) = stats(b, k as i32);
            let se = (va + vb).sqrt();
            let diff = ma - mb;
            let z = if diff == 0.0 { 0.0 } else { diff / se };
            MomentRow {
                order: k,
                mean_a: ma,
                mean_b: mb,
                z,
            }
        })
        .collect();
    let worst = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    Ok(MomentReport {
        report: ComparisonReport::new(StatKind::Moment, "raw moments", worst, a.len(), b.len(), threshold),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn uniform(n: usize, seed: u64) -> Vec<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| r.gen()).collect()
    }

    /// Brute force: evaluate both distribution functions at every sample point.
    fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |v: &[f64], x: f64| v.iter().filter(|&&y| y <= x).count() as f64 / v.len() as f64;
        a.iter().chain(b).map(|&x| (cdf(a, x) - cdf(b, x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn ks_examples() {
        let a = uniform(500, 1);
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 2.0).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap(), 1.0);
        let (u, v) = (uniform(10_000, 2), uniform(10_000, 3));
        assert!(ks_two_sample(&u, &v).unwrap() < 0.03);
        assert!(matches!(ks_two_sample(&[], &a), Err(Error::EmptySample)));
    }

    #[test]
    fn energy_examples() {
        let a = vec![vec![0.0, 0.0]; 10];
        let b = vec![vec![1.0, 0.0]; 7];
        assert_eq!(energy_distance(&a, &a).unwrap(), 0.0);
        assert!((energy_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_null_for_equal_laws() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let mut g = || -> Vec<Vec<f64>> {
            (0..2000)
                .map(|_| vec![r.sample(StandardNormal), r.sample(StandardNormal)])
                .collect()
        };
        let (a, b) = (g(), g());
        let t = energy_permutation_test(&a, &b, 200, 0.99, 9, Execution::Parallel).unwrap();
        assert!(t.pass(), "{t:?}");
        assert!((t.statistic - energy_distance(&a, &b).unwrap()).abs() < 1e-4);
        let shifted: Vec<Vec<f64>> = b.iter().map(|p| vec![p[0] + 0.5, p[1]]).collect();
        let t = energy_permutation_test(&a, &shifted, 200, 0.99, 9, Execution::Parallel).unwrap();
        assert!(!t.pass());
    }

    #[test]
    fn moment_examples() {
        let a = uniform(1000, 5);
        let r = moment_report(&a, &a, 4, 4.0).unwrap();
        assert!(r.rows.iter().all(|row| row.z == 0.0));
        let shifted: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let r = moment_report(&a, &shifted, 4, 4.0).unwrap();
        assert!(r.rows[0].z.abs() > 4.0 && !r.report.pass);
    }

    #[test]
    fn ou_stationary_law_is_standard_gaussian() {
        use crate::models::ou;
        use crate::simkit::{sde_paths, SimConfig};
        let s = sde_paths(&ou(1).unwrap(), &[0.0], &SimConfig::new(6.0, 1e-2, 20_000, 8)).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let g: Vec<f64> = (0..20_000).map(|_| r.sample(StandardNormal)).collect();
        let rep = moment_report(&s.column(0), &g, 4, 4.0).unwrap();
        assert!(rep.report.pass, "{:?}", rep.rows);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ks_agrees_with_brute_force(a in prop::collection::vec(-5i32..5, 1..40), b in prop::collection::vec(-5i32..5, 1..40)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let d = ks_two_sample(&a, &b).unwrap();
            prop_assert!((d - ks_oracle(&a, &b)).abs() < 1e-12);
            prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
            let ea: Vec<f64> = a.iter().map(|x| x.exp()).collect();
            let eb: Vec<f64> = b.iter().map(|x| x.exp()).collect();
            prop_assert!((ks_two_sample(&ea, &eb).unwrap() - d).abs() < 1e-12);
        }

        #[test]
        fn energy_is_nonnegative(a in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..20),
                                 b in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..20)) {
            let a: Vec<Vec<f64>> = a.into_iter().map(|(x, y)| vec![x, y]).collect();
            let b: Vec<Vec<f64>> = b.into_iter().map(|(x, y)| vec![x, y]).collect();
            prop_assert!(energy_distance(&a, &b).unwrap() >= 0.0);
        }
    }
}
