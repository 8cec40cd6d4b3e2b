//! Conjugate-pair coordinates.
//!
//! A coordinate system may contain pairs `(Z, Zb)` standing for `Z = U + iV`
//! and its conjugate, treated as independent variables. Carré du champ
//! entries and drifts transform linearly under `U = (Z + Zb)/2`,
//! `V = (Z - Zb)/(2i)`.

use serde::{Deserialize, Serialize};

use super::gauss::{rat, GaussRat};
use super::poly::Poly;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Real,
    /// Conjugate partner of the variable at this index.
    Conj(usize),
}

pub fn validate_kinds(kinds: &[VarKind]) -> Result<()> {
    for (i, k) in kinds.iter().enumerate() {
        if let VarKind::Conj(j) = *k {
            if j >= kinds.len() || j == i || kinds[j] != VarKind::Conj(i) {
                return Err(Error::ConjugateSymmetry(format!(
                    "variable {i} names partner {j}, which does not point back"
                )));
            }
        }
    }
    Ok(())
}

pub fn partner_perm(kinds: &[VarKind]) -> Vec<usize> {
    kinds
        .iter()
        .enumerate()
        .map(|(i, k)| match k {
            VarKind::Real => i,
            VarKind::Conj(j) => *j,
        })
        .collect()
}

pub fn has_pairs(kinds: &[VarKind]) -> bool {
    kinds.iter().any(|k| matches!(k, VarKind::Conj(_)))
}

/// Coordinate conjugation: conjugate coefficients and swap each pair.
pub fn conjugate(p: &Poly, kinds: &[VarKind]) -> Poly {
    p.conj_coeffs().permute_vars(&partner_perm(kinds))
}

/// Check that the data is invariant under coordinate conjugation.
pub fn check_conjugate_symmetry(kinds: &[VarKind], gamma: &[Vec<Poly>], drift: &[Poly]) -> Result<()> {
    validate_kinds(kinds)?;
    let perm = partner_perm(kinds);
    for i in 0..kinds.len() {
        if conjugate(&drift[i], kinds) != drift[perm[i]] {
            return Err(Error::ConjugateSymmetry(format!(
                "conj(L(x{i})) != L(x{})",
                perm[i]
            )));
        }
        for j in 0..kinds.len() {
            if conjugate(&gamma[i][j], kinds) != gamma[perm[i]][perm[j]] {
                return Err(Error::ConjugateSymmetry(format!(
                    "conj(Gamma({i},{j})) != Gamma({},{})",
                    perm[i], perm[j]
                )));
            }
        }
    }
    Ok(())
}

/// Matrix `A` with `y = A x`, `y` real coordinates and `x` the original ones.
/// A pair `(i, j)`, `i < j`, maps to `U` at slot `i` and `V` at slot `j`.
fn forward_matrix(kinds: &[VarKind]) -> Vec<Vec<GaussRat>> {
    let n = kinds.len();
    let half = GaussRat::ratio(1, 2);
    let mut a = vec![vec![GaussRat::zero(); n]; n];
    for (i, k) in kinds.iter().enumerate() {
        match *k {
            VarKind::Real => a[i][i] = GaussRat::one(),
            VarKind::Conj(j) if i < j => {
                // U = (Z + Zb)/2, V = (Z - Zb)/(2i) = -i/2 Z + i/2 Zb
                a[i][i] = half.clone();
                a[i][j] = half.clone();
                a[j][i] = GaussRat::new(rat(0, 1), rat(-1, 2));
                a[j][j] = GaussRat::new(rat(0, 1), rat(1, 2));
            }
            VarKind::Conj(_) => {}
        }
    }
    a
}

fn inverse_matrix(kinds: &[VarKind]) -> Vec<Vec<GaussRat>> {
    let n = kinds.len();
    let mut a = vec![vec![GaussRat::zero(); n]; n];
    for (i, k) in kinds.iter().enumerate() {
        match *k {
            VarKind::Real => a[i][i] = GaussRat::one(),
            VarKind::Conj(j) if i < j => {
                // Z = U + iV, Zb = U - iV
                a[i][i] = GaussRat::one();
                a[i][j] = GaussRat::i();
                a[j][i] = GaussRat::one();
                a[j][j] = -GaussRat::i();
            }
            VarKind::Conj(_) => {}
        }
    }
    a
}

fn linear_images(a: &[Vec<GaussRat>]) -> Vec<Poly> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n).fold(Poly::zero(n), |acc, k| {
                &acc + &Poly::var(n, k).scale(&a[i][k])
            })
        })
        .collect()
}

/// Images of the original coordinates written in real coordinates
/// (`Z -> U + iV`, `Zb -> U - iV`). Use with [`Poly::compose`].
pub fn substitution_to_real(kinds: &[VarKind]) -> Vec<Poly> {
    linear_images(&inverse_matrix(kinds))
}

/// Images of the real coordinates written in the original ones.
pub fn substitution_from_real(kinds: &[VarKind]) -> Vec<Poly> {
    linear_images(&forward_matrix(kinds))
}

fn transform(
    a: &[Vec<GaussRat>],
    subst: &[Poly],
    gamma: &[Vec<Poly>],
    drift: &[Poly],
) -> Result<(Vec<Vec<Poly>>, Vec<Poly>)> {
    let n = a.len();
    let mut g_out = vec![vec![Poly::zero(n); n]; n];
    let mut b_out = vec![Poly::zero(n); n];
    for p in 0..n {
        let mut b = Poly::zero(n);
        for k in 0..n {
            if !a[p][k].is_zero() {
                b = &b + &drift[k].scale(&a[p][k]);
            }
        }
        b_out[p] = b.compose(subst)?;
        for q in 0..n {
            let mut g = Poly::zero(n);
            for k in 0..n {
                if a[p][k].is_zero() {
                    continue;
                }
                for l in 0..n {
                    if a[q][l].is_zero() {
                        continue;
                    }
                    g = &g + &gamma[k][l].scale(&(&a[p][k] * &a[q][l]));
                }
            }
            g_out[p][q] = g.compose(subst)?;
        }
    }
    Ok((g_out, b_out))
}

/// Rewrite Gamma and drift from conjugate-pair coordinates into real ones.
/// The result has real coefficients whenever the input is conjugation
/// symmetric; a violation is reported otherwise.
pub fn complex_to_real(
    kinds: &[VarKind],
    gamma: &[Vec<Poly>],
    drift: &[Poly],
) -> Result<(Vec<Vec<Poly>>, Vec<Poly>)> {
    check_conjugate_symmetry(kinds, gamma, drift)?;
    let (g, b) = transform(&forward_matrix(kinds), &substitution_to_real(kinds), gamma, drift)?;
    for (i, row) in g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if !e.is_real() {
                return Err(Error::ConjugateSymmetry(format!("real Gamma({i},{j}) is not real")));
            }
        }
    }
    if let Some(i) = b.iter().position(|p| !p.is_real()) {
        return Err(Error::ConjugateSymmetry(format!("real drift {i} is not real")));
    }
    Ok((g, b))
}

/// Inverse of [`complex_to_real`].
pub fn real_to_complex(
    kinds: &[VarKind],
    gamma: &[Vec<Poly>],
    drift: &[Poly],
) -> Result<(Vec<Vec<Poly>>, Vec<Poly>)> {
    validate_kinds(kinds)?;
    transform(&inverse_matrix(kinds), &substitution_from_real(kinds), gamma, drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse::parse_poly;

    fn zpair() -> (Vec<VarKind>, Vec<String>) {
        (
            vec![VarKind::Conj(1), VarKind::Conj(0)],
            vec!["Z".into(), "Zb".into()],
        )
    }

    #[test]
    fn planar_brownian_motion() {
        let (k, n) = zpair();
        let p = |s: &str| parse_poly(s, &n).unwrap();
        let gamma = vec![vec![p("0"), p("1")], vec![p("1"), p("0")]];
        let drift = vec![p("-Z"), p("-Zb")];
        let (g, b) = complex_to_real(&k, &gamma, &drift).unwrap();
        let r = ["U".to_string(), "V".to_string()];
        let q = |s: &str| parse_poly(s, &r).unwrap();
        assert_eq!(g[0][0], q("1/2"));
        assert_eq!(g[1][1], q("1/2"));
        assert_eq!(g[0][1], q("0"));
        assert_eq!(b, vec![q("-U"), q("-V")]);
        let (g2, b2) = real_to_complex(&k, &g, &b).unwrap();
        assert_eq!(g2, gamma);
        assert_eq!(b2, drift);
    }

    #[test]
    fn deltoid_determinant_is_real() {
        let (k, n) = zpair();
        let p = |s: &str| parse_poly(s, &n).unwrap();
        let gamma = vec![
            vec![p("Zb - Z^2"), p("1/2 - 1/2*Z*Zb")],
            vec![p("1/2 - 1/2*Z*Zb"), p("Z - Zb^2")],
        ];
        let drift = vec![p("-Z"), p("-Zb")];
        let (g, _) = complex_to_real(&k, &gamma, &drift).unwrap();
        let det_real = &(&g[0][0] * &g[1][1]) - &(&g[0][1] * &g[0][1]);
        // D(Z, Zb) = Gamma(Z,Zb)^2 - Gamma(Z,Z) Gamma(Zb,Zb); real det = D / 4.
        let d = &(&gamma[0][1] * &gamma[0][1]) - &(&gamma[0][0] * &gamma[1][1]);
        let d_real = d.compose(&substitution_to_real(&k)).unwrap();
        assert_eq!(det_real, d_real.scale(&GaussRat::ratio(1, 4)));
        assert!(det_real.is_real());
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let (k, n) = zpair();
        let p = |s: &str| parse_poly(s, &n).unwrap();
        let gamma = vec![vec![p("Zb"), p("1")], vec![p("1"), p("Z + 1")]];
        let drift = vec![p("-Z"), p("-Zb")];
        assert!(matches!(
            complex_to_real(&k, &gamma, &drift),
            Err(Error::ConjugateSymmetry(_))
        ));
    }
}
