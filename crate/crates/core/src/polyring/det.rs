//! Determinants of polynomial matrices and the Sylvester-form discriminant.

use super::poly::Poly;
use crate::error::{Error, Result};

fn check_square(m: &[Vec<Poly>]) -> Result<usize> {
    let n = m.len();
    for (row, r) in m.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare {
                rows: n,
                row,
                cols: r.len(),
            });
        }
    }
    Ok(n)
}

/// Exact determinant. Cofactor expansion up to 4x4, Bareiss
/// fraction-free elimination above.
pub fn poly_det(m: &[Vec<Poly>]) -> Result<Poly> {
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::Invalid("determinant of an empty matrix".into()));
    }
    let nv = m[0][0].nvars();
    for r in m {
        for e in r {
            if e.nvars() != nv {
                return Err(Error::VarCountMismatch {
                    left: nv,
                    right: e.nvars(),
                });
            }
        }
    }
    if n <= 4 {
        Ok(cofactor(m))
    } else {
        bareiss(m.to_vec())
    }
}

fn cofactor(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    if n == 2 {
        return &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]);
    }
    let nv = m[0][0].nvars();
    let mut acc = Poly::zero(nv);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let t = &m[0][j] * &cofactor(&minor);
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

fn bareiss(mut a: Vec<Vec<Poly>>) -> Result<Poly> {
    let n = a.len();
    let nv = a[0][0].nvars();
    let mut prev = Poly::one(nv);
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(Poly::zero(nv)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num
                    .div_exact(&prev)?
                    .ok_or_else(|| Error::Invalid("Bareiss step was not exact".into()))?;
            }
            a[i][k] = Poly::zero(nv);
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { -d } else { d })
}

/// The (2d-1)x(2d-1) Sylvester matrix of `P = X^d + sum a_i X^i` and `P'`,
/// with coefficients given low-to-high as `coeffs = [a_0, .., a_{d-1}]`.
pub fn sylvester_matrix(coeffs: &[Poly]) -> Result<Vec<Vec<Poly>>> {
    let d = coeffs.len();
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    let nv = coeffs[0].nvars();
    if let Some(bad) = coeffs.iter().find(|c| c.nvars() != nv) {
        return Err(Error::VarCountMismatch {
            left: nv,
            right: bad.nvars(),
        });
    }
    // High-to-low coefficient rows of P and P'.
    let mut p_row = vec![Poly::one(nv)];
    p_row.extend(coeffs.iter().rev().cloned());
    let mut dp_row = vec![Poly::from_i64(nv, d as i64)];
    for i in (1..d).rev() {
        dp_row.push(coeffs[i].scale(&(i as i64).into()));
    }
    let size = 2 * d - 1;
    let mut m = vec![vec![Poly::zero(nv); size]; size];
    for r in 0..d - 1 {
        for (k, c) in p_row.iter().enumerate() {
            m[r][r + k] = c.clone();
        }
    }
    for r in 0..d {
        for (k, c) in dp_row.iter().enumerate() {
            m[d - 1 + r][r + k] = c.clone();
        }
    }
    Ok(m)
}

/// Discriminant of the monic degree-`d` polynomial with lower coefficients
/// `coeffs`, normalised so that it equals `prod_{i<j} (x_j - x_i)^2` over the
/// roots.
pub fn discriminant_sylvester(coeffs: &[Poly]) -> Result<Poly> {
    let d = coeffs.len();
    let det = poly_det(&sylvester_matrix(coeffs)?)?;
    Ok(if (d * (d - 1) / 2) % 2 == 1 { -det } else { det })
}

/// Coefficients `a_0..a_{d-1}` of `prod_k (X - x_k)` as polynomials in
/// `x_0..x_{d-1}`.
pub fn elementary_coefficients(d: usize) -> Vec<Poly> {
    // Multiply out (X - x_k) one root at a time, tracking coefficients.
    let mut coeffs = vec![Poly::one(d)];
    for k in 0..d {
        let xk = Poly::var(d, k);
        let mut next = vec![Poly::zero(d); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = &next[i + 1] + c;
            next[i] = &next[i] - &(c * &xk);
        }
        coeffs = next;
    }
    coeffs.truncate(d);
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse::parse_poly;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn small_determinants() {
        let n = names(&["a", "b", "c", "d"]);
        let p = |s: &str| parse_poly(s, &n).unwrap();
        let id = vec![vec![p("1"), p("0")], vec![p("0"), p("1")]];
        assert_eq!(poly_det(&id).unwrap(), p("1"));
        let m = vec![vec![p("a"), p("b")], vec![p("c"), p("d")]];
        assert_eq!(poly_det(&m).unwrap(), p("a*d - b*c"));
        let x = names(&["x"]);
        let j = vec![vec![parse_poly("1 - x^2", &x).unwrap()]];
        assert_eq!(poly_det(&j).unwrap(), parse_poly("1 - x^2", &x).unwrap());
    }

    #[test]
    fn non_square_is_an_error() {
        let m = vec![vec![Poly::one(1), Poly::one(1)], vec![Poly::one(1)]];
        assert!(matches!(poly_det(&m), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn bareiss_agrees_with_cofactor() {
        // 5x5 with polynomial entries; compare against a hand cofactor expansion.
        let n = names(&["x", "y"]);
        let e = |s: &str| parse_poly(s, &n).unwrap();
        let m: Vec<Vec<Poly>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| {
                        let s = format!("{}*x^{} + {}*y + {}", (i + 2 * j) % 3, (i * j) % 3, i as i64 - j as i64, (i * i + j) % 4);
                        e(&s)
                    })
                    .collect()
            })
            .collect();
        let fast = poly_det(&m).unwrap();
        let slow = cofactor(&m);
        assert_eq!(fast, slow);
        // row swap flips the sign
        let mut sw = m.clone();
        sw.swap(0, 3);
        assert_eq!(poly_det(&sw).unwrap(), -slow);
    }

    #[test]
    fn discriminant_low_degree() {
        let one = discriminant_sylvester(&[Poly::var(1, 0)]).unwrap();
        assert_eq!(one, Poly::one(1));
        let n = names(&["a0", "a1"]);
        let d2 = discriminant_sylvester(&[Poly::var(2, 0), Poly::var(2, 1)]).unwrap();
        assert_eq!(d2, parse_poly("a1^2 - 4*a0", &n).unwrap());
        let n3 = names(&["p", "q"]);
        let q = Poly::var(2, 1);
        let p = Poly::var(2, 0);
        let d3 = discriminant_sylvester(&[q, p, Poly::zero(2)]).unwrap();
        assert_eq!(d3, parse_poly("-4*p^3 - 27*q^2", &n3).unwrap());
        assert!(matches!(discriminant_sylvester(&[]), Err(Error::ZeroDegree)));
    }

    #[test]
    fn elementary_coefficients_d2() {
        let e = elementary_coefficients(2);
        let n = names(&["x", "y"]);
        assert_eq!(e[0], parse_poly("x*y", &n).unwrap());
        assert_eq!(e[1], parse_poly("-x - y", &n).unwrap());
    }
}
