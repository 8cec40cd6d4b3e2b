//! Characteristic-polynomial coordinates for eigenvalue processes.

use crate::diffop::{drift_from_measure, BoundaryFactor, DiffusionModel};
use crate::error::{Error, Result};
use crate::polyring::{discriminant_sylvester, elementary_coefficients, rat, GaussRat, Poly, Rational};

fn a_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("a{i}")).collect()
}

/// `P(X) = X^d + sum a_i X^i` in the ring `(a_0..a_{d-1}, extra...)` with
/// `X` at index `x`.
fn char_poly(d: usize, nvars: usize, x: usize) -> Poly {
    let mut p = Poly::var(nvars, x).pow(d as u32);
    for i in 0..d {
        p = &p + &(&Poly::var(nvars, i) * &Poly::var(nvars, x).pow(i as u32));
    }
    p
}

/// `Gamma(a_i, a_j)` read off as the coefficient of `X^i Y^j` in
/// `(P'(X) P(Y) - P'(Y) P(X)) / (Y - X)`.
pub fn gamma_weyl_from_bivariate(d: usize) -> Result<Vec<Vec<Poly>>> {
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    let n = d + 2;
    let (x, y) = (d, d + 1);
    let px = char_poly(d, n, x);
    let py = px.compose(&swap_images(n, x, y))?;
    let dpx = px.partial(x)?;
    let dpy = py.partial(y)?;
    let num = &(&dpx * &py) - &(&dpy * &px);
    let den = &Poly::var(n, y) - &Poly::var(n, x);
    let q = num
        .div_exact(&den)?
        .ok_or_else(|| Error::Invalid("bivariate numerator not divisible by Y - X".into()))?;
    let mut g = vec![vec![Poly::zero(d); d]; d];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let c = q.coeff_in(&[x, y], &[i as u32, j as u32]);
            *e = c
                .truncate_vars(d)
                .ok_or_else(|| Error::Invalid("coefficient still depends on X or Y".into()))?;
        }
    }
    Ok(g)
}

fn swap_images(n: usize, a: usize, b: usize) -> Vec<Poly> {
    (0..n)
        .map(|k| {
            let t = if k == a {
                b
            } else if k == b {
                a
            } else {
                k
            };
            Poly::var(n, t)
        })
        .collect()
}

/// The discriminant of `X^d + sum a_i X^i` as a polynomial in the `a_i`.
pub fn discriminant_poly(d: usize) -> Result<Poly> {
    let a: Vec<Poly> = (0..d).map(|i| Poly::var(d, i)).collect();
    discriminant_sylvester(&a)
}

/// `sum_i X^i Gamma(a_i, disc) + P''(X) disc` in the ring `(a, X)`; zero when
/// `disc` is the discriminant.
pub fn discrim_gamma_residual(d: usize, disc: &Poly) -> Result<Poly> {
    let g = gamma_weyl_from_bivariate(d)?;
    let n = d + 1;
    let x = d;
    let disc_n = disc.extend_vars(n);
    let mut acc = Poly::zero(n);
    for i in 0..d {
        let mut gi = Poly::zero(d);
        for (j, gij) in g[i].iter().enumerate() {
            gi = &gi + &(gij * &disc.partial(j)?);
        }
        acc = &acc + &(&gi.extend_vars(n) * &Poly::var(n, x).pow(i as u32));
    }
    let p2 = char_poly(d, n, x).partial(x)?.partial(x)?;
    Ok(&acc + &(&p2 * &disc_n))
}

pub fn discrim_gamma_identity_check(d: usize) -> Result<Poly> {
    if d < 2 {
        return Err(Error::Invalid("the identity needs d >= 2".into()));
    }
    discrim_gamma_residual(d, &discriminant_poly(d)?)
}

/// Eigenvalue process in characteristic-polynomial coordinates with
/// reversible density `discrim^a`. `a = -1/2` is Brownian motion in the Weyl
/// chamber, `0` and `1/2` the real and complex Dyson processes.
pub fn weyl_dyson(d: usize, a: &Rational) -> Result<DiffusionModel> {
    let gamma = gamma_weyl_from_bivariate(d)?;
    let disc = discriminant_poly(d)?;
    let boundary = vec![BoundaryFactor::new(disc.clone(), a.clone())];
    let drift = drift_from_measure(&gamma, &boundary, None)?;
    // interior point: P with roots 0, 1, .., d-1
    let roots: Vec<GaussRat> = (0..d).map(|k| GaussRat::from_i64(k as i64)).collect();
    let interior = elementary_coefficients(d)
        .iter()
        .map(|c| c.eval(&roots))
        .collect::<Result<Vec<_>>>()?;
    DiffusionModel::new(
        a_names(d),
        gamma,
        drift,
        boundary,
        format!("weyl_dyson(d={d}, a={})", crate::polyring::fmt_rational(a)),
    )?
    .with_domain(vec![disc], interior)
}

/// `L_i = -(i+1)(i+2) a_{i+2}` with `a_d = 1` and `a_k = 0` beyond.
pub fn weyl_boundary_drift(d: usize) -> Vec<Poly> {
    (0..d)
        .map(|i| {
            let k = i + 2;
            let c = GaussRat::real(-rat(((i + 1) * (i + 2)) as i64, 1));
            if k < d {
                Poly::var(d, k).scale(&c)
            } else if k == d {
                Poly::constant(d, c)
            } else {
                Poly::zero(d)
            }
        })
        .collect()
}
