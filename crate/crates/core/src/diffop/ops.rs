use num_traits::{Signed, Zero};

use super::model::{BoundaryFactor, DiffusionModel};
use crate::error::{Error, Result};
use crate::polyring::{fmt_rational, GaussRat, Poly, Rational};

fn check_vars(m: &DiffusionModel, p: &Poly) -> Result<()> {
    if p.nvars() != m.nvars() {
        return Err(Error::VarCountMismatch {
            left: m.nvars(),
            right: p.nvars(),
        });
    }
    Ok(())
}

fn gradient(p: &Poly) -> Vec<Poly> {
    (0..p.nvars())
        .map(|i| p.partial(i).expect("index in range"))
        .collect()
}

fn gamma_grad(gamma: &[Vec<Poly>], df: &[Poly], dg: &[Poly]) -> Poly {
    let n = df.len();
    let mut acc = Poly::zero(n);
    for i in 0..n {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if dg[j].is_zero() || gamma[i][j].is_zero() {
                continue;
            }
            acc = &acc + &(&gamma[i][j] * &(&df[i] * &dg[j]));
        }
    }
    acc
}

/// `Gamma(f, g) = sum g^{ij} d_i f d_j g`.
pub fn gamma_apply(m: &DiffusionModel, f: &Poly, g: &Poly) -> Result<Poly> {
    check_vars(m, f)?;
    check_vars(m, g)?;
    Ok(gamma_grad(&m.gamma, &gradient(f), &gradient(g)))
}

fn second_order(gamma: &[Vec<Poly>], f: &Poly) -> Poly {
    let n = f.nvars();
    let df = gradient(f);
    let mut acc = Poly::zero(n);
    for i in 0..n {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if gamma[i][j].is_zero() {
                continue;
            }
            let d2 = df[i].partial(j).expect("index in range");
            acc = &acc + &(&gamma[i][j] * &d2);
        }
    }
    acc
}

fn first_order(drift: &[Poly], f: &Poly) -> Poly {
    let mut acc = Poly::zero(f.nvars());
    for (i, b) in drift.iter().enumerate() {
        let d = f.partial(i).expect("index in range");
        if !d.is_zero() {
            acc = &acc + &(b * &d);
        }
    }
    acc
}

/// `L(f) = sum g^{ij} d_ij f + sum b^i d_i f`.
pub fn l_apply(m: &DiffusionModel, f: &Poly) -> Result<Poly> {
    check_vars(m, f)?;
    Ok(&second_order(&m.gamma, f) + &first_order(&m.drift, f))
}

/// `L(fg) - f L(g) - g L(f) - 2 Gamma(f, g)`; zero for any diffusion operator.
pub fn product_rule_check(m: &DiffusionModel, f: &Poly, g: &Poly) -> Result<Poly> {
    let lfg = l_apply(m, &(f * g))?;
    let rest = &(&(f * &l_apply(m, g)?) + &(g * &l_apply(m, f)?)) + &gamma_apply(m, f, g)?.scale(&GaussRat::from_i64(2));
    Ok(&lfg - &rest)
}

/// `sum_j d_j g^{ij}`, the drift of the operator with Lebesgue reversible measure.
pub fn divergence_drift(gamma: &[Vec<Poly>]) -> Vec<Poly> {
    let n = gamma.len();
    (0..n)
        .map(|i| {
            (0..n).fold(Poly::zero(n), |acc, j| {
                &acc + &gamma[i][j].partial(j).expect("index in range")
            })
        })
        .collect()
}

/// `L_ir = Gamma(x_i, log P_r)`, the constants `c_r = sum_i d_i L_ir`, and
/// the exponential-weight corrections `e_r = sum_i d_i E * L_ir`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    /// `l[r][i]`
    pub l: Vec<Vec<Poly>>,
    pub c: Vec<Rational>,
    pub e: Vec<Rational>,
}

fn boundary_quotients(gamma: &[Vec<Poly>], boundary: &[BoundaryFactor]) -> Result<Vec<Vec<Poly>>> {
    let n = gamma.len();
    let mut out = Vec::with_capacity(boundary.len());
    for (r, b) in boundary.iter().enumerate() {
        if b.poly.nvars() != n {
            return Err(Error::VarCountMismatch {
                left: n,
                right: b.poly.nvars(),
            });
        }
        let dp = gradient(&b.poly);
        let mut row = Vec::with_capacity(n);
        for (i, gi) in gamma.iter().enumerate() {
            let num = gi
                .iter()
                .zip(&dp)
                .fold(Poly::zero(n), |acc, (g, d)| &acc + &(g * d));
            let q = num.div_exact(&b.poly)?.ok_or_else(|| Error::BoundaryViolation {
                boundary: r,
                coord: i,
                reason: "Gamma(x_i, P) is not divisible by P".into(),
            })?;
            if q.degree().unwrap_or(0) > 1 {
                return Err(Error::BoundaryViolation {
                    boundary: r,
                    coord: i,
                    reason: format!("quotient {q} has degree {}", q.degree().unwrap()),
                });
            }
            row.push(q);
        }
        out.push(row);
    }
    Ok(out)
}

fn real_constant(p: &Poly, r: usize, what: &str) -> Result<Rational> {
    match p.constant_value() {
        Some(c) if c.is_real() => Ok(c.re),
        _ => Err(Error::BoundaryViolation {
            boundary: r,
            coord: 0,
            reason: format!("{what} = {p} is not a real constant"),
        }),
    }
}

/// Verify the boundary equation: each `Gamma(x_i, P_r)` is `P_r` times a
/// polynomial of degree at most one. Constancy of `c_r` is checked, not assumed.
pub fn check_boundary_eq(m: &DiffusionModel) -> Result<BoundaryData> {
    let l = boundary_quotients(&m.gamma, &m.boundary)?;
    let n = m.nvars();
    let de = m.log_density.as_ref().map(gradient);
    let mut c = Vec::new();
    let mut e = Vec::new();
    for (r, row) in l.iter().enumerate() {
        let div = row
            .iter()
            .enumerate()
            .fold(Poly::zero(n), |acc, (i, q)| &acc + &q.partial(i).expect("in range"));
        c.push(real_constant(&div, r, "sum_i d_i L_ir")?);
        let corr = match &de {
            Some(de) => de.iter().zip(row).fold(Poly::zero(n), |acc, (d, q)| &acc + &(d * q)),
            None => Poly::zero(n),
        };
        e.push(real_constant(&corr, r, "Gamma(E, log P_r)")?);
    }
    Ok(BoundaryData { l, c, e })
}

/// Drift of the symmetric operator with carré du champ `gamma` and reversible
/// density `prod P_r^{alpha_r} exp(E)`:
/// `b_i = sum_j d_j g^{ij} + sum_r alpha_r L_ir + Gamma(x_i, E)`.
pub fn drift_from_measure(
    gamma: &[Vec<Poly>],
    boundary: &[BoundaryFactor],
    log_density: Option<&Poly>,
) -> Result<Vec<Poly>> {
    let l = boundary_quotients(gamma, boundary)?;
    let mut b = divergence_drift(gamma);
    for (r, bf) in boundary.iter().enumerate() {
        let a = GaussRat::real(bf.exponent.clone());
        for (bi, lir) in b.iter_mut().zip(&l[r]) {
            *bi = &*bi + &lir.scale(&a);
        }
    }
    if let Some(e) = log_density {
        let de = gradient(e);
        for (bi, gi) in b.iter_mut().zip(gamma) {
            let t = gi.iter().zip(&de).fold(Poly::zero(e.nvars()), |acc, (g, d)| &acc + &(g * d));
            *bi = &*bi + &t;
        }
    }
    Ok(b)
}

/// Residual of the drift against the stated reversible density, one entry
/// per coordinate. When the boundary equation fails the residual is
/// multiplied through by `prod P_r` so that it stays polynomial.
pub fn density_check(m: &DiffusionModel) -> Vec<Poly> {
    let n = m.nvars();
    let div = divergence_drift(&m.gamma);
    let mut base: Vec<Poly> = m.drift.iter().zip(&div).map(|(b, d)| b - d).collect();
    if let Some(e) = &m.log_density {
        let de = gradient(e);
        for (bi, gi) in base.iter_mut().zip(&m.gamma) {
            let t = gi.iter().zip(&de).fold(Poly::zero(n), |acc, (g, d)| &acc + &(g * d));
            *bi = &*bi - &t;
        }
    }
    match boundary_quotients(&m.gamma, &m.boundary) {
        Ok(l) => {
            for (r, bf) in m.boundary.iter().enumerate() {
                let a = GaussRat::real(bf.exponent.clone());
                for (bi, lir) in base.iter_mut().zip(&l[r]) {
                    *bi = &*bi - &lir.scale(&a);
                }
            }
            base
        }
        Err(_) => {
            let all = m.boundary.iter().fold(Poly::one(n), |acc, b| &acc * &b.poly);
            (0..n)
                .map(|i| {
                    let mut acc = &base[i] * &all;
                    for (r, bf) in m.boundary.iter().enumerate() {
                        let others = m
                            .boundary
                            .iter()
                            .enumerate()
                            .filter(|(s, _)| *s != r)
                            .fold(Poly::one(n), |a, (_, b)| &a * &b.poly);
                        let gp = m.gamma[i]
                            .iter()
                            .zip(gradient(&bf.poly))
                            .fold(Poly::zero(n), |a, (g, d)| &a + &(g * &d));
                        acc = &acc - &(&gp * &others).scale(&GaussRat::real(bf.exponent.clone()));
                    }
                    acc
                })
                .collect()
        }
    }
}

/// Output of the h-transform with `h = prod P_r^{-alpha_r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HTransformResult {
    /// Same Gamma, exponents negated, drift `b - 2 sum alpha_r L_ir`.
    pub model: DiffusionModel,
    /// `lambda` in `L(h) = -lambda h`.
    pub eigenvalue: Rational,
    /// `kappa = -lambda`, so that `L(h) = kappa h`.
    pub kappa: Rational,
    /// Factors `(P_r, -alpha_r)` of `h`.
    pub h_description: Vec<(Poly, Rational)>,
    pub boundary: BoundaryData,
}

/// `lambda = sum_r alpha_r (c_r + e_r)`.
pub fn eigenvalue_of(boundary: &[BoundaryFactor], data: &BoundaryData) -> Rational {
    boundary
        .iter()
        .enumerate()
        .fold(Rational::zero(), |acc, (r, b)| acc + &b.exponent * (&data.c[r] + &data.e[r]))
}

pub fn h_transform(m: &DiffusionModel) -> Result<HTransformResult> {
    let data = check_boundary_eq(m)?;
    let mut out = m.clone();
    for (r, bf) in m.boundary.iter().enumerate() {
        let two_a = GaussRat::real(&bf.exponent * Rational::from_integer(2.into()));
        for (bi, lir) in out.drift.iter_mut().zip(&data.l[r]) {
            *bi = &*bi - &lir.scale(&two_a);
        }
    }
    for b in &mut out.boundary {
        b.exponent = -b.exponent.clone();
    }
    out.label = format!("h-transform of {}", m.label);
    let eigenvalue = eigenvalue_of(&m.boundary, &data);
    Ok(HTransformResult {
        model: out,
        kappa: -eigenvalue.clone(),
        eigenvalue,
        h_description: m
            .boundary
            .iter()
            .map(|b| (b.poly.clone(), -b.exponent.clone()))
            .collect(),
        boundary: data,
    })
}

/// For each `r`, `P_r L0(P_r) - Gamma(P_r, P_r) - c_r P_r^2`, which is
/// `P_r^2 (L0(log P_r) - c_r)`. `L0` has drift `sum_j d_j g^{ij}`.
pub fn verify_ground_state(m: &DiffusionModel) -> Result<Vec<Poly>> {
    let data = check_boundary_eq(m)?;
    let l0 = divergence_drift(&m.gamma);
    Ok(m.boundary
        .iter()
        .zip(&data.c)
        .map(|(b, c)| {
            let p = &b.poly;
            let lp = &second_order(&m.gamma, p) + &first_order(&l0, p);
            let g = gamma_grad(&m.gamma, &gradient(p), &gradient(p));
            &(&(p * &lp) - &g) - &(p * p).scale(&GaussRat::real(c.clone()))
        })
        .collect())
}

/// `(L(h)/h - kappa) * prod P_r^2` for `h = prod P_r^{-alpha_r}`, computed
/// with the model's own drift. Zero iff `L(h) = kappa h`.
pub fn ground_state_residual(m: &DiffusionModel, kappa: &Rational) -> Result<Poly> {
    let n = m.nvars();
    let ps: Vec<&Poly> = m.boundary.iter().map(|b| &b.poly).collect();
    let alphas: Vec<GaussRat> = m.boundary.iter().map(|b| GaussRat::real(b.exponent.clone())).collect();
    let k = ps.len();
    let q = ps.iter().fold(Poly::one(n), |acc, p| &acc * &(*p * *p));
    // Q / P_r and Q / (P_r P_s), built from products of the remaining factors.
    let prod_except = |skip: &[usize]| -> Poly {
        let mut acc = Poly::one(n);
        for (t, p) in ps.iter().enumerate() {
            let times = 2 - skip.iter().filter(|&&s| s == t).count();
            for _ in 0..times {
                acc = &acc * *p;
            }
        }
        acc
    };
    let grads: Vec<Vec<Poly>> = ps.iter().map(|p| gradient(p)).collect();
    let mut acc = q.scale(&GaussRat::real(-kappa.clone()));
    for r in 0..k {
        // -alpha_r L(log P_r) = -alpha_r (L(P_r)/P_r - Gamma(P_r,P_r)/P_r^2)
        let lp = l_apply(m, ps[r])?;
        let grr = gamma_grad(&m.gamma, &grads[r], &grads[r]);
        let t = &(&lp * &prod_except(&[r])) - &(&grr * &prod_except(&[r, r]));
        acc = &acc - &t.scale(&alphas[r]);
        for s in 0..k {
            let grs = gamma_grad(&m.gamma, &grads[r], &grads[s]);
            let t = &grs * &prod_except(&[r, s]);
            acc = &acc + &t.scale(&(&alphas[r] * &alphas[s]));
        }
    }
    Ok(acc)
}

/// For `L f = -lambda1 f` and nonnegative integer exponents, `f / h =
/// f prod P_r^{alpha_r}` is a polynomial eigenvector of the dual with
/// eigenvalue `-(lambda1 + kappa)`. Returns the residual of that identity.
pub fn eigenvector_shift_check(m: &DiffusionModel, f: &Poly, lambda1: &Rational) -> Result<Poly> {
    let lf = l_apply(m, f)?;
    let res = &lf + &f.scale(&GaussRat::real(lambda1.clone()));
    if !res.is_zero() {
        return Err(Error::NotEigen(res.to_string()));
    }
    let mut g = f.clone();
    for b in &m.boundary {
        let a = &b.exponent;
        if !a.is_integer() || a.is_negative() {
            return Err(Error::NonIntegerExponent(fmt_rational(a)));
        }
        let e: u32 = a
            .to_integer()
            .try_into()
            .map_err(|_| Error::NonIntegerExponent(fmt_rational(a)))?;
        g = &g * &b.poly.pow(e);
    }
    let ht = h_transform(m)?;
    let shift = GaussRat::real(lambda1 + &ht.kappa);
    Ok(&l_apply(&ht.model, &g)? + &g.scale(&shift))
}

/// Residuals of `Gamma_src(X_i, X_j) = G_ij(X)` and `L_src(X_i) = B_i(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageReport {
    pub gamma: Vec<((usize, usize), Poly)>,
    pub drift: Vec<(usize, Poly)>,
}

impl ImageReport {
    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|(_, p)| p.is_zero()) && self.drift.iter().all(|(_, p)| p.is_zero())
    }

    /// Locations of the nonzero residuals.
    pub fn failures(&self) -> Vec<String> {
        let g = self
            .gamma
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|((i, j), _)| format!("Gamma({i},{j})"));
        let d = self
            .drift
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| format!("L({i})"));
        g.chain(d).collect()
    }
}

pub fn image_check(src: &DiffusionModel, maps: &[Poly], candidate: &DiffusionModel) -> Result<ImageReport> {
    if maps.len() != candidate.nvars() {
        return Err(Error::PointLength {
            got: maps.len(),
            expected: candidate.nvars(),
        });
    }
    for x in maps {
        check_vars(src, x)?;
    }
    let k = maps.len();
    let grads: Vec<Vec<Poly>> = maps.iter().map(gradient).collect();
    let mut gamma = Vec::new();
    for i in 0..k {
        for j in i..k {
            let lhs = gamma_grad(&src.gamma, &grads[i], &grads[j]);
            let rhs = candidate.gamma[i][j].compose(maps)?;
            gamma.push(((i, j), &lhs - &rhs));
        }
    }
    let mut drift = Vec::new();
    for i in 0..k {
        let lhs = l_apply(src, &maps[i])?;
        let rhs = candidate.drift[i].compose(maps)?;
        drift.push((i, &lhs - &rhs));
    }
    Ok(ImageReport { gamma, drift })
}

/// Rebuild a model with new exponents on the same Gamma and boundary
/// polynomials; the drift follows from the measure.
pub fn with_exponents(m: &DiffusionModel, exponents: &[Rational]) -> Result<DiffusionModel> {
    if exponents.len() != m.boundary.len() {
        return Err(Error::Malformed(format!(
            "{} exponents for {} boundary polynomials",
            exponents.len(),
            m.boundary.len()
        )));
    }
    let mut out = m.clone();
    for (b, a) in out.boundary.iter_mut().zip(exponents) {
        b.exponent = a.clone();
    }
    out.drift = drift_from_measure(&out.gamma, &out.boundary, out.log_density.as_ref())?;
    Ok(out)
}
