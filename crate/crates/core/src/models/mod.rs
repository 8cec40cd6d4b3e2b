//! Catalogue of polynomial diffusion models, their h-transform duals and
//! ground-state constants.

mod images;
mod matrix;
mod weyl;

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::diffop::{drift_from_measure, BoundaryFactor, DiffusionModel};
use crate::error::{Error, Result};
use crate::polyring::{fmt_rational, parse_poly, parse_rational, rat, GaussRat, Poly, Rational, VarKind};

pub use images::{bessel_image, image_certificates, ou_laguerre_image, sphere_jacobi_image, ImageCertificate};
pub use matrix::{
    deltoid_torus_residual, hermitian_table, matrix_table, so_table, su3_table, su3_torus_reduce,
    su3_trace_image_check, su3_trace_image_residuals, su3_trace_maps, su_table, symmetric_table,
    EntryRef, MatrixKind, MatrixTable, Su3Report,
};
pub use weyl::{
    discrim_gamma_identity_check, discrim_gamma_residual, discriminant_poly, gamma_weyl_from_bivariate,
    weyl_boundary_drift, weyl_dyson,
};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn k(q: &Rational) -> GaussRat {
    GaussRat::real(q.clone())
}

/// `B^_n f = 2x f'' + n f'`, the square of a Bessel process.
pub fn bessel_hat(n: &Rational) -> Result<DiffusionModel> {
    let v = names(&["x"]);
    let x = Poly::var(1, 0);
    let exponent = (n - rat(2, 1)) / rat(2, 1);
    DiffusionModel::new(
        v,
        vec![vec![x.scale(&GaussRat::from_i64(2))]],
        vec![Poly::constant(1, k(n))],
        vec![BoundaryFactor::new(x.clone(), exponent)],
        format!("bessel_hat(n={})", fmt_rational(n)),
    )?
    .with_domain(vec![x], vec![GaussRat::one()])
}

/// `(1-x^2) f'' - ((a+b) x + a - b) f'` on `(-1, 1)`.
pub fn jacobi(a: &Rational, b: &Rational) -> Result<DiffusionModel> {
    let v = names(&["x"]);
    let p = |s: &str| parse_poly(s, &v).expect("literal");
    let one = rat(1, 1);
    let drift = -(&(&p("x").scale(&k(&(a + b))) + &Poly::constant(1, k(&(a - b)))));
    DiffusionModel::new(
        v.clone(),
        vec![vec![p("1 - x^2")]],
        vec![drift],
        vec![
            BoundaryFactor::new(p("1 - x"), a - &one),
            BoundaryFactor::new(p("1 + x"), b - &one),
        ],
        format!("jacobi(alpha={}, beta={})", fmt_rational(a), fmt_rational(b)),
    )?
    .with_domain(vec![p("1 - x"), p("1 + x")], vec![GaussRat::zero()])
}

/// `x f'' + (a - x) f'` with density `x^{a-1} e^{-x}`.
pub fn laguerre(a: &Rational) -> Result<DiffusionModel> {
    let x = Poly::var(1, 0);
    DiffusionModel::new(
        names(&["x"]),
        vec![vec![x.clone()]],
        vec![&Poly::constant(1, k(a)) - &x],
        vec![BoundaryFactor::new(x.clone(), a - rat(1, 1))],
        format!("laguerre(alpha={})", fmt_rational(a)),
    )?
    .with_log_density(-x.clone())?
    .with_domain(vec![x], vec![GaussRat::one()])
}

/// `Delta - x . grad` with density `exp(-|x|^2 / 2)`.
pub fn ou(n: usize) -> Result<DiffusionModel> {
    let id = identity_gamma(n, GaussRat::one());
    let drift = (0..n).map(|i| -Poly::var(n, i)).collect();
    let sq = norm_sq(n);
    DiffusionModel::new(indexed("x", n), id, drift, vec![], format!("ou(n={n})"))?
        .with_log_density(sq.scale(&GaussRat::ratio(-1, 2)))?
        .with_domain(vec![], vec![GaussRat::zero(); n])
}

/// Standard Brownian motion, generator `Delta / 2`.
pub fn brownian(n: usize) -> Result<DiffusionModel> {
    DiffusionModel::new(
        indexed("x", n),
        identity_gamma(n, GaussRat::ratio(1, 2)),
        vec![Poly::zero(n); n],
        vec![],
        format!("brownian(n={n})"),
    )?
    .with_domain(vec![], vec![GaussRat::zero(); n])
}

/// Spherical Laplacian on `S^d` in the ambient coordinates `x_1..x_{d+1}`:
/// `Gamma = delta_ij - x_i x_j`, `L(x_i) = -d x_i`.
pub fn sphere(d: usize) -> Result<DiffusionModel> {
    let n = d + 1;
    let gamma = ball_gamma(n);
    let drift = (0..n).map(|i| Poly::var(n, i).scale(&GaussRat::from_i64(-(d as i64)))).collect();
    let mut interior = vec![GaussRat::zero(); n];
    interior[0] = GaussRat::one();
    DiffusionModel::new(indexed("x", n), gamma, drift, vec![], format!("sphere(d={d})"))?.with_domain(vec![], interior)
}

fn identity_gamma(n: usize, c: GaussRat) -> Vec<Vec<Poly>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Poly::constant(n, c.clone()) } else { Poly::zero(n) })
                .collect()
        })
        .collect()
}

fn norm_sq(n: usize) -> Poly {
    (0..n).fold(Poly::zero(n), |acc, i| &acc + &Poly::var(n, i).pow(2))
}

fn ball_gamma(n: usize) -> Vec<Vec<Poly>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let xx = &Poly::var(n, i) * &Poly::var(n, j);
                    if i == j {
                        &Poly::one(n) - &xx
                    } else {
                        -xx
                    }
                })
                .collect()
        })
        .collect()
}

/// Deltoid model in `(Z, Zb)`, drift `-lambda Z`, density `D^{(2 lambda - 5)/6}`.
pub fn deltoid(lambda: &Rational) -> Result<DiffusionModel> {
    let v = names(&["Z", "Zb"]);
    let p = |s: &str| parse_poly(s, &v).expect("literal");
    let gamma = vec![
        vec![p("Zb - Z^2"), p("1/2 - 1/2*Z*Zb")],
        vec![p("1/2 - 1/2*Z*Zb"), p("Z - Zb^2")],
    ];
    let d = &(&gamma[0][1] * &gamma[0][1]) - &(&gamma[0][0] * &gamma[1][1]);
    let lam = k(lambda);
    let drift = vec![p("-Z").scale(&lam), p("-Zb").scale(&lam)];
    let exponent = (lambda * rat(2, 1) - rat(5, 1)) / rat(6, 1);
    DiffusionModel::new(
        v,
        gamma,
        drift,
        vec![BoundaryFactor::new(d.clone(), exponent)],
        format!("deltoid(lambda={})", fmt_rational(lambda)),
    )?
    .with_kinds(vec![VarKind::Conj(1), VarKind::Conj(0)])?
    .with_domain(vec![d], vec![GaussRat::zero(), GaussRat::zero()])
}

/// Unit ball in `R^d`: `Gamma = delta - x x^T`, `L(x_i) = -m x_i`.
pub fn ball(d: usize, m: &Rational) -> Result<DiffusionModel> {
    let p = &Poly::one(d) - &norm_sq(d);
    let drift = (0..d).map(|i| Poly::var(d, i).scale(&k(&-m.clone()))).collect();
    let exponent = (m - rat(1 + d as i64, 1)) / rat(2, 1);
    DiffusionModel::new(
        indexed("x", d),
        ball_gamma(d),
        drift,
        vec![BoundaryFactor::new(p.clone(), exponent)],
        format!("ball(d={d}, m={})", fmt_rational(m)),
    )?
    .with_domain(vec![p], vec![GaussRat::zero(); d])
}

/// The `p x q` upper-left block of an SO(d) Brownian matrix. Gamma comes
/// from the SO table restricted to the block; `d` may be any rational.
pub fn matrix_jacobi(p: usize, q: usize, d: &Rational) -> Result<DiffusionModel> {
    if p == 0 || q == 0 {
        return Err(Error::BadParameter("p and q must be positive".into()));
    }
    let big = p.max(q);
    let so = so_table(big)?;
    let n = p * q;
    // block variable (k, l) -> SO index k * big + l, and back
    let to_block: Vec<Poly> = (0..big * big)
        .map(|s| {
            let (kk, l) = (s / big, s % big);
            if kk < p && l < q {
                Poly::var(n, kk * q + l)
            } else {
                Poly::zero(n)
            }
        })
        .collect();
    let so_idx = |kk: usize, l: usize| kk * big + l;
    let mut gamma = vec![vec![Poly::zero(n); n]; n];
    for a in 0..n {
        for b in 0..n {
            let g = &so.model.gamma[so_idx(a / q, a % q)][so_idx(b / q, b % q)];
            gamma[a][b] = g.compose(&to_block)?;
        }
    }
    let drift = (0..n)
        .map(|i| Poly::var(n, i).scale(&k(&(rat(1, 1) - d))))
        .collect();
    // det(Id_p - N N^T)
    let nn: Vec<Vec<Poly>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let s = (0..q).fold(Poly::zero(n), |acc, l| &acc + &(&Poly::var(n, i * q + l) * &Poly::var(n, j * q + l)));
                    if i == j {
                        &Poly::one(n) - &s
                    } else {
                        -s
                    }
                })
                .collect()
        })
        .collect();
    let det = crate::polyring::poly_det(&nn)?;
    let exponent = (d - rat(1 + (p + q) as i64, 1)) / rat(2, 1);
    let vars = (0..p)
        .flat_map(|i| (0..q).map(move |j| format!("n{}{}", i + 1, j + 1)))
        .collect();
    DiffusionModel::new(
        vars,
        gamma,
        drift,
        vec![BoundaryFactor::new(det.clone(), exponent)],
        format!("matrix_jacobi(p={p}, q={q}, d={})", fmt_rational(d)),
    )?
    .with_domain(vec![det], vec![GaussRat::zero(); n])
}

/// A catalogue entry with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    BesselHat { n: Rational },
    Jacobi { alpha: Rational, beta: Rational },
    Laguerre { alpha: Rational },
    Ou { n: usize },
    Deltoid { lambda: Rational },
    Ball { d: usize, m: Rational },
    MatrixJacobi { p: usize, q: usize, d: Rational },
    WeylDyson { d: usize, a: Rational },
    Sphere { d: usize },
    Brownian { n: usize },
}

pub const MODEL_NAMES: [&str; 10] = [
    "bessel_hat",
    "jacobi",
    "laguerre",
    "ou",
    "deltoid",
    "ball",
    "matrix_jacobi",
    "weyl_dyson",
    "sphere",
    "brownian",
];

fn get(params: &BTreeMap<String, Rational>, key: &str) -> Result<Rational> {
    params.get(key).cloned().ok_or_else(|| Error::BadParameter(key.into()))
}

fn get_usize(params: &BTreeMap<String, Rational>, key: &str) -> Result<usize> {
    let v = get(params, key)?;
    if !v.is_integer() || v.is_negative() {
        return Err(Error::BadParameter(format!("{key} must be a nonnegative integer")));
    }
    v.to_integer().to_usize().ok_or_else(|| Error::BadParameter(key.into()))
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::BesselHat { .. } => "bessel_hat",
            ModelSpec::Jacobi { .. } => "jacobi",
            ModelSpec::Laguerre { .. } => "laguerre",
            ModelSpec::Ou { .. } => "ou",
            ModelSpec::Deltoid { .. } => "deltoid",
            ModelSpec::Ball { .. } => "ball",
            ModelSpec::MatrixJacobi { .. } => "matrix_jacobi",
            ModelSpec::WeylDyson { .. } => "weyl_dyson",
            ModelSpec::Sphere { .. } => "sphere",
            ModelSpec::Brownian { .. } => "brownian",
        }
    }

    /// Parameter names expected by [`ModelSpec::from_name_params`].
    pub fn param_names(name: &str) -> Result<&'static [&'static str]> {
        Ok(match name {
            "bessel_hat" | "ou" | "brownian" => &["n"],
            "jacobi" => &["alpha", "beta"],
            "laguerre" => &["alpha"],
            "deltoid" => &["lambda"],
            "ball" => &["d", "m"],
            "matrix_jacobi" => &["p", "q", "d"],
            "weyl_dyson" => &["d", "a"],
            "sphere" => &["d"],
            other => return Err(Error::UnknownModel(other.into())),
        })
    }

    pub fn from_name_params(name: &str, params: &BTreeMap<String, Rational>) -> Result<Self> {
        let g = |k: &str| get(params, k);
        let u = |k: &str| get_usize(params, k);
        Ok(match name {
            "bessel_hat" => ModelSpec::BesselHat { n: g("n")? },
            "jacobi" => ModelSpec::Jacobi {
                alpha: g("alpha")?,
                beta: g("beta")?,
            },
            "laguerre" => ModelSpec::Laguerre { alpha: g("alpha")? },
            "ou" => ModelSpec::Ou { n: u("n")? },
            "deltoid" => ModelSpec::Deltoid { lambda: g("lambda")? },
            "ball" => ModelSpec::Ball { d: u("d")?, m: g("m")? },
            "matrix_jacobi" => ModelSpec::MatrixJacobi {
                p: u("p")?,
                q: u("q")?,
                d: g("d")?,
            },
            "weyl_dyson" => ModelSpec::WeylDyson { d: u("d")?, a: g("a")? },
            "sphere" => ModelSpec::Sphere { d: u("d")? },
            "brownian" => ModelSpec::Brownian { n: u("n")? },
            other => return Err(Error::UnknownModel(other.into())),
        })
    }

    /// Parse `name` with parameters given as text (`"1/2"`, `"3"`).
    pub fn from_text(name: &str, params: &[(&str, &str)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in params {
            let q = parse_rational(v).ok_or_else(|| Error::BadParameter(format!("{k} = {v}")))?;
            map.insert(k.to_string(), q);
        }
        Self::from_name_params(name, &map)
    }

    pub fn params(&self) -> Vec<(&'static str, Rational)> {
        let u = |x: usize| rat(x as i64, 1);
        match self {
            ModelSpec::BesselHat { n } => vec![("n", n.clone())],
            ModelSpec::Jacobi { alpha, beta } => vec![("alpha", alpha.clone()), ("beta", beta.clone())],
            ModelSpec::Laguerre { alpha } => vec![("alpha", alpha.clone())],
            ModelSpec::Ou { n } | ModelSpec::Brownian { n } => vec![("n", u(*n))],
            ModelSpec::Deltoid { lambda } => vec![("lambda", lambda.clone())],
            ModelSpec::Ball { d, m } => vec![("d", u(*d)), ("m", m.clone())],
            ModelSpec::MatrixJacobi { p, q, d } => vec![("p", u(*p)), ("q", u(*q)), ("d", d.clone())],
            ModelSpec::WeylDyson { d, a } => vec![("d", u(*d)), ("a", a.clone())],
            ModelSpec::Sphere { d } => vec![("d", u(*d))],
        }
    }

    pub fn build(&self) -> Result<DiffusionModel> {
        match self {
            ModelSpec::BesselHat { n } => bessel_hat(n),
            ModelSpec::Jacobi { alpha, beta } => jacobi(alpha, beta),
            ModelSpec::Laguerre { alpha } => laguerre(alpha),
            ModelSpec::Ou { n } => ou(*n),
            ModelSpec::Deltoid { lambda } => deltoid(lambda),
            ModelSpec::Ball { d, m } => ball(*d, m),
            ModelSpec::MatrixJacobi { p, q, d } => matrix_jacobi(*p, *q, d),
            ModelSpec::WeylDyson { d, a } => weyl_dyson(*d, a),
            ModelSpec::Sphere { d } => sphere(*d),
            ModelSpec::Brownian { n } => brownian(*n),
        }
    }

    /// Whether the model carries a reversible density in its own
    /// coordinates. The sphere lives on a hypersurface and is only used as
    /// an image source.
    pub fn has_density(&self) -> bool {
        !matches!(self, ModelSpec::Sphere { .. })
    }

    /// Parameters of the h-transform.
    pub fn dual(&self) -> ModelSpec {
        let two = rat(2, 1);
        match self {
            ModelSpec::BesselHat { n } => ModelSpec::BesselHat { n: rat(4, 1) - n },
            ModelSpec::Jacobi { alpha, beta } => ModelSpec::Jacobi {
                alpha: &two - alpha,
                beta: &two - beta,
            },
            ModelSpec::Laguerre { alpha } => ModelSpec::Laguerre { alpha: &two - alpha },
            ModelSpec::Deltoid { lambda } => ModelSpec::Deltoid { lambda: rat(5, 1) - lambda },
            ModelSpec::Ball { d, m } => ModelSpec::Ball {
                d: *d,
                m: rat(2 * *d as i64 + 2, 1) - m,
            },
            ModelSpec::MatrixJacobi { p, q, d } => ModelSpec::MatrixJacobi {
                p: *p,
                q: *q,
                d: rat(2 * (p + q) as i64 + 2, 1) - d,
            },
            ModelSpec::WeylDyson { d, a } => ModelSpec::WeylDyson { d: *d, a: -a.clone() },
            other => other.clone(),
        }
    }

    /// `kappa` with `L(h) = kappa h`, as displayed for each model.
    pub fn expected_kappa(&self) -> Rational {
        let one = rat(1, 1);
        match self {
            ModelSpec::BesselHat { .. } => Rational::zero(),
            ModelSpec::Jacobi { alpha, beta } => alpha + beta - rat(2, 1),
            ModelSpec::Laguerre { alpha } => alpha - &one,
            ModelSpec::Deltoid { lambda } => lambda * rat(2, 1) - rat(5, 1),
            ModelSpec::Ball { d, m } => rat(*d as i64, 1) * (m - rat(*d as i64 + 1, 1)),
            ModelSpec::MatrixJacobi { p, q, d } => rat((p * q) as i64, 1) * (d - rat((1 + p + q) as i64, 1)),
            ModelSpec::WeylDyson { .. } | ModelSpec::Ou { .. } | ModelSpec::Sphere { .. } | ModelSpec::Brownian { .. } => {
                Rational::zero()
            }
        }
    }

    pub fn describe(&self) -> String {
        let ps: Vec<String> = self
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt_rational(v)))
            .collect();
        format!("{}({})", self.name(), ps.join(", "))
    }
}

/// The parameter sets exercised by the exact identity suite.
pub fn catalog() -> Vec<ModelSpec> {
    let r = rat;
    let mut out = Vec::new();
    for n in [r(1, 1), r(3, 2), r(3, 1)] {
        out.push(ModelSpec::BesselHat { n });
    }
    for (a, b) in [(r(1, 2), r(1, 2)), (r(3, 2), r(3, 2)), (r(1, 1), r(2, 1))] {
        out.push(ModelSpec::Jacobi { alpha: a, beta: b });
    }
    for a in [r(1, 2), r(2, 1)] {
        out.push(ModelSpec::Laguerre { alpha: a });
    }
    for l in [r(1, 1), r(4, 1)] {
        out.push(ModelSpec::Deltoid { lambda: l });
    }
    for (d, m) in [(1, r(1, 1)), (2, r(4, 1)), (3, r(3, 1))] {
        out.push(ModelSpec::Ball { d, m });
    }
    for (p, q, d) in [(1, 1, 4), (1, 2, 5), (2, 2, 6)] {
        out.push(ModelSpec::MatrixJacobi { p, q, d: r(d, 1) });
    }
    for d in [2, 3] {
        for a in [r(-1, 2), r(0, 1), r(1, 2), r(3, 2)] {
            out.push(ModelSpec::WeylDyson { d, a });
        }
    }
    out
}

/// Default parameters for `models show <name>`.
pub fn default_spec(name: &str) -> Result<ModelSpec> {
    let r = rat;
    Ok(match name {
        "bessel_hat" => ModelSpec::BesselHat { n: r(3, 1) },
        "jacobi" => ModelSpec::Jacobi {
            alpha: r(1, 2),
            beta: r(1, 2),
        },
        "laguerre" => ModelSpec::Laguerre { alpha: r(1, 2) },
        "ou" => ModelSpec::Ou { n: 2 },
        "deltoid" => ModelSpec::Deltoid { lambda: r(4, 1) },
        "ball" => ModelSpec::Ball { d: 2, m: r(4, 1) },
        "matrix_jacobi" => ModelSpec::MatrixJacobi { p: 1, q: 2, d: r(5, 1) },
        "weyl_dyson" => ModelSpec::WeylDyson { d: 3, a: r(1, 2) },
        "sphere" => ModelSpec::Sphere { d: 2 },
        "brownian" => ModelSpec::Brownian { n: 3 },
        other => return Err(Error::UnknownModel(other.into())),
    })
}

/// Drift recomputed from the model's measure, for comparison with the
/// displayed drift.
pub fn measure_drift(m: &DiffusionModel) -> Result<Vec<Poly>> {
    drift_from_measure(&m.gamma, &m.boundary, m.log_density.as_ref())
}
