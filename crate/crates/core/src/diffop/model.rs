use nalgebra::DMatrix;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{
    fmt_rational, parse_gauss, parse_poly, parse_rational, rat_to_f64, substitution_from_real,
    substitution_to_real, to_text, validate_kinds, GaussRat, Poly, Rational, VarKind,
};

/// One factor `P^alpha` of the reversible density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryFactor {
    pub poly: Poly,
    pub exponent: Rational,
}

impl BoundaryFactor {
    pub fn new(poly: Poly, exponent: Rational) -> Self {
        BoundaryFactor { poly, exponent }
    }
}

/// Predicates required positive on the domain and one interior point
/// (given in the model's own coordinates).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Domain {
    pub positive: Vec<Poly>,
    pub interior: Vec<GaussRat>,
}

/// A symmetric diffusion operator with polynomial coefficients.
///
/// `gamma[i][j] = Gamma(x_i, x_j)` and `drift[i] = L(x_i)`. The reversible
/// density is `prod P_r^{alpha_r} * exp(log_density)`; the exponential
/// factor is absent for most models and only used by the Gaussian-type
/// weights (Laguerre, Ornstein-Uhlenbeck).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffusionModel {
    pub vars: Vec<String>,
    pub kinds: Vec<VarKind>,
    pub gamma: Vec<Vec<Poly>>,
    pub drift: Vec<Poly>,
    pub boundary: Vec<BoundaryFactor>,
    pub log_density: Option<Poly>,
    pub domain: Domain,
    pub label: String,
}

impl DiffusionModel {
    /// Assemble a model with real coordinates and check its shape.
    pub fn new(
        vars: Vec<String>,
        gamma: Vec<Vec<Poly>>,
        drift: Vec<Poly>,
        boundary: Vec<BoundaryFactor>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = vars.len();
        let m = DiffusionModel {
            kinds: vec![VarKind::Real; n],
            vars,
            gamma,
            drift,
            boundary,
            log_density: None,
            domain: Domain::default(),
            label: label.into(),
        };
        m.check_shape()?;
        Ok(m)
    }

    pub fn with_kinds(mut self, kinds: Vec<VarKind>) -> Result<Self> {
        self.kinds = kinds;
        self.check_shape()?;
        Ok(self)
    }

    pub fn with_log_density(mut self, e: Poly) -> Result<Self> {
        self.log_density = Some(e);
        self.check_shape()?;
        Ok(self)
    }

    pub fn with_domain(mut self, positive: Vec<Poly>, interior: Vec<GaussRat>) -> Result<Self> {
        self.domain = Domain { positive, interior };
        self.check_shape()?;
        Ok(self)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_real_coordinates(&self) -> bool {
        self.kinds.iter().all(|k| *k == VarKind::Real)
    }

    /// Structural checks: sizes, variable counts, symmetric Gamma, valid pairs.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.vars.len();
        let bad = |what: String| Err(Error::Malformed(what));
        if self.kinds.len() != n || self.drift.len() != n || self.gamma.len() != n {
            return bad(format!("{n} variables but kinds/drift/gamma sizes differ"));
        }
        validate_kinds(&self.kinds)?;
        for (i, row) in self.gamma.iter().enumerate() {
            if row.len() != n {
                return bad(format!("gamma row {i} has {} entries", row.len()));
            }
        }
        let all = self
            .gamma
            .iter()
            .flatten()
            .chain(&self.drift)
            .chain(self.boundary.iter().map(|b| &b.poly))
            .chain(self.log_density.iter())
            .chain(&self.domain.positive);
        for p in all {
            if p.nvars() != n {
                return Err(Error::VarCountMismatch {
                    left: n,
                    right: p.nvars(),
                });
            }
        }
        if !self.domain.interior.is_empty() && self.domain.interior.len() != n {
            return Err(Error::PointLength {
                got: self.domain.interior.len(),
                expected: n,
            });
        }
        for i in 0..n {
            for j in 0..i {
                if self.gamma[i][j] != self.gamma[j][i] {
                    return bad(format!("gamma is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(())
    }

    /// Semantic checks at the interior point: positive boundary polynomials
    /// and predicates, and a positive semidefinite Gamma (tolerance 1e-9).
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        if self.domain.interior.is_empty() {
            return Ok(());
        }
        let pt = &self.domain.interior;
        for (r, b) in self.boundary.iter().enumerate() {
            let v = b.poly.eval(pt)?;
            if !v.is_real() || !v.re.is_positive() {
                return Err(Error::Malformed(format!(
                    "boundary polynomial {r} is not positive at the interior point ({v})"
                )));
            }
        }
        for (k, p) in self.domain.positive.iter().enumerate() {
            let v = p.eval(pt)?;
            if !v.is_real() || !v.re.is_positive() {
                return Err(Error::OutsideDomain(k));
            }
        }
        let lo = self.min_gamma_eigenvalue()?;
        if lo < -1e-9 {
            return Err(Error::Malformed(format!(
                "Gamma is not positive semidefinite at the interior point (eigenvalue {lo})"
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the real-coordinate Gamma at the interior point.
    pub fn min_gamma_eigenvalue(&self) -> Result<f64> {
        let real = self.to_real()?;
        let pt = real.interior_f64();
        let n = real.nvars();
        let g = DMatrix::from_fn(n, n, |i, j| real.gamma[i][j].compile().eval(&pt));
        Ok(g.symmetric_eigen().eigenvalues.min())
    }

    pub fn interior_f64(&self) -> Vec<f64> {
        self.domain.interior.iter().map(|c| rat_to_f64(&c.re)).collect()
    }

    /// Warnings for entries beyond the usual degree bounds (Gamma <= 2,
    /// drift <= 1). Limit models such as Bessel and Weyl stay within them;
    /// matrix models of higher size do not, which is allowed.
    pub fn degree_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, row) in self.gamma.iter().enumerate() {
            for (j, g) in row.iter().enumerate().skip(i) {
                if g.degree().unwrap_or(0) > 2 {
                    out.push(format!("Gamma({},{}) has degree {}", self.vars[i], self.vars[j], g.degree().unwrap()));
                }
            }
        }
        for (i, b) in self.drift.iter().enumerate() {
            if b.degree().unwrap_or(0) > 1 {
                out.push(format!("L({}) has degree {}", self.vars[i], b.degree().unwrap()));
            }
        }
        out
    }

    /// Same Gamma, drift, boundary data and coordinate kinds; names, label
    /// and domain are ignored.
    pub fn structurally_equal(&self, other: &DiffusionModel) -> bool {
        self.kinds == other.kinds
            && self.gamma == other.gamma
            && self.drift == other.drift
            && self.boundary == other.boundary
            && self.log_density == other.log_density
    }

    /// Same operator (Gamma and drift), irrespective of the measure bookkeeping.
    pub fn same_operator(&self, other: &DiffusionModel) -> bool {
        self.gamma == other.gamma && self.drift == other.drift
    }

    /// Multiply the generator by a constant (a time change).
    pub fn scaled(&self, factor: &GaussRat) -> DiffusionModel {
        let mut m = self.clone();
        for row in &mut m.gamma {
            for g in row {
                *g = g.scale(factor);
            }
        }
        for b in &mut m.drift {
            *b = b.scale(factor);
        }
        m.label = format!("{} * {}", factor.to_text(), self.label);
        m
    }

    /// Rewrite conjugate-pair coordinates `(Z, Zb)` as `(Re Z, Im Z)`.
    /// Models already in real coordinates are returned unchanged.
    pub fn to_real(&self) -> Result<DiffusionModel> {
        if self.is_real_coordinates() {
            return Ok(self.clone());
        }
        let (gamma, drift) = crate::polyring::complex_to_real(&self.kinds, &self.gamma, &self.drift)?;
        let sub = substitution_to_real(&self.kinds);
        let real_poly = |p: &Poly| -> Result<Poly> {
            let q = p.compose(&sub)?;
            if !q.is_real() {
                return Err(Error::ConjugateSymmetry(format!("{p} is not real-valued")));
            }
            Ok(q)
        };
        let boundary = self
            .boundary
            .iter()
            .map(|b| Ok(BoundaryFactor::new(real_poly(&b.poly)?, b.exponent.clone())))
            .collect::<Result<Vec<_>>>()?;
        let log_density = self.log_density.as_ref().map(real_poly).transpose()?;
        let positive = self.domain.positive.iter().map(real_poly).collect::<Result<Vec<_>>>()?;
        let interior = if self.domain.interior.is_empty() {
            Vec::new()
        } else {
            substitution_from_real(&self.kinds)
                .iter()
                .map(|p| p.eval(&self.domain.interior))
                .collect::<Result<Vec<_>>>()?
        };
        let vars = self
            .kinds
            .iter()
            .enumerate()
            .map(|(i, k)| match *k {
                VarKind::Real => self.vars[i].clone(),
                VarKind::Conj(j) if i < j => format!("{}_re", self.vars[i]),
                VarKind::Conj(j) => format!("{}_im", self.vars[j]),
            })
            .collect();
        Ok(DiffusionModel {
            vars,
            kinds: vec![VarKind::Real; self.nvars()],
            gamma,
            drift,
            boundary,
            log_density,
            domain: Domain { positive, interior },
            label: self.label.clone(),
        })
    }

    pub fn to_doc(&self) -> ModelDoc {
        let t = |p: &Poly| to_text(p, &self.vars);
        ModelDoc {
            vars: self.vars.clone(),
            kinds: self
                .kinds
                .iter()
                .map(|k| match k {
                    VarKind::Real => "real".to_string(),
                    VarKind::Conj(j) => format!("conj:{j}"),
                })
                .collect(),
            gamma: self.gamma.iter().map(|r| r.iter().map(t).collect()).collect(),
            drift: self.drift.iter().map(t).collect(),
            boundary: self
                .boundary
                .iter()
                .map(|b| BoundaryDoc {
                    poly: t(&b.poly),
                    exponent: fmt_rational(&b.exponent),
                })
                .collect(),
            log_density: self.log_density.as_ref().map(t),
            domain: DomainDoc {
                positive: self.domain.positive.iter().map(t).collect(),
                interior: self.domain.interior.iter().map(|c| c.to_text()).collect(),
            },
            label: self.label.clone(),
        }
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self> {
        let names = &doc.vars;
        let p = |s: &String| parse_poly(s, names);
        let kinds = doc
            .kinds
            .iter()
            .map(|k| match k.as_str() {
                "real" => Ok(VarKind::Real),
                other => other
                    .strip_prefix("conj:")
                    .and_then(|j| j.parse().ok())
                    .map(VarKind::Conj)
                    .ok_or_else(|| Error::Malformed(format!("bad variable kind `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let m = DiffusionModel {
            vars: names.clone(),
            kinds,
            gamma: doc
                .gamma
                .iter()
                .map(|r| r.iter().map(p).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
            drift: doc.drift.iter().map(p).collect::<Result<Vec<_>>>()?,
            boundary: doc
                .boundary
                .iter()
                .map(|b| {
                    let e = parse_rational(&b.exponent)
                        .ok_or_else(|| Error::Malformed(format!("bad exponent `{}`", b.exponent)))?;
                    Ok(BoundaryFactor::new(p(&b.poly)?, e))
                })
                .collect::<Result<Vec<_>>>()?,
            log_density: doc.log_density.as_ref().map(p).transpose()?,
            domain: Domain {
                positive: doc.domain.positive.iter().map(p).collect::<Result<Vec<_>>>()?,
                interior: doc
                    .domain
                    .interior
                    .iter()
                    .map(|s| parse_gauss(s))
                    .collect::<Result<Vec<_>>>()?,
            },
            label: doc.label.clone(),
        };
        m.check_shape()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("model document serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

/// Text form of a model, the on-disk JSON layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub vars: Vec<String>,
    pub kinds: Vec<String>,
    pub gamma: Vec<Vec<String>>,
    pub drift: Vec<String>,
    pub boundary: Vec<BoundaryDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_density: Option<String>,
    #[serde(default)]
    pub domain: DomainDoc,
    #[serde(default)]
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDoc {
    pub poly: String,
    pub exponent: String,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainDoc {
    #[serde(default)]
    pub positive: Vec<String>,
    #[serde(default)]
    pub interior: Vec<String>,
}
