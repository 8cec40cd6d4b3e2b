use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::gauss::{rat_to_f64, GaussRat};
use crate::error::{Error, Result};

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over the Gaussian rationals.
///
/// Zero coefficients are never stored, so derived equality is structural
/// equality of polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, GaussRat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked `a op b`.
pub fn poly_arith(a: &Poly, b: &Poly, op: ArithOp) -> Result<Poly> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn from_i64(nvars: usize, c: i64) -> Self {
        Poly::constant(nvars, GaussRat::from_i64(c))
    }

    pub fn one(nvars: usize) -> Self {
        Poly::from_i64(nvars, 1)
    }

    /// The coordinate function `x_i`. Panics if `i >= nvars`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::var(nvars, i), GaussRat::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, GaussRat)>>(nvars: usize, it: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in it {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussRat {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &GaussRat)> {
        self.terms.iter().next_back()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.leading_term().map(|(m, _)| m.degree())
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    pub fn constant_value(&self) -> Option<GaussRat> {
        match self.degree() {
            None => Some(GaussRat::zero()),
            Some(0) => Some(self.coeff(&Monomial::one(self.nvars))),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.degree().map_or(true, |d| d == 0)
    }

    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(GaussRat::is_real)
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_same(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_same(other)?;
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative in `var`.
    pub fn partial(&self, var: usize) -> Result<Poly> {
        if var >= self.nvars {
            return Err(Error::VarIndex {
                index: var,
                nvars: self.nvars,
            });
        }
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[var] -= 1;
            out.add_term(nm, c * &GaussRat::from_i64(e as i64));
        }
        Ok(out)
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn eval(&self, point: &[GaussRat]) -> Result<GaussRat> {
        if point.len() != self.nvars {
            return Err(Error::PointLength {
                got: point.len(),
                expected: self.nvars,
            });
        }
        let mut acc = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t = &t * x;
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Exact division. `Ok(None)` when `den` does not divide `self`.
    pub fn div_exact(&self, den: &Poly) -> Result<Option<Poly>> {
        self.check_same(den)?;
        let (lm, lc) = match den.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let lc_inv = lc.inv().expect("nonzero leading coefficient");
        let mut rem = self.clone();
        let mut quo = Poly::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading_term() {
            // With a single divisor, a leading term that lm does not divide
            // stays in the remainder for good.
            if !lm.divides(rm) {
                return Ok(None);
            }
            let tm = rm.div(&lm);
            let tc = rc * &lc_inv;
            for (m, c) in &den.terms {
                rem.add_term(m.mul(&tm), -(c * &tc));
            }
            quo.add_term(tm, tc);
        }
        Ok(Some(quo))
    }

    /// Substitute `images[i]` for variable `i`. All images share a variable count.
    pub fn compose(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.nvars {
            return Err(Error::PointLength {
                got: images.len(),
                expected: self.nvars,
            });
        }
        let out_n = images.first().map_or(0, |p| p.nvars);
        if let Some(bad) = images.iter().find(|p| p.nvars != out_n) {
            return Err(Error::VarCountMismatch {
                left: out_n,
                right: bad.nvars,
            });
        }
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(out_n), p.clone()]).collect();
        let mut out = Poly::zero(out_n);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(out_n, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// `self(images / den) * den^deg(self)`, a polynomial whenever `images`
    /// and `den` are.
    pub fn compose_over(&self, images: &[Poly], den: &Poly) -> Result<Poly> {
        let deg = self.degree().unwrap_or(0);
        let n = den.nvars;
        let mut den_pows = vec![Poly::one(n)];
        for k in 1..=deg as usize {
            den_pows.push(&den_pows[k - 1] * den);
        }
        let mut out = Poly::zero(n);
        for (m, c) in &self.terms {
            let single = Poly {
                nvars: self.nvars,
                terms: std::iter::once((m.clone(), c.clone())).collect(),
            };
            let num = single.compose(images)?;
            out = &out + &(&num * &den_pows[(deg - m.degree()) as usize]);
        }
        Ok(out)
    }

    /// Conjugate every coefficient.
    pub fn conj_coeffs(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Rename variables: variable `i` becomes `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Poly {
        assert_eq!(perm.len(), self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; self.nvars];
            for (i, &x) in m.0.iter().enumerate() {
                e[perm[i]] = x;
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Embed into a ring with `n >= nvars` variables (new variables appended).
    pub fn extend_vars(&self, n: usize) -> Poly {
        assert!(n >= self.nvars);
        Poly {
            nvars: n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e.resize(n, 0);
                    (Monomial(e), c.clone())
                })
                .collect(),
        }
    }

    /// Drop trailing variables; `None` if any of them occurs.
    pub fn truncate_vars(&self, n: usize) -> Option<Poly> {
        let mut out = Poly::zero(n);
        for (m, c) in &self.terms {
            if m.0[n..].iter().any(|&e| e != 0) {
                return None;
            }
            out.add_term(Monomial(m.0[..n].to_vec()), c.clone());
        }
        Some(out)
    }

    /// Coefficient of `prod vars[k]^exps[k]`, viewed as a polynomial in the
    /// remaining variables (the listed variables are set to exponent 0).
    pub fn coeff_in(&self, vars: &[usize], exps: &[u32]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if vars.iter().zip(exps).all(|(&v, &e)| m.0[v] == e) {
                let mut nm = m.clone();
                for &v in vars {
                    nm.0[v] = 0;
                }
                out.add_term(nm, c.clone());
            }
        }
        out
    }

    /// Float evaluator for real-coefficient polynomials.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let factors = m
                        .0
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (i, e))
                        .collect();
                    (rat_to_f64(&c.re), factors)
                })
                .collect(),
        }
    }
}

impl Poly {
    pub fn compile_complex(&self) -> CompiledComplexPoly {
        CompiledComplexPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let factors = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
                    let (re, im) = c.to_f64_pair();
                    (Complex64::new(re, im), factors)
                })
                .collect(),
        }
    }
}

/// Real part of a polynomial flattened to `f64` for fast evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

/// A polynomial flattened to complex `f64` coefficients.
#[derive(Clone, Debug)]
pub struct CompiledComplexPoly {
    terms: Vec<(Complex64, Vec<(usize, u32)>)>,
}

impl CompiledComplexPoly {
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, fs)| fs.iter().fold(*c, |acc, &(i, e)| acc * x[i].powu(e)))
            .sum()
    }
}

impl CompiledPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, fs)| {
                fs.iter()
                    .fold(*c, |acc, &(i, e)| acc * x[i].powi(e as i32))
            })
            .sum()
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    /// Panics on a variable-count mismatch; use [`Poly::try_add`] to check.
    fn add(self, o: &Poly) -> Poly {
        self.try_add(o).expect("polynomial add")
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self.try_sub(o).expect("polynomial sub")
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.try_mul(o).expect("polynomial mul")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&GaussRat::from_i64(-1))
    }
}

macro_rules! forward_poly {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: &Poly) -> Poly {
                (&self).$m(o)
            }
        }
    };
}
forward_poly!(Add, add);
forward_poly!(Sub, sub);
forward_poly!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::parse::to_text(self, &super::parse::default_names(self.nvars)))
    }
}
