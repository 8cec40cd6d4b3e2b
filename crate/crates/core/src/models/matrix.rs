//! Exact Gamma / L tables of the matrix Brownian motions, as models on the
//! matrix entries.

use serde::{Deserialize, Serialize};

use super::deltoid;
use crate::diffop::{image_check, DiffusionModel};
use crate::error::{Error, Result};
use crate::polyring::{rat, GaussRat, Poly, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    #[serde(rename = "sod")]
    SOd,
    #[serde(rename = "su3")]
    SU3,
    Hermitian,
    Symmetric,
}

impl MatrixKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sod" | "so" => Ok(MatrixKind::SOd),
            "su3" => Ok(MatrixKind::SU3),
            "hermitian" => Ok(MatrixKind::Hermitian),
            "symmetric" => Ok(MatrixKind::Symmetric),
            other => Err(Error::Unsupported(format!("matrix kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::SOd => "sod",
            MatrixKind::SU3 => "su3",
            MatrixKind::Hermitian => "hermitian",
            MatrixKind::Symmetric => "symmetric",
        }
    }
}

/// Variable `k` of a matrix table is `M[row][col]`, conjugated if `conj`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntryRef {
    pub row: usize,
    pub col: usize,
    pub conj: bool,
}

#[derive(Clone, Debug)]
pub struct MatrixTable {
    pub kind: MatrixKind,
    pub d: usize,
    pub model: DiffusionModel,
    pub entries: Vec<EntryRef>,
}

fn c(n: i64, d: i64) -> GaussRat {
    GaussRat::ratio(n, d)
}

/// SO(d): `L(m_ij) = -(d-1) m_ij`, `Gamma(m_kl, m_qp) = delta - m_kp m_ql`.
pub fn so_table(d: usize) -> Result<MatrixTable> {
    let n = d * d;
    let idx = |k: usize, l: usize| k * d + l;
    let v = |k, l| Poly::var(n, idx(k, l));
    let mut gamma = vec![vec![Poly::zero(n); n]; n];
    for k in 0..d {
        for l in 0..d {
            for q in 0..d {
                for p in 0..d {
                    let mut g = -(&v(k, p) * &v(q, l));
                    if k == q && l == p {
                        g = &g + &Poly::one(n);
                    }
                    gamma[idx(k, l)][idx(q, p)] = g;
                }
            }
        }
    }
    let drift = (0..n).map(|i| Poly::var(n, i).scale(&c(-(d as i64 - 1), 1))).collect();
    let vars = (0..d)
        .flat_map(|k| (0..d).map(move |l| format!("m{}{}", k + 1, l + 1)))
        .collect();
    let model = DiffusionModel::new(vars, gamma, drift, vec![], format!("SO({d}) entries"))?;
    let entries = (0..d)
        .flat_map(|k| (0..d).map(move |l| EntryRef { row: k, col: l, conj: false }))
        .collect();
    Ok(MatrixTable {
        kind: MatrixKind::SOd,
        d,
        model,
        entries,
    })
}

/// SU(d) Casimir on `(z_kl, zb_kl)`, `scale` times the displayed table
/// `Gamma(z_kl, z_rq) = -2 z_kq z_rl + 2/d z_kl z_rq`,
/// `Gamma(z_kl, zb_rq) = 2 (delta - 1/d z_kl zb_rq)`,
/// `L(z_kl) = -2 (d-1)(d+1)/d z_kl`.
pub fn su_table(d: usize, scale: i64) -> Result<MatrixTable> {
    let m = d * d;
    let n = 2 * m;
    let di = d as i64;
    let z = |k: usize, l: usize| Poly::var(n, k * d + l);
    let zb = |k: usize, l: usize| Poly::var(n, m + k * d + l);
    let s = GaussRat::from_i64(scale);
    let mut gamma = vec![vec![Poly::zero(n); n]; n];
    for k in 0..d {
        for l in 0..d {
            for r in 0..d {
                for q in 0..d {
                    let (a, b) = (k * d + l, r * d + q);
                    let zz = &(&z(k, q) * &z(r, l)).scale(&c(-2, 1)) + &(&z(k, l) * &z(r, q)).scale(&c(2, di));
                    let bb = &(&zb(k, q) * &zb(r, l)).scale(&c(-2, 1)) + &(&zb(k, l) * &zb(r, q)).scale(&c(2, di));
                    let mut zbm = (&z(k, l) * &zb(r, q)).scale(&c(-2, di));
                    if k == r && l == q {
                        zbm = &zbm + &Poly::from_i64(n, 2);
                    }
                    gamma[a][b] = zz.scale(&s);
                    gamma[m + a][m + b] = bb.scale(&s);
                    gamma[a][m + b] = zbm.scale(&s);
                }
            }
        }
    }
    // Gamma(zb_rq, z_kl) = Gamma(z_kl, zb_rq)
    for a in 0..m {
        for b in 0..m {
            gamma[m + b][a] = gamma[a][m + b].clone();
        }
    }
    let lam = &c(-2 * (di - 1) * (di + 1), di) * &s;
    let drift = (0..n).map(|i| Poly::var(n, i).scale(&lam)).collect();
    let mut vars: Vec<String> = (0..d)
        .flat_map(|k| (0..d).map(move |l| format!("z{}{}", k + 1, l + 1)))
        .collect();
    vars.extend((0..d).flat_map(|k| (0..d).map(move |l| format!("zb{}{}", k + 1, l + 1))));
    let kinds = (0..n)
        .map(|i| VarKind::Conj(if i < m { i + m } else { i - m }))
        .collect();
    let model = DiffusionModel::new(vars, gamma, drift, vec![], format!("SU({d}) entries x{scale}"))?.with_kinds(kinds)?;
    let mut entries: Vec<EntryRef> = (0..d)
        .flat_map(|k| (0..d).map(move |l| EntryRef { row: k, col: l, conj: false }))
        .collect();
    entries.extend((0..d).flat_map(|k| (0..d).map(move |l| EntryRef { row: k, col: l, conj: true })));
    Ok(MatrixTable {
        kind: MatrixKind::SU3,
        d,
        model,
        entries,
    })
}

/// The SU(3) Brownian motion used throughout: twice the displayed table,
/// which is the normalisation under which the trace maps to 8/3 deltoid(4).
pub fn su3_table() -> Result<MatrixTable> {
    su_table(3, 2)
}

/// Hermitian Brownian matrix: `Gamma(z_ij, zb_ij) = 1` for `i < j`,
/// `Gamma(h_ii, h_ii) = 1`, `L = 0`.
pub fn hermitian_table(d: usize) -> Result<MatrixTable> {
    let mut entries = Vec::new();
    let mut vars = Vec::new();
    let mut kinds = Vec::new();
    for i in 0..d {
        entries.push(EntryRef { row: i, col: i, conj: false });
        vars.push(format!("h{}{}", i + 1, i + 1));
        kinds.push(VarKind::Real);
    }
    for i in 0..d {
        for j in i + 1..d {
            let k = entries.len();
            entries.push(EntryRef { row: i, col: j, conj: false });
            entries.push(EntryRef { row: i, col: j, conj: true });
            vars.push(format!("z{}{}", i + 1, j + 1));
            vars.push(format!("zb{}{}", i + 1, j + 1));
            kinds.push(VarKind::Conj(k + 1));
            kinds.push(VarKind::Conj(k));
        }
    }
    let n = entries.len();
    let mut gamma = vec![vec![Poly::zero(n); n]; n];
    for i in 0..d {
        gamma[i][i] = Poly::one(n);
    }
    let mut k = d;
    while k < n {
        gamma[k][k + 1] = Poly::one(n);
        gamma[k + 1][k] = Poly::one(n);
        k += 2;
    }
    let model = DiffusionModel::new(vars, gamma, vec![Poly::zero(n); n], vec![], format!("hermitian({d}) entries"))?
        .with_kinds(kinds)?;
    Ok(MatrixTable {
        kind: MatrixKind::Hermitian,
        d,
        model,
        entries,
    })
}

/// Symmetric Brownian matrix: `Gamma(m_ij, m_kl) = 1/2 (d_ik d_jl + d_il d_jk)`, `L = 0`.
pub fn symmetric_table(d: usize) -> Result<MatrixTable> {
    let mut entries = Vec::new();
    let mut vars = Vec::new();
    for i in 0..d {
        for j in i..d {
            entries.push(EntryRef { row: i, col: j, conj: false });
            vars.push(format!("m{}{}", i + 1, j + 1));
        }
    }
    let n = entries.len();
    let mut gamma = vec![vec![Poly::zero(n); n]; n];
    for (k, e) in entries.iter().enumerate() {
        gamma[k][k] = Poly::constant(n, if e.row == e.col { c(1, 1) } else { c(1, 2) });
    }
    let model = DiffusionModel::new(vars, gamma, vec![Poly::zero(n); n], vec![], format!("symmetric({d}) entries"))?;
    Ok(MatrixTable {
        kind: MatrixKind::Symmetric,
        d,
        model,
        entries,
    })
}

pub fn matrix_table(kind: MatrixKind, d: usize) -> Result<MatrixTable> {
    match kind {
        MatrixKind::SOd if d >= 2 => so_table(d),
        MatrixKind::SU3 if d == 3 => su3_table(),
        MatrixKind::Hermitian if d >= 1 => hermitian_table(d),
        MatrixKind::Symmetric if d >= 1 => symmetric_table(d),
        _ => Err(Error::Unsupported(format!("{} with d = {d}", kind.name()))),
    }
}

/// Restrict an SU(3) entry polynomial to diagonal torus elements
/// `diag(z1, z2, 1/(z1 z2))` and clear the denominator. The result is zero
/// iff the polynomial vanishes on the maximal torus.
pub fn su3_torus_reduce(p: &Poly) -> Result<Poly> {
    let z1 = Poly::var(2, 0);
    let z2 = Poly::var(2, 1);
    let den = &z1 * &z2;
    let mut images = vec![Poly::zero(2); 18];
    images[0] = &(&z1 * &z1) * &z2;
    images[4] = &(&z1 * &z2) * &z2;
    images[8] = Poly::one(2);
    images[9] = z2.clone();
    images[13] = z1.clone();
    images[17] = &den * &den;
    p.compose_over(&images, &den)
}

/// `Z = tr(g) / 3` and its conjugate in the 18 entry variables.
pub fn su3_trace_maps() -> [Poly; 2] {
    let third = c(1, 3);
    let z = [0, 4, 8].iter().fold(Poly::zero(18), |acc, &i| &acc + &Poly::var(18, i));
    let zb = [9, 13, 17].iter().fold(Poly::zero(18), |acc, &i| &acc + &Poly::var(18, i));
    [z.scale(&third), zb.scale(&third)]
}

/// Torus-reduced residuals of the trace image identities.
#[derive(Clone, Debug, PartialEq)]
pub struct Su3Report {
    pub gamma_zz: Poly,
    pub gamma_zzb: Poly,
    pub gamma_zbzb: Poly,
    pub l_z: Poly,
    pub l_zb: Poly,
    pub constant: Poly,
}

impl Su3Report {
    pub fn is_zero(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, p) in [
            ("Gamma(Z,Z)", &self.gamma_zz),
            ("Gamma(Z,Zb)", &self.gamma_zzb),
            ("Gamma(Zb,Zb)", &self.gamma_zbzb),
            ("L(Z)", &self.l_z),
            ("L(Zb)", &self.l_zb),
            ("L(1)", &self.constant),
        ] {
            if !p.is_zero() {
                out.push(name);
            }
        }
        out
    }
}

/// Check that `Z = tr(g)/3` maps the SU(3) Casimir table (scaled by `scale`)
/// onto `factor * deltoid(4)`.
pub fn su3_trace_image_residuals(scale: i64, factor: &GaussRat) -> Result<Su3Report> {
    let su = su_table(3, scale)?.model;
    let target = deltoid(&rat(4, 1))?.scaled(factor);
    let maps = su3_trace_maps();
    let rep = image_check(&su, &maps, &target)?;
    let find_g = |i, j| {
        rep.gamma
            .iter()
            .find(|(k, _)| *k == (i, j))
            .map(|(_, p)| p.clone())
            .expect("all pairs present")
    };
    let red = su3_torus_reduce;
    Ok(Su3Report {
        gamma_zz: red(&find_g(0, 0))?,
        gamma_zzb: red(&find_g(0, 1))?,
        gamma_zbzb: red(&find_g(1, 1))?,
        l_z: red(&rep.drift[0].1)?,
        l_zb: red(&rep.drift[1].1)?,
        constant: crate::diffop::l_apply(&su, &Poly::one(18))?,
    })
}

/// The trace of the SU(3) Brownian motion is 8/3 times deltoid(4).
pub fn su3_trace_image_check() -> Result<Su3Report> {
    su3_trace_image_residuals(2, &c(8, 3))
}

/// `D(Z, Zb)` on the torus against `-(z1-z2)^2 (z2-z3)^2 (z3-z1)^2 / 108`.
pub fn deltoid_torus_residual() -> Result<Poly> {
    let [z, zb] = su3_trace_maps();
    let dm = deltoid(&rat(4, 1))?;
    let d = dm.boundary[0].poly.compose(&[z, zb])?;
    let diag = [0usize, 4, 8];
    let mut vdm = Poly::one(18);
    for a in 0..3 {
        for b in a + 1..3 {
            let diff = &Poly::var(18, diag[a]) - &Poly::var(18, diag[b]);
            vdm = &vdm * &(&diff * &diff);
        }
    }
    let target = vdm.scale(&c(-1, 108));
    su3_torus_reduce(&(&d - &target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::{gamma_apply, l_apply, product_rule_check};

    #[test]
    fn so_table_on_a_row_is_the_sphere() {
        let t = so_table(3).unwrap();
        let m = &t.model;
        let x = Poly::var(9, 0);
        assert_eq!(l_apply(m, &x).unwrap(), x.scale(&c(-2, 1)));
        // Gamma(m11, m12) = -m11 m12
        let g = gamma_apply(m, &Poly::var(9, 0), &Poly::var(9, 1)).unwrap();
        assert_eq!(g, -(&Poly::var(9, 0) * &Poly::var(9, 1)));
    }

    #[test]
    fn su3_trace_is_a_scaled_deltoid() {
        let rep = su3_trace_image_check().unwrap();
        assert!(rep.is_zero(), "{:?}", rep.failures());
        // the displayed table alone gives 4/3 deltoid(4), not 8/3
        assert!(su3_trace_image_residuals(1, &c(4, 3)).unwrap().is_zero());
        assert!(!su3_trace_image_residuals(1, &c(8, 3)).unwrap().is_zero());
    }

    #[test]
    fn deltoid_discriminant_on_the_torus() {
        assert!(deltoid_torus_residual().unwrap().is_zero());
    }

    #[test]
    fn tables_are_conjugation_symmetric() {
        for t in [su3_table().unwrap(), hermitian_table(3).unwrap()] {
            crate::polyring::check_conjugate_symmetry(&t.model.kinds, &t.model.gamma, &t.model.drift).unwrap();
        }
        let h = hermitian_table(2).unwrap();
        let f = &Poly::var(4, 2) * &Poly::var(4, 3);
        // L(|z12|^2) = 2 Gamma(z12, zb12) = 2
        assert_eq!(l_apply(&h.model, &f).unwrap(), Poly::from_i64(4, 2));
        assert!(product_rule_check(&h.model, &Poly::var(4, 0), &f).unwrap().is_zero());
        assert!(matrix_table(MatrixKind::SU3, 4).is_err());
    }
}
