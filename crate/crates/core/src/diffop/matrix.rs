use super::model::DiffusionModel;
use super::ops::l_apply;
use crate::error::{Error, Result};
use crate::polyring::{GaussRat, Monomial, Poly};

/// Matrix of `L` on polynomials of total degree at most `k`, in the graded
/// monomial basis. Row `j` holds the coordinates of `L(basis[j])`, so the
/// constant row vanishes and the matrix is block lower-triangular by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub basis: Vec<Monomial>,
    pub entries: Vec<Vec<GaussRat>>,
}

fn monomials_up_to(nvars: usize, k: u32) -> Vec<Monomial> {
    fn rec(prefix: &mut Vec<u32>, left: u32, nvars: usize, out: &mut Vec<Monomial>) {
        if prefix.len() == nvars {
            out.push(Monomial(prefix.clone()));
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(prefix, left - e, nvars, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), k, nvars, &mut out);
    out.sort();
    out
}

pub fn operator_matrix(m: &DiffusionModel, k: u32) -> Result<OperatorMatrix> {
    let n = m.nvars();
    let basis = monomials_up_to(n, k);
    let index: std::collections::BTreeMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let mut entries = vec![vec![GaussRat::zero(); basis.len()]; basis.len()];
    for (j, b) in basis.iter().enumerate() {
        let p = Poly::from_terms(n, [(b.0.clone(), GaussRat::one())]);
        let lp = l_apply(m, &p)?;
        if let Some(got) = lp.degree().filter(|&g| g > b.degree()) {
            return Err(Error::DegreeEscape {
                monomial: p.to_string(),
                got,
                max: b.degree(),
            });
        }
        for (mono, c) in lp.terms() {
            entries[j][index[mono]] = c.clone();
        }
    }
    Ok(OperatorMatrix { basis, entries })
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn diagonal(&self) -> Vec<GaussRat> {
        (0..self.size()).map(|i| self.entries[i][i].clone()).collect()
    }

    /// Indices of the basis elements of total degree exactly `d`.
    pub fn degree_indices(&self, d: u32) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.basis[i].degree() == d).collect()
    }

    /// The diagonal block for total degree `d`. Its eigenvalues are the
    /// eigenvalues of `L` on the degree-`d` orthogonal polynomials.
    pub fn degree_block(&self, d: u32) -> Vec<Vec<GaussRat>> {
        let idx = self.degree_indices(d);
        idx.iter()
            .map(|&i| idx.iter().map(|&j| self.entries[i][j].clone()).collect())
            .collect()
    }

    /// Spectrum by degree when every degree block is diagonal, which holds
    /// for the one-variable models and the ball.
    pub fn diagonal_spectrum(&self) -> Option<Vec<(u32, GaussRat)>> {
        let top = self.basis.last().map_or(0, |b| b.degree());
        let mut out = Vec::new();
        for d in 0..=top {
            let blk = self.degree_block(d);
            for (i, row) in blk.iter().enumerate() {
                if row.iter().enumerate().any(|(j, c)| i != j && !c.is_zero()) {
                    return None;
                }
                out.push((d, row[i].clone()));
            }
        }
        Some(out)
    }
}
