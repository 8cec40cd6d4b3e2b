//! Polynomial maps sending one model onto another.

use super::{bessel_hat, brownian, jacobi, laguerre, ou, sphere, su3_trace_image_check};
use crate::diffop::image_check;
use crate::error::Result;
use crate::polyring::{rat, GaussRat, Poly};

#[derive(Clone, Debug, PartialEq)]
pub struct ImageCertificate {
    pub name: String,
    pub failures: Vec<String>,
}

impl ImageCertificate {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn norm_sq(n: usize) -> Poly {
    (0..n).fold(Poly::zero(n), |acc, i| &acc + &Poly::var(n, i).pow(2))
}

/// `|x|^2 / 2` sends OU in `R^n` to twice the Laguerre operator with `alpha = n/2`.
pub fn ou_laguerre_image(n: usize) -> Result<ImageCertificate> {
    let y = norm_sq(n).scale(&GaussRat::ratio(1, 2));
    let target = laguerre(&rat(n as i64, 2))?.scaled(&GaussRat::from_i64(2));
    let rep = image_check(&ou(n)?, &[y], &target)?;
    Ok(ImageCertificate {
        name: format!("ou({n}) -> 2 laguerre({n}/2)"),
        failures: rep.failures(),
    })
}

/// `|x|^2` sends standard Brownian motion in `R^n` to `bessel_hat(n)`.
pub fn bessel_image(n: usize) -> Result<ImageCertificate> {
    let rep = image_check(&brownian(n)?, &[norm_sq(n)], &bessel_hat(&rat(n as i64, 1))?)?;
    Ok(ImageCertificate {
        name: format!("brownian({n}) -> bessel_hat({n})"),
        failures: rep.failures(),
    })
}

/// The first coordinate of the sphere `S^d` is `jacobi(d/2, d/2)`.
pub fn sphere_jacobi_image(d: usize) -> Result<ImageCertificate> {
    let h = rat(d as i64, 2);
    let rep = image_check(&sphere(d)?, &[Poly::var(d + 1, 0)], &jacobi(&h, &h)?)?;
    Ok(ImageCertificate {
        name: format!("sphere({d}) -> jacobi({d}/2, {d}/2)"),
        failures: rep.failures(),
    })
}

/// All image identities used by the acceptance suite.
pub fn image_certificates() -> Result<Vec<ImageCertificate>> {
    let mut out = Vec::new();
    for n in 1..=4 {
        out.push(ou_laguerre_image(n)?);
        out.push(bessel_image(n)?);
    }
    for d in 1..=4 {
        out.push(sphere_jacobi_image(d)?);
    }
    let su = su3_trace_image_check()?;
    out.push(ImageCertificate {
        name: "su3 trace -> 8/3 deltoid(4)".into(),
        failures: su.failures().into_iter().map(String::from).collect(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_certificates_hold() {
        for c in image_certificates().unwrap() {
            assert!(c.holds(), "{}: {:?}", c.name, c.failures);
        }
    }

    #[test]
    fn wrong_target_is_reported() {
        let rep = image_check(&ou(2).unwrap(), &[norm_sq(2)], &laguerre(&rat(1, 1)).unwrap()).unwrap();
        assert!(!rep.is_zero());
        assert!(rep.failures().contains(&"Gamma(0,0)".to_string()));
    }
}
