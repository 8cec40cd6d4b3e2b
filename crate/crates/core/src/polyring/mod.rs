//! Exact sparse multivariate polynomials over the Gaussian rationals.

mod complex;
mod det;
mod gauss;
mod parse;
mod poly;

pub use complex::{
    check_conjugate_symmetry, complex_to_real, conjugate, has_pairs, partner_perm, real_to_complex,
    substitution_from_real, substitution_to_real, validate_kinds, VarKind,
};
pub use det::{discriminant_sylvester, elementary_coefficients, poly_det, sylvester_matrix};
pub use gauss::{fmt_rational, parse_rational, rat, rat_to_f64, GaussRat, Rational};
pub use parse::{default_names, parse_gauss, parse_poly, to_text};
pub use poly::{poly_arith, ArithOp, CompiledComplexPoly, CompiledPoly, Monomial, Poly};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    prop_compose! {
        fn arb_poly(nv: usize)(terms in proptest::collection::vec(
            (proptest::collection::vec(0u32..3, nv), -6i64..6, 1i64..4, -3i64..3), 0..6)) -> Poly {
            Poly::from_terms(nv, terms.into_iter().map(|(e, p, q, r)| {
                (e, GaussRat::new(rat(p, q), rat(r, 1)))
            }))
        }
    }

    prop_compose! {
        fn arb_point(nv: usize)(v in proptest::collection::vec((-5i64..5, 1i64..4, -5i64..5, 1i64..4), nv)) -> Vec<GaussRat> {
            v.into_iter().map(|(a, b, c, d)| GaussRat::new(rat(a, b), rat(c, d))).collect()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn distributive(p in arb_poly(3), q in arb_poly(3), r in arb_poly(3)) {
            prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        }

        #[test]
        fn mixed_partials_commute(p in arb_poly(3)) {
            let a = p.partial(0).unwrap().partial(1).unwrap();
            let b = p.partial(1).unwrap().partial(0).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn leibniz(p in arb_poly(2), q in arb_poly(2)) {
            let lhs = (&p * &q).partial(0).unwrap();
            let rhs = &(&p * &q.partial(0).unwrap()) + &(&q * &p.partial(0).unwrap());
            prop_assert!((&lhs - &rhs).is_zero());
        }

        #[test]
        fn evaluation_is_a_ring_homomorphism(p in arb_poly(2), q in arb_poly(2), x in arb_point(2)) {
            let pq = (&p * &q).eval(&x).unwrap();
            prop_assert_eq!(pq, &p.eval(&x).unwrap() * &q.eval(&x).unwrap());
            let s = (&p + &q).eval(&x).unwrap();
            prop_assert_eq!(s, &p.eval(&x).unwrap() + &q.eval(&x).unwrap());
        }

        #[test]
        fn exact_division_recovers_factor(p in arb_poly(2), q in arb_poly(2)) {
            prop_assume!(!q.is_zero());
            let prod = &p * &q;
            let quo = prod.div_exact(&q).unwrap();
            prop_assert_eq!(quo, Some(p));
        }

        #[test]
        fn division_result_is_structural(p in arb_poly(2), q in arb_poly(2)) {
            prop_assume!(!q.is_zero());
            if let Some(quo) = p.div_exact(&q).unwrap() {
                prop_assert_eq!(&quo * &q, p);
            }
        }

        #[test]
        fn degree_of_product(p in arb_poly(3), q in arb_poly(3)) {
            prop_assume!(!p.is_zero() && !q.is_zero());
            prop_assert_eq!((&p * &q).degree().unwrap(), p.degree().unwrap() + q.degree().unwrap());
        }
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn arithmetic_examples() {
        let n = names(&["x"]);
        let p = |s: &str| parse_poly(s, &n).unwrap();
        assert_eq!(
            poly_arith(&p("x + 1"), &p("x - 1"), ArithOp::Mul).unwrap(),
            p("x^2 - 1")
        );
        assert_eq!(poly_arith(&p("3*x"), &Poly::zero(1), ArithOp::Add).unwrap(), p("3*x"));
        assert!(matches!(
            poly_arith(&p("x"), &Poly::one(2), ArithOp::Add),
            Err(crate::Error::VarCountMismatch { .. })
        ));
    }

    #[test]
    fn deltoid_product_at_a_gaussian_point() {
        let n = names(&["Z", "Zb"]);
        let a = parse_poly("Zb - Z^2", &n).unwrap();
        let z = parse_poly("Z", &n).unwrap();
        let pt = vec![
            GaussRat::new(rat(1, 3), rat(-2, 5)),
            GaussRat::new(rat(1, 3), rat(2, 5)),
        ];
        let lhs = (&a * &z).eval(&pt).unwrap();
        // hand evaluation: Zb - Z^2 and Z at the point
        let zv = &pt[0];
        let av = &pt[1] - &(zv * zv);
        assert_eq!(lhs, &av * zv);
    }

    #[test]
    fn partial_derivatives() {
        let n = names(&["x", "y"]);
        let p = |s: &str| parse_poly(s, &n).unwrap();
        assert_eq!(p("x^2*y").partial(0).unwrap(), p("2*x*y"));
        assert!(p("7/3").partial(0).unwrap().is_zero());
        assert!(matches!(p("x").partial(2), Err(crate::Error::VarIndex { .. })));
    }

    #[test]
    fn evaluation_examples() {
        let n = names(&["x", "y"]);
        let p = |s: &str| parse_poly(s, &n).unwrap();
        let one = GaussRat::one();
        assert!(p("x^2 - 1").eval(&[one.clone(), one.clone()]).unwrap().is_zero());
        assert_eq!(
            p("x + y").eval(&[one.clone(), GaussRat::from_i64(2)]).unwrap(),
            GaussRat::from_i64(3)
        );
        assert!(matches!(p("x").eval(&[one]), Err(crate::Error::PointLength { .. })));
    }

    #[test]
    fn exact_division_examples() {
        let n = names(&["x"]);
        let p = |s: &str| parse_poly(s, &n).unwrap();
        assert_eq!(p("x^2 - 1").div_exact(&p("x - 1")).unwrap(), Some(p("x + 1")));
        assert_eq!(
            p("-(1 - x^2)").div_exact(&p("1 - x")).unwrap(),
            Some(p("-(1 + x)"))
        );
        assert_eq!(p("x^2 + 1").div_exact(&p("x + 1")).unwrap(), None);
        assert!(matches!(
            p("x").div_exact(&Poly::zero(1)),
            Err(crate::Error::DivisionByZero)
        ));
    }

    /// Root-product oracle: prod_{i<j} (x_j - x_i)^2 built directly.
    fn root_product(d: usize) -> Poly {
        let mut acc = Poly::one(d);
        for i in 0..d {
            for j in i + 1..d {
                let diff = &Poly::var(d, j) - &Poly::var(d, i);
                acc = &acc * &(&diff * &diff);
            }
        }
        acc
    }

    #[test]
    fn discriminant_matches_root_product_symbolically() {
        for d in 2..=3 {
            let a: Vec<Poly> = (0..d).map(|i| Poly::var(d, i)).collect();
            let disc = discriminant_sylvester(&a).unwrap();
            let sub = disc.compose(&elementary_coefficients(d)).unwrap();
            assert_eq!(sub, root_product(d), "d = {d}");
        }
    }
}
