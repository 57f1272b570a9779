use hetmod::chartlocal::{dbar_homotopy, ChartForm, Poly};
use hetmod::cohomology::symbol_matrix;
use hetmod::models::build_calabi_eckmann;
use hetmod::qcomplex::{QComplex, QOptions};
use hetmod::scalar::GaussRat;
use proptest::prelude::*;

fn gauss() -> impl Strategy<Value = GaussRat> {
    (-9i64..=9, 1i64..=6, -9i64..=9, 1i64..=6)
        .prop_map(|(a, b, c, d)| GaussRat::frac(a, b) + GaussRat::frac(c, d).mul_i())
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u8..=2, 6), gauss()), 1..5).prop_map(|terms| {
        terms.into_iter().fold(Poly::zero(3), |acc, (e, c)| acc.add(&Poly::monomial(3, e, c)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_print_parse(x in gauss()) {
        let back: GaussRat = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn homotopy_inverts_dbar_on_exact_forms(f in poly(), g in poly()) {
        let u = ChartForm::function(f).add(&ChartForm::dzb(3, 1).mul_poly(&g));
        for x in [u.dbar(), ChartForm::function(g.clone()).dbar()] {
            if x.is_zero() || x.anti_degrees().contains(&0) {
                continue;
            }
            prop_assert_eq!(dbar_homotopy(&x).unwrap().dbar(), x);
        }
    }

    #[test]
    fn wedge_is_graded_commutative(f in poly(), g in poly()) {
        let a = ChartForm::dz(3, 0).mul_poly(&f).add(&ChartForm::dzb(3, 2).mul_poly(&g));
        let b = ChartForm::dzb(3, 0).mul_poly(&g);
        prop_assert_eq!(a.wedge(&b), b.wedge(&a).neg());
        prop_assert_eq!(a.wedge(&b).d(), a.d().wedge(&b).sub(&a.wedge(&b.d())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn symbol_rank_is_scale_invariant(xi in prop::collection::vec(gauss(), 3), lam in gauss()) {
        prop_assume!(xi.iter().any(|c| c != &GaussRat::from(0)) && lam != GaussRat::from(0));
        let q = QComplex::new(&build_calabi_eckmann(), QOptions::default()).unwrap();
        let alpha = GaussRat::frac(1, 7);
        let scaled: Vec<GaussRat> = xi.iter().map(|c| c * &lam).collect();
        for p in 0..=3 {
            let a = symbol_matrix(&q, p, &xi, &alpha).unwrap();
            let b = symbol_matrix(&q, p, &scaled, &alpha).unwrap();
            prop_assert_eq!(a.rank(), b.rank());
            prop_assert_eq!(a.rank(), a.cols);
        }
    }
}
