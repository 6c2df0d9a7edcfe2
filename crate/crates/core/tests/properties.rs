//! Standalone property suites: the exterior-calculus laws on seeded random
//! data, plus randomized structural invariants of the quotient machinery.

use nalgebra::DVector;
use proptest::prelude::*;

use orbitflux::exterior::KForm;
use orbitflux::thurston::{
    canonicalize, lattice_act, quotient_distance, LatticeElement, QuotientConvention,
};
use orbitflux::verify;
use orbitflux::ChartPoint;

#[test]
fn exterior_calculus_property_suite() {
    let checks = verify::property_suite(20_240_817, None).unwrap();
    for c in &checks {
        println!(
            "[{}] {}: measured {:.3e} (tolerance {:.3e})",
            if c.pass { "ok" } else { "FAIL" },
            c.id,
            c.measured,
            c.tolerance
        );
    }
    assert!(verify::all_pass(&checks), "{checks:#?}");
}

fn arb_point() -> impl Strategy<Value = ChartPoint> {
    (
        -5.0..5.0f64,
        -5.0..5.0f64,
        -5.0..5.0f64,
        -20.0..20.0f64,
        -20.0..20.0f64,
    )
        .prop_map(|(x, y, z, t, u)| ChartPoint::new(&[x, y, z, t, u]))
}

fn arb_gamma() -> impl Strategy<Value = LatticeElement> {
    (-3i64..4, -3i64..4, -3i64..4).prop_map(|(a, b, c)| LatticeElement::new(a, b, c))
}

proptest! {
    #[test]
    fn group_law_matches_the_action(g1 in arb_gamma(), g2 in arb_gamma(), p in arb_point()) {
        let two_steps = lattice_act(g2, &lattice_act(g1, &p));
        let one_step = lattice_act(g2.compose(g1), &p);
        prop_assert!((two_steps.coords() - one_step.coords()).abs().max() < 1e-9);
    }

    #[test]
    fn canonicalize_is_idempotent(p in arb_point()) {
        let convention = QuotientConvention::default();
        let c = canonicalize(&p, &convention);
        let c2 = canonicalize(&c.point, &convention);
        prop_assert_eq!(c2.gamma, LatticeElement::identity());
        prop_assert_eq!(c2.wraps, (0, 0));
        prop_assert_eq!(c2.point, c.point);
    }

    #[test]
    fn quotient_distance_vanishes_on_orbits(p in arb_point(), g in arb_gamma()) {
        // distance to a small lattice translate of oneself is zero
        prop_assert!(quotient_distance(&p, &p) < 1e-12);
        let q = lattice_act(g, &p);
        prop_assert!(quotient_distance(&p, &q) < 1e-8);
    }

    #[test]
    fn quotient_distance_is_symmetric(p in arb_point(), q in arb_point()) {
        let a = quotient_distance(&p, &q);
        let b = quotient_distance(&q, &p);
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn form_eval_flips_sign_exactly(
        coeffs in proptest::collection::vec(-3.0..3.0f64, 10),
        v in proptest::collection::vec(-2.0..2.0f64, 15),
        swap in 0usize..3,
    ) {
        // degree-3 form in dimension 5 has C(5,3) = 10 coefficients
        let omega = KForm::constant(5, 3, coeffs);
        let p = ChartPoint::new(&[0.0; 5]);
        let mut vs: Vec<DVector<f64>> = v.chunks(5).map(DVector::from_column_slice).collect();
        let refs: Vec<&DVector<f64>> = vs.iter().collect();
        let base = omega.eval(&p, &refs).unwrap();
        let other = (swap + 1) % 3;
        vs.swap(swap, other);
        let refs2: Vec<&DVector<f64>> = vs.iter().collect();
        let swapped = omega.eval(&p, &refs2).unwrap();
        if swap != other {
            prop_assert_eq!(base, -swapped);
        }
    }

    #[test]
    fn repeated_argument_evaluates_to_exact_zero(
        coeffs in proptest::collection::vec(-3.0..3.0f64, 10),
        v in proptest::collection::vec(-2.0..2.0f64, 10),
    ) {
        let omega = KForm::constant(5, 3, coeffs);
        let p = ChartPoint::new(&[0.0; 5]);
        let vs: Vec<DVector<f64>> = v.chunks(5).map(DVector::from_column_slice).collect();
        let value = omega.eval(&p, &[&vs[0], &vs[1], &vs[0]]).unwrap();
        prop_assert_eq!(value, 0.0);
    }
}
