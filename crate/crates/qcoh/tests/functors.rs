use proptest::prelude::*;

use qcoh::functors::{adjunction_round_trips, decomposition_sequence, evaluate, HomProblem};
use qcoh::quiver::{supp, vertices, Term};
use qcoh::{MultiDegree, Rational, TwistPresentation, Vertex};

type Q = Rational;

/// `coker(O(-k) --x^e--> O(0))`, a monomial quotient of the structure sheaf.
fn monomial_quotient(e: &[i64]) -> TwistPresentation<Q> {
    let k: i64 = e.iter().sum();
    let t = Term { coef: Q::from_integer(1.into()), exp: MultiDegree(e.to_vec()) };
    TwistPresentation::new(e.len() - 1, vec![0], vec![-k], vec![vec![vec![t]]], None).unwrap()
}

#[test]
fn free_sheaf_decomposes_with_full_maximal_vertex() {
    let p = TwistPresentation::<Q>::twist(2, 0);
    let d = decomposition_sequence(&p, 4).unwrap();
    assert_eq!(d.maximal, vec![Vertex::full(2)]);
    assert!(d.kernel_support.is_empty());
    assert!(d.exact && d.strict);
}

#[test]
fn evaluation_agrees_with_slices() {
    let p = monomial_quotient(&[1, 1, 0]);
    for v in vertices(2) {
        let fam = evaluate(&p, &v, 3).unwrap();
        let total: usize = p.keys_at(&v, 3).iter().map(|k| p.slice(&v, k, 3).unwrap().dim()).sum();
        assert_eq!(fam.total_dim(), total);
    }
}

#[test]
fn unit_is_compatible_with_every_edge() {
    let p = monomial_quotient(&[0, 2]);
    for v in vertices(1) {
        let prob = HomProblem::new(&p, v, &p, MultiDegree(vec![0, 0]), 3).unwrap();
        let unit = prob.unit().unwrap();
        prob.check_commutes(&unit).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_is_exact_and_strict(e in proptest::collection::vec(0i64..3, 2..=3)) {
        prop_assume!(e.iter().sum::<i64>() > 0);
        let p = monomial_quotient(&e);
        let w = p.entry_reach() + p.n() + 2;
        let d = decomposition_sequence(&p, w).unwrap();
        prop_assert!(d.exact);
        prop_assert!(d.strict);
        prop_assert_eq!(d.support, supp(&p, w).unwrap());
        for s in &d.slices {
            prop_assert_eq!(s.module + s.cokernel, s.kernel + s.middle);
        }
    }

    #[test]
    fn transposes_round_trip(e in proptest::collection::vec(0i64..2, 2), seed in 0u64..1000) {
        prop_assume!(e.iter().sum::<i64>() > 0);
        let p = monomial_quotient(&e);
        for v in vertices(1) {
            let r = adjunction_round_trips(&p, &v, &p, 3, 1, seed).unwrap();
            prop_assert!(r.failures.is_empty(), "{:?}", r.failures);
        }
    }

    #[test]
    fn support_is_down_closed(e in proptest::collection::vec(0i64..3, 3)) {
        prop_assume!(e.iter().sum::<i64>() > 0);
        let p = monomial_quotient(&e);
        let s = supp(&p, 4).unwrap();
        // x^e vanishes nowhere on a chart where every variable of e is inverted
        for v in vertices(2) {
            let inverted = e.iter().enumerate().all(|(i, &a)| a == 0 || v.contains(i));
            prop_assert_eq!(s.contains(&v), !inverted);
        }
        prop_assert!(qcoh::quiver::is_down_closed(&s));
    }
}
