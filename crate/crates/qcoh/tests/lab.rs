use std::sync::Arc;

use proptest::prelude::*;

use qcoh::lab::{
    am_sequence_check, complete_resolution, enumerate_universe, ext_dim, gext_dim, gorenstein_predicates, parse_module,
    proj_resolution, tate_ext_dim, tate_ext_dim_injective, tate_table, FiniteRing, FinModule,
};

fn ring(s: &str) -> Arc<FiniteRing> {
    Arc::new(FiniteRing::parse(s).unwrap())
}

/// Homomorphisms counted by brute force over all assignments of generators.
fn count_homs(m: &FinModule, n: &FinModule) -> usize {
    let g = m.gens();
    let mut count = 0;
    let mut images = vec![0u32; g];
    loop {
        let respects = m.relations().iter().all(|rel| n.combine(rel, &images) == 0);
        count += usize::from(respects);
        let mut k = 0;
        loop {
            if k == g {
                return count;
            }
            images[k] += 1;
            if (images[k] as usize) < n.size() {
                break;
            }
            images[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn hom_sets_match_brute_force() {
    for spec in ["Zmod:4", "GF:2:x^2"] {
        let u = enumerate_universe(&ring(spec), 2, 2, 16).unwrap();
        for m in &u.modules {
            for n in &u.modules {
                assert_eq!(m.homs(n).unwrap().len(), count_homs(m, n), "{spec}: {m:?} -> {n:?}");
            }
        }
    }
}

#[test]
fn ext_zero_is_hom() {
    let r = ring("Zmod:4");
    let u = enumerate_universe(&r, 2, 2, 16).unwrap();
    for m in &u.modules {
        for n in &u.modules {
            // Hom(M, N) is a Z/4-module whose length is log_2 of its size
            let size = count_homs(m, n);
            assert_eq!(1usize << ext_dim(m, n, 0).unwrap(), size);
            assert_eq!(gext_dim(m, n, 0).unwrap(), ext_dim(m, n, 0).unwrap());
        }
    }
}

#[test]
fn residue_field_of_larger_rings() {
    for spec in ["Zmod:8", "Zmod:9", "GF:3:x^2"] {
        let r = ring(spec);
        assert!(r.is_self_injective(), "{spec}");
        let k = FinModule::residue(&r);
        for i in -2..=2 {
            assert_eq!(tate_ext_dim(&k, &k, i).unwrap(), 1, "{spec} {i}");
        }
    }
}

#[test]
fn products_of_fields_have_no_tate_cohomology() {
    let r = ring("Zmod:6");
    let m = parse_module(&r, "k|R").unwrap();
    assert!(tate_table(&m, &m, -2, 2).unwrap().entries.iter().all(|&(_, d)| d == 0));
    let rep = gorenstein_predicates(&r, 36).unwrap();
    assert!(rep.predicates.conditions.iter().all(|c| c.holds));
    assert!(rep.consistent());
}

#[test]
fn am_sequence_over_dual_numbers() {
    let u = enumerate_universe(&ring("GF:2:x^2"), 2, 2, 16).unwrap();
    for m in &u.modules {
        for n in &u.modules {
            let rep = am_sequence_check(m, n, 5).unwrap();
            assert!(rep.exact && rep.lengths_consistent, "{} {}", rep.module, rep.against);
        }
    }
}

fn z4_module() -> impl Strategy<Value = Vec<Vec<u8>>> {
    proptest::collection::vec(proptest::collection::vec(0u8..4, 2), 0..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tate_balance(rels in z4_module(), i in -4i64..=4) {
        let r = ring("Zmod:4");
        let m = FinModule::new(&r, 2, rels).unwrap();
        let k = FinModule::residue(&r);
        prop_assert_eq!(tate_ext_dim(&m, &k, i).unwrap(), tate_ext_dim_injective(&m, &k, i).unwrap());
        prop_assert_eq!(tate_ext_dim(&k, &m, i).unwrap(), tate_ext_dim_injective(&k, &m, i).unwrap());
    }

    #[test]
    fn tate_window_invariance(rels in z4_module(), m in 1i64..=3) {
        let r = ring("GF:2:x^2");
        let rels: Vec<Vec<u8>> = rels.into_iter().map(|v| v.into_iter().map(|x| x % 4).collect()).collect();
        let x = FinModule::new(&r, 2, rels).unwrap();
        let k = FinModule::residue(&r);
        let narrow = tate_table(&x, &k, -m, m).unwrap();
        let wide = tate_table(&x, &k, -m - 2, m + 2).unwrap();
        for (i, d) in narrow.entries {
            prop_assert!(wide.entries.contains(&(i, d)));
        }
    }

    #[test]
    fn tate_agrees_with_ext_in_positive_degrees(rels in z4_module(), i in 1usize..=4) {
        let r = ring("Zmod:4");
        let m = FinModule::new(&r, 2, rels).unwrap();
        let k = FinModule::residue(&r);
        prop_assert_eq!(tate_ext_dim(&m, &k, i as i64).unwrap(), ext_dim(&m, &k, i).unwrap());
    }

    #[test]
    fn resolutions_are_exact_and_complete(rels in z4_module()) {
        let r = ring("Zmod:4");
        let m = FinModule::new(&r, 2, rels).unwrap();
        let res = proj_resolution(&m, 3).unwrap();
        res.verify().unwrap();
        let t = complete_resolution(&m, -3, 3).unwrap();
        t.verify().unwrap();
        prop_assert!(t.syzygy(0).unwrap().is_isomorphic(&m).unwrap());
    }

    #[test]
    fn isomorphism_is_an_equivalence(a in z4_module(), b in z4_module()) {
        let r = ring("Zmod:4");
        let x = FinModule::new(&r, 2, a).unwrap();
        let y = FinModule::new(&r, 2, b).unwrap();
        prop_assert!(x.is_isomorphic(&x).unwrap());
        prop_assert_eq!(x.is_isomorphic(&y).unwrap(), y.is_isomorphic(&x).unwrap());
        if x.is_isomorphic(&y).unwrap() {
            prop_assert_eq!(x.size(), y.size());
            prop_assert_eq!(x.fingerprint(), y.fingerprint());
        }
    }
}
