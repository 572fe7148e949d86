use std::collections::HashSet;

use coarse_core::absorbing::{
    absorb_witness, check_anti_absorbing, in_double_product, AntiAbsorbingCertificate, AntiPair,
};
use coarse_core::catalog::parse_set;
use coarse_core::constructions::{build_infdiv, build_isolated_absorbing, build_thm_a};
use coarse_core::divisibility::{
    certify_not_2_divisible, check_division, isolation_of, o_set, DivisionWitness,
};
use coarse_core::limits::{
    compose_evidence, pattern_of, preorder_evidence, translate_action_compat,
};
use coarse_core::relations::{check_witness, find_witness, hausdorff_window, Budgets};
use coarse_core::{Element, Group, LazySet, Status, Window};
use proptest::prelude::*;

fn groups() -> Vec<Group> {
    vec![Group::integers(1), Group::integers(2), Group::free(2)]
}

/// A group index and element indices into `ball(radius)` of that group.
fn picks(radius: u32, max_len: usize) -> impl Strategy<Value = (usize, Vec<usize>)> {
    (0..3usize).prop_flat_map(move |gi| {
        let n = groups()[gi].ball(radius).unwrap().len();
        (Just(gi), proptest::collection::vec(0..n, 1..=max_len))
    })
}

fn elems(g: &Group, radius: u32, idx: &[usize]) -> Vec<Element> {
    let b = g.ball(radius).unwrap();
    idx.iter().map(|&i| b[i % b.len()].clone()).collect()
}

fn finite(g: &Group, xs: &[Element]) -> LazySet {
    LazySet::finite(g, xs.iter().cloned())
}

fn window(a: &LazySet, r: u32) -> Vec<Element> {
    a.restrict(Window::Ball(r)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn balls_nest_and_are_inverse_closed((gi, idx) in picks(4, 8), r in 0..4u32) {
        let g = &groups()[gi];
        let small = g.ball(r).unwrap();
        let big = g.ball(r + 1).unwrap();
        prop_assert_eq!(&big[..small.len()], &small[..]);
        for x in elems(g, 4, &idx) {
            prop_assert_eq!(small.contains(&x), g.length(&x) <= r);
            prop_assert_eq!(g.length(&g.inv(&x)), g.length(&x));
        }
        let fresh = groups()[gi].ball(r + 1).unwrap();
        prop_assert_eq!(&fresh[..], &big[..]);
    }

    #[test]
    fn translations_compose((gi, idx) in picks(3, 6), i in 0..25usize, j in 0..25usize) {
        let g = &groups()[gi];
        let a = finite(g, &elems(g, 3, &idx));
        let b = g.ball(2).unwrap();
        let (x, y) = (&b[i % b.len()], &b[j % b.len()]);
        prop_assert_eq!(window(&a.translate(y).translate(x), 6), window(&a.translate(&g.mul(x, y)), 6));
        prop_assert_eq!(
            window(&a.right_translate(y).right_translate(x), 6),
            window(&a.right_translate(&g.mul(y, x)), 6)
        );
    }

    #[test]
    fn products_distribute_over_unions((gi, idx) in picks(3, 8), split in 1..7usize, fsize in 1..4usize) {
        let g = &groups()[gi];
        let xs = elems(g, 3, &idx);
        let k = split.min(xs.len());
        let (a, b) = (finite(g, &xs[..k]), finite(g, &xs[k..]));
        let f: Vec<Element> = g.ball(1).unwrap().iter().take(fsize).cloned().collect();
        let lhs = window(&a.union(&b).unwrap().product(&f), 5);
        let rhs = window(&a.product(&f).union(&b.product(&f)).unwrap(), 5);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn restriction_is_monotone((gi, idx) in picks(4, 10), r in 0..4u32) {
        let g = &groups()[gi];
        let a = finite(g, &elems(g, 4, &idx));
        let small = window(&a, r);
        let big: Vec<Element> = window(&a, r + 2).into_iter().filter(|x| g.length(x) <= r).collect();
        prop_assert_eq!(small, big);
    }

    #[test]
    fn witnesses_compose((gi, ia) in picks(3, 6), ib in proptest::collection::vec(0..25usize, 1..4), ic in proptest::collection::vec(0..25usize, 1..3)) {
        let g = &groups()[gi];
        let a = finite(g, &elems(g, 3, &ia));
        let b = finite(g, &elems(g, 2, &ib.iter().map(|i| i % g.ball(2).unwrap().len()).collect::<Vec<_>>()));
        let c = finite(g, &elems(g, 2, &ic.iter().map(|i| i % g.ball(2).unwrap().len()).collect::<Vec<_>>()));
        let budgets = Budgets { max_norm: 6, max_size: 8 };
        let r = 4;
        let v1 = find_witness(&a, &b, Window::Ball(r), budgets).unwrap();
        prop_assert!(v1.is_verified());
        let f1 = v1.witness.unwrap();
        prop_assert!(check_witness(&a, &b, &f1, Window::Ball(r)).unwrap().is_verified());
        let pad = f1.iter().map(|x| g.length(x)).max().unwrap();
        let v2 = find_witness(&b, &c, Window::Ball(r + pad), budgets).unwrap();
        prop_assert!(v2.is_verified());
        let f12 = g.product(&f1, &v2.witness.unwrap());
        prop_assert!(check_witness(&a, &c, &f12, Window::Ball(r)).unwrap().is_verified());
    }

    #[test]
    fn hausdorff_zero_iff_equal_on_window((gi, ia) in picks(3, 6), ib in proptest::collection::vec(0..25usize, 1..6), r in 1..4u32) {
        let g = &groups()[gi];
        let a = finite(g, &elems(g, 3, &ia));
        let ib: Vec<usize> = ib.iter().map(|i| i % g.ball(2).unwrap().len()).collect();
        let b = finite(g, &elems(g, 2, &ib));
        let b = b.union(&a).unwrap();
        let b = if ia.len() % 2 == 0 { b } else { a.clone() };
        let same = window(&a, r) == window(&b, r);
        match hausdorff_window(&a, &b, Window::Ball(r), None) {
            Ok(d) => prop_assert_eq!(d == (0, 0), same),
            Err(_) => prop_assert!(window(&a, r).is_empty() || window(&b, r).is_empty()),
        }
    }

    #[test]
    fn refutations_are_monotone(k in 2..6i32, shift in 0..3i32, r in 3..8u32) {
        let z = Group::integers(1);
        let a = parse_set(&z, "Z:naturals").unwrap();
        let b = parse_set(&z, &format!("Z:mult:{k}")).unwrap();
        let f: Vec<Element> = (0..k - 1).map(|i| Element::vector(&[i + shift])).collect();
        let v = check_witness(&a, &b, &f, Window::Ball(r)).unwrap();
        if v.status == Status::RefutedUpTo {
            for more in 1..4 {
                let w = check_witness(&a, &b, &f, Window::Ball(r + more)).unwrap();
                prop_assert_eq!(w.status, Status::RefutedUpTo);
                prop_assert_eq!(&w.witness, &v.witness);
            }
        }
    }

    #[test]
    fn one_part_division_is_free((gi, idx) in picks(3, 8)) {
        let g = &groups()[gi];
        let a = finite(g, &elems(g, 3, &idx));
        let w = DivisionWitness { parts: vec![a.clone()], witnesses: vec![vec![g.identity()]] };
        prop_assert!(check_division(&a, &w, Window::Full).unwrap().is_verified());
    }

    #[test]
    fn isolation_is_right_invariant((gi, idx) in picks(3, 6), j in 0..25usize) {
        let g = &groups()[gi];
        let xs = elems(g, 3, &idx);
        let a = finite(g, &xs);
        let b = g.ball(2).unwrap();
        let h = &b[j % b.len()];
        let ah = a.right_translate(h);
        for x in &xs {
            prop_assert_eq!(isolation_of(&a, x, 8).unwrap(), isolation_of(&ah, &g.mul(x, h), 8).unwrap());
        }
    }

    #[test]
    fn absorption_is_monotone_in_f((gi, idx) in picks(1, 4), extra in proptest::collection::vec(0..5usize, 1..3)) {
        let g = &groups()[gi];
        let a = if gi == 2 { parse_set(g, "F:starts:a").unwrap() } else { parse_set(g, "all").unwrap().minus(&finite(g, &[g.identity()])).unwrap() };
        let f = elems(g, 1, &idx);
        let mut ff = f.clone();
        ff.extend(elems(g, 1, &extra));
        let big = absorb_witness(&a, &ff, 6).unwrap();
        if big.is_verified() {
            let small = absorb_witness(&a, &f, 6).unwrap();
            let x = big.witness.unwrap();
            prop_assert!(small.is_verified());
            prop_assert!(f.iter().all(|y| a.contains(&g.mul(y, &x)).unwrap()));
        }
    }

    #[test]
    fn double_product_matches_intersection((gi, ia) in picks(2, 5), it in proptest::collection::vec(0..5usize, 1..3), j in 0..60usize) {
        let g = &groups()[gi];
        let a = elems(g, 2, &ia);
        let t = elems(g, 1, &it);
        let b = g.ball(3).unwrap();
        let d = &b[j % b.len()];
        let ta: HashSet<Element> = g.product(&t, &a).into_iter().collect();
        let meets = g.product(&t, &a).iter().any(|x| ta.contains(&g.mul(d, x)));
        prop_assert_eq!(in_double_product(&a, &t, d, g), meets);
        let cert = AntiAbsorbingCertificate { pairs: vec![AntiPair { t, d: d.clone(), global: false }] };
        let v = check_anti_absorbing(&finite(g, &a), &cert, Window::Full).unwrap();
        prop_assert_eq!(v.is_verified(), !meets);
    }

    #[test]
    fn patterns_restrict_and_act((gi, idx) in picks(3, 8), i in 0..60usize, j in 0..60usize, r in 0..3u32) {
        let g = &groups()[gi];
        let a = finite(g, &elems(g, 3, &idx));
        let b = g.ball(3).unwrap();
        let (x, h) = (&b[i % b.len()], &b[j % b.len()]);
        let p = pattern_of(&a, x, r + 2).unwrap();
        prop_assert!(p.restrict(g, r).unwrap().same_shape(&pattern_of(&a, x, r).unwrap()));
        let lhs = pattern_of(&a.right_translate(h), x, r + 1).unwrap();
        let rhs = pattern_of(&a, &g.mul(h, x), r + 1).unwrap();
        prop_assert!(lhs.same_shape(&rhs));
        let support = pattern_of(&a, &g.inv(h), r + 1).unwrap().support(g).unwrap();
        prop_assert_eq!(support, o_set(&a, h).restrict(Window::Ball(r + 1)).unwrap());
        let f: Vec<Element> = b.iter().take(1 + i % 4).cloned().collect();
        prop_assert!(translate_action_compat(&f, &a, x, r + 1).unwrap().is_verified());
    }
}

#[test]
fn composed_evidence_rechecks() {
    let z = Group::integers(1);
    for k in [2, 3, 4] {
        let a = parse_set(&z, &format!("Z:naturals | Z:mult:{k}")).unwrap();
        let b = parse_set(&z, &format!("Z:mult:{k}")).unwrap();
        let c = parse_set(&z, &format!("Z:mult:{k}@1")).unwrap();
        let e1 = preorder_evidence(&a, &b, &[4, 8, 16], 40, None)
            .unwrap()
            .witness
            .unwrap();
        let e2 = preorder_evidence(&b, &c, &[2, 4, 8], 8, None)
            .unwrap()
            .witness
            .unwrap();
        let v = compose_evidence(&a, &c, &e1, &e2, &[2, 4, 8]).unwrap();
        assert_eq!(v.status, Status::ConsistentUpTo);
        let ev = v.witness.unwrap();
        for s in &ev.steps {
            let direct = pattern_of(&a, &s.g, s.radius).unwrap();
            assert_eq!(
                direct.support(&z).unwrap(),
                c.restrict(Window::Ball(s.radius)).unwrap()
            );
        }
    }
}

#[test]
fn constructions_are_deterministic_and_checkable() {
    for g in groups() {
        assert_eq!(
            build_thm_a(&g, 4).unwrap().state,
            build_thm_a(&g, 4).unwrap().state
        );
        assert_eq!(
            build_infdiv(&g, 5).unwrap().state,
            build_infdiv(&g, 5).unwrap().state
        );
    }
    let z = Group::integers(1);
    let n = 10;
    let c = build_isolated_absorbing(&z, n).unwrap();
    let targets: Vec<u32> = (1..n as u32).collect();
    let v = certify_not_2_divisible(&c.set(&z), &targets, 200).unwrap();
    assert!(v.is_verified(), "{v:?}");
}

/// An element isolated beyond `2·max|F| + 1` exposes every 2-part witness whose translators have norm at most `m`.
#[test]
fn gaps_refute_two_part_witnesses() {
    let z = Group::integers(1);
    let c = build_isolated_absorbing(&z, 8).unwrap();
    let a = c.set(&z);
    let xs = a.elements().unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = (proptest::collection::vec(any::<bool>(), xs.len()), 0..3u32);
    for _ in 0..64 {
        let (mask, m) =
            proptest::strategy::ValueTree::current(&strat.new_tree(&mut runner).unwrap());
        let p0: Vec<Element> = xs
            .iter()
            .zip(&mask)
            .filter(|p| *p.1)
            .map(|p| p.0.clone())
            .collect();
        let p1: Vec<Element> = xs
            .iter()
            .zip(&mask)
            .filter(|p| !*p.1)
            .map(|p| p.0.clone())
            .collect();
        let ball: Vec<Element> = z.ball(m).unwrap().to_vec();
        let w = DivisionWitness {
            parts: vec![finite(&z, &p0), finite(&z, &p1)],
            witnesses: vec![ball.clone(), ball],
        };
        let isolated =
            c.g.iter()
                .any(|g| isolation_of(&a, g, 2 * m + 1).unwrap().is_none());
        assert!(isolated);
        assert!(!check_division(&a, &w, Window::Full).unwrap().is_verified());
    }
}
