use proptest::prelude::*;
use wmog_core::relation::{dis, wlp, Relation, StateSet};

fn instance(n: usize) -> impl Strategy<Value = (Relation, Relation, StateSet, StateSet)> {
    let rel = proptest::collection::vec(any::<bool>(), n * n)
        .prop_map(move |bits| Relation::from_pairs(n, (0..n * n).filter(|&i| bits[i]).map(|i| (i / n, i % n))));
    let set = proptest::collection::vec(any::<bool>(), n).prop_map(move |b| StateSet::from_fn(n, |i| b[i]));
    (rel.clone(), rel, set.clone(), set)
}

fn arbitrary() -> impl Strategy<Value = (Relation, Relation, StateSet, StateSet)> {
    (1usize..=6).prop_flat_map(instance)
}

/// Definitional wlp, quantifying over all pairs.
fn naive_wlp(r: &Relation, p: &StateSet) -> StateSet {
    let n = r.universe();
    StateSet::from_fn(n, |s| (0..n).all(|s2| !r.contains(s, s2) || p.contains(s2)))
}

fn intersect(a: &Relation, b: &Relation) -> Relation {
    Relation::from_pairs(a.universe(), a.pairs().filter(|&(x, y)| b.contains(x, y)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_definition((r, _, p, _) in arbitrary()) {
        prop_assert_eq!(wlp(&r, &p), naive_wlp(&r, &p));
        prop_assert_eq!(dis(&r), naive_wlp(&r, &StateSet::empty(r.universe())));
    }

    #[test]
    fn non_aborting((r, _, _, _) in arbitrary()) {
        let full = StateSet::full(r.universe());
        prop_assert_eq!(wlp(&r, &full), full);
    }

    #[test]
    fn anti_monotonicity((r, r2, p, q) in arbitrary()) {
        let sub = intersect(&r, &r2);
        let sup = p.union(&q);
        prop_assert!(wlp(&r, &p).is_subset(&wlp(&sub, &sup)));
    }

    #[test]
    fn composition((r, r2, p, _) in arbitrary()) {
        prop_assert_eq!(wlp(&r, &wlp(&r2, &p)), wlp(&r.compose(&r2), &p));
    }

    #[test]
    fn relation_application((r, _, p, _) in arbitrary()) {
        prop_assert!(r.image(&wlp(&r, &p)).is_subset(&p));
    }

    #[test]
    fn conjunctivity((r, _, p, q) in arbitrary()) {
        prop_assert_eq!(wlp(&r, &p).intersection(&wlp(&r, &q)), wlp(&r, &p.intersection(&q)));
    }

    #[test]
    fn disjunctivity((r, _, p, q) in arbitrary()) {
        prop_assert!(wlp(&r, &p).union(&wlp(&r, &q)).is_subset(&wlp(&r, &p.union(&q))));
    }
}

#[test]
fn disjunctivity_is_strict_for_nondeterminism() {
    let r = Relation::from_pairs(2, [(0, 0), (0, 1)]);
    let p = StateSet::from_indices(2, [0]);
    let q = StateSet::from_indices(2, [1]);
    let lhs = wlp(&r, &p).union(&wlp(&r, &q));
    let rhs = wlp(&r, &p.union(&q));
    assert_eq!(lhs, StateSet::from_indices(2, [1]));
    assert_eq!(rhs, StateSet::full(2));
}

#[test]
fn empty_relation_is_everywhere_disabled() {
    let r = Relation::empty(4);
    assert_eq!(wlp(&r, &StateSet::empty(4)), StateSet::full(4));
    assert_eq!(dis(&r), StateSet::full(4));
}
