use std::collections::BTreeSet;

use wmog_core::axioms::{check_all, check_axiom, AxiomId};
use wmog_core::model::{BuildOptions, InterfMode, ModelError, ModelInstance, ScModel, TsoModel};
use wmog_core::syntax::{Config, Register, Tid};

fn wrc() -> Config {
    Config::new(
        vec![Tid(1), Tid(2), Tid(3)],
        vec!["x".into(), "y".into()],
        vec![
            Register { name: "r1".into(), owner: Tid(2) },
            Register { name: "r2".into(), owner: Tid(3) },
            Register { name: "r3".into(), owner: Tid(3) },
        ],
        vec![0, 1],
    )
    .unwrap()
}

#[test]
fn sc_satisfies_all_fifteen() {
    let m = ModelInstance::build_sc(&wrc()).unwrap();
    let r = check_all(&m);
    assert_eq!(r.states, 32);
    assert_eq!(r.results.len(), 15);
    assert!(r.all_hold(), "{:#?}", r.failed());
}

#[test]
fn tso_bound_one_satisfies_all_fifteen() {
    let m = ModelInstance::build_tso(&wrc(), 1).unwrap();
    let r = check_all(&m);
    assert!(r.all_hold(), "{:#?}", r.results.iter().filter(|x| !x.holds).collect::<Vec<_>>());
}

#[test]
fn results_are_in_canonical_order() {
    let m = ModelInstance::build_sc(&wrc()).unwrap();
    let ids: Vec<AxiomId> = check_all(&m).results.iter().map(|r| r.axiom).collect();
    assert_eq!(ids, AxiomId::ALL.to_vec());
}

#[test]
fn constant_vmax_breaks_tso() {
    let model = TsoModel::with_trivial_vmax(wrc(), 1).unwrap();
    let m = ModelInstance::build(&model, &BuildOptions::default()).unwrap();
    let r = check_all(&m);
    let failed = r.failed();
    assert!(failed.contains(&AxiomId::C2) || failed.contains(&AxiomId::RW7), "{failed:?}");
    let c2 = r.results.iter().find(|x| x.axiom == AxiomId::C2).unwrap();
    let witness = c2.counterexample.as_ref().expect("C2 witness");
    assert!(witness.state.contains("buf"), "{}", witness.state);
}

#[test]
fn transition_sized_interference_breaks_read_commutation_on_sc() {
    let opts = BuildOptions { interf: InterfMode::Default, ..Default::default() };
    let m = ModelInstance::build(&ScModel::new(wrc()), &opts).unwrap();
    let r = check_axiom(&m, AxiomId::RW2);
    assert!(!r.holds);
    assert!(r.counterexample.unwrap().instance.contains("rd(x"));
    let failed: BTreeSet<_> = check_all(&m).failed();
    assert_eq!(failed, BTreeSet::from([AxiomId::RW2]));
}

#[test]
fn initial_state_is_view_maximal_everywhere() {
    for m in [ModelInstance::build_sc(&wrc()).unwrap(), ModelInstance::build_tso(&wrc(), 1).unwrap()] {
        assert!(check_axiom(&m, AxiomId::C1).holds);
    }
}

#[test]
fn oversized_instances_are_rejected_at_build_time() {
    assert!(matches!(ModelInstance::build_tso(&wrc(), 2), Err(ModelError::StateCapExceeded(_))));
}
