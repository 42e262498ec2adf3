use locktree_core::construct::{build_chain_of_trees, build_locked_config, build_open_config, check_constraints};
use locktree_core::document::{Document, Report};
use locktree_core::geom::{Point2, Tolerance};
use locktree_core::model::tree_from_edges;
use locktree_core::motion::{probe, ProbeKind, ProbeStrategy};
use locktree_core::petal::PetalParams;
use proptest::prelude::*;

proptest! {
    #[test]
    fn round_trip_any_finite_placement(
        coords in prop::collection::vec((-1e12f64..1e12, -1e-300f64..1e-300), 4),
        lens in prop::collection::vec(1e-9f64..1e9, 3),
    ) {
        let tree = tree_from_edges(4, &[(0, 1, lens[0]), (1, 2, lens[1]), (1, 3, lens[2])], 0);
        let mut doc = Document::new(tree, None);
        doc.configurations.insert("x".into(), coords.iter().map(|&(x, y)| Point2::new(x, y)).collect());
        let back = Document::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(back, doc);
    }
}

#[test]
fn full_document_round_trip_through_file() {
    let p = PetalParams::new(5, 0.9511, 0.299).unwrap();
    let locked = build_locked_config(&p).unwrap();
    let mut doc = Document::new(locked.tree().as_ref().clone(), Some(p));
    doc.insert_configuration("locked", &locked);
    doc.insert_configuration("open", &build_open_config(&p).unwrap());
    doc.insert_report("constraints", Report::Constraints(check_constraints(5, 0.9511, 0.299)));
    let out = probe(
        &locked,
        ProbeStrategy::new(ProbeKind::anneal(1), 3, 50),
        &p,
        &Tolerance::default(),
    )
    .unwrap();
    doc.insert_report("probe", Report::Probe(out.record()));
    doc.insert_report("monitor", Report::Monitor(out.report.clone()));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.json");
    doc.save(&path).unwrap();
    assert_eq!(Document::load(&path).unwrap(), doc);
}

#[test]
fn chain_document_configurations_rebuild() {
    let fam = build_chain_of_trees(2, None).unwrap();
    let mut doc = Document::new(fam.tree().as_ref().clone(), Some(*fam.params()));
    for label in 0..fam.label_count() {
        doc.insert_configuration(&fam.label_name(label), &fam.configuration(label).unwrap());
    }
    let back = Document::from_json(&doc.to_json()).unwrap();
    for name in back.configurations.keys() {
        assert!(back.configuration(name, &Tolerance::default()).is_ok());
    }
}
