use rkfda::catalog::Catalog;
use rkfda::Error;
use rkfda_core::make_grid;
use rkfda_core::simulate::{gen_model_dataset, toy_model, ModelKind, StreamKey};

#[test]
fn every_builtin_model_resolves_and_samples() {
    let catalog = Catalog::builtin();
    let ids: Vec<&str> = catalog.ids().collect();
    assert_eq!(ids.len(), 74);
    let grid = make_grid(100, 0.0, 1.0).unwrap();
    for id in ids {
        let m = catalog.get(id).unwrap();
        m.validate().unwrap();
        assert!(!m.relevant.is_empty(), "{id}");
        let ds = gen_model_dataset(m, 20, &grid, StreamKey::new(1)).unwrap();
        assert_eq!(ds.len(), 20);
        assert!(ds.curves().iter().all(|c| c.values().iter().all(|v| v.is_finite())), "{id}");
    }
}

#[test]
fn toy_entry_matches_the_library_model() {
    let catalog = Catalog::builtin();
    let entry = catalog.get("TOY").unwrap();
    let lib = toy_model();
    let grid = make_grid(257, 0.0, 1.0).unwrap();
    let a = entry.mean_difference(&grid).unwrap();
    let b = lib.mean_difference(&grid).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    assert_eq!(entry.relevant, lib.relevant);
    assert_eq!(entry.exclude, lib.exclude);
    assert_eq!(entry.prior, 0.5);
}

#[test]
fn g2_has_linear_mean_difference() {
    let catalog = Catalog::builtin();
    let g2 = catalog.get("G2").unwrap();
    let grid = make_grid(100, 0.0, 1.0).unwrap();
    let m = g2.mean_difference(&grid).unwrap();
    for (v, t) in m.iter().zip(grid.points()) {
        assert!((v + t).abs() < 1e-12);
    }
    assert_eq!(g2.relevant, vec![1.0]);
    assert_eq!(g2.exclude, vec![0.0]);
}

#[test]
fn logistic_entry_uses_variable_time() {
    let catalog = Catalog::builtin();
    let l1 = catalog.get("L1-B").unwrap();
    let ModelKind::Logistic { link, .. } = &l1.kind else { panic!("L1-B is logistic") };
    assert_eq!(link.variables(), vec![65]);
    assert_eq!(l1.relevant.len(), 1);
    assert!((l1.relevant[0] - 64.0 / 99.0).abs() < 1e-15);
}

#[test]
fn mixture_model_keeps_right_endpoint() {
    let catalog = Catalog::builtin();
    let m7 = catalog.get("M7").unwrap();
    assert_eq!(m7.exclude, vec![0.0]);
    let ModelKind::TwoClass { class0, .. } = &m7.kind else { panic!("M7 has two classes") };
    assert_eq!(class0.components.len(), 2);
    assert!((class0.components[0].weight - 0.5).abs() < 1e-15);
}

#[test]
fn unknown_id_is_a_usage_error() {
    assert!(matches!(Catalog::builtin().get("NOPE"), Err(Error::Usage(_))));
}

#[test]
fn malformed_catalogs_are_parse_errors() {
    let bad = [
        "[[model]]\nid = \"A\"\nclass0 = \"Q\"\nclass1 = \"B\"\n",
        "[[model]]\nid = \"A\"\nclass0 = \"B + wobble\"\nclass1 = \"B\"\n",
        "[[model]]\nid = \"A\"\nmarginal = \"B\"\nlink = \"X200\"\n",
        "[[model]]\nid = \"A\"\nclass0 = \"B\"\nclass1 = \"B\"\ncolour = 1\n",
        "[[model]]\nid = \"A\"\nclass0 = \"B\"\nclass1 = \"B\"\n[[model]]\nid = \"A\"\nclass0 = \"B\"\nclass1 = \"B\"\n",
    ];
    for text in bad {
        let err = Catalog::parse(text).unwrap_err();
        assert!(matches!(err, Error::Parse { .. } | Error::Usage(_)), "{text}: {err}");
    }
}

#[test]
fn custom_catalog_round_trip() {
    let text = "[[model]]\nid = \"S\"\nprior = 0.3\nclass0 = \"OU(2,0.5) + 2*t\"\nclass1 = \"OU(2,0.5)\"\nrelevant_times = [0.5]\n";
    let catalog = Catalog::parse(text).unwrap();
    let s = catalog.get("S").unwrap();
    assert_eq!(s.prior, 0.3);
    assert_eq!(s.relevant, vec![0.5]);
    assert!(s.exclude.is_empty());
}
