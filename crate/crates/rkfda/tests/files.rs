use rkfda::io::{format_dataset, format_report, parse_dataset, parse_report, read_dataset, write_dataset, ReportRow};
use rkfda::model_file::{load_model, read_model, save_model, write_model};
use rkfda::plan::{ExperimentPlan, Method};
use rkfda::Error;
use rkfda_core::simulate::{gen_model_dataset, toy_model, StreamKey};
use rkfda_core::{make_grid, train_centroid, train_knn, train_rkc, LabeledDataset, PriorMode};

fn toy_sample(n: usize, seed: u64) -> LabeledDataset {
    let grid = make_grid(100, 0.0, 1.0).unwrap();
    gen_model_dataset(&toy_model(), n, &grid, StreamKey::new(seed)).unwrap()
}

#[test]
fn dataset_round_trip_is_exact() {
    let ds = toy_sample(40, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_dataset(&path, &ds).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.labels(), ds.labels());
    assert_eq!(back.grid().len(), ds.grid().len());
    for (a, b) in back.grid().points().iter().zip(ds.grid().points()) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in back.curves().iter().zip(ds.curves()) {
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}

#[test]
fn dataset_header_keeps_six_significant_digits() {
    let mut buf = Vec::new();
    format_dataset(&mut buf, &toy_sample(4, 1)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("label,t_0,t_0.010101010101010102,"), "{header}");
}

#[test]
fn dataset_parse_errors() {
    let cases: [(&str, Option<usize>); 5] = [
        ("", Some(1)),
        ("time,t_0\n", Some(1)),
        ("label,t_0,t_0.5\n0,1\n", Some(2)),
        ("label,t_0,t_0.5\n0,1,2\n1,x,2\n", Some(3)),
        ("label,t_0,t_0.5,t_2\n0,1,2,3\n", Some(1)),
    ];
    for (text, line) in cases {
        match parse_dataset(text.as_bytes()) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn report_round_trip() {
    let rows = vec![
        ReportRow {
            model: "TOY".into(),
            n: 50,
            method: "RK-C".into(),
            runs: 49,
            mean_accuracy: 0.8125,
            sd_accuracy: 0.0312,
            mean_d: Some(4.5),
            failed_runs: 1,
        },
        ReportRow {
            model: "G2".into(),
            n: 100,
            method: "kNN".into(),
            runs: 50,
            mean_accuracy: 0.7,
            sd_accuracy: 0.01,
            mean_d: None,
            failed_runs: 0,
        },
    ];
    let mut buf = Vec::new();
    format_report(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("model,n,method,runs,mean_accuracy,sd_accuracy,mean_d,failed_runs\n"));
    assert_eq!(parse_report(buf.as_slice()).unwrap(), rows);
}

#[test]
fn model_files_round_trip() {
    let train = toy_sample(120, 5);
    let test = toy_sample(200, 6);
    let idx = vec![25, 50, 74];
    let models = [
        train_rkc(&train, &idx, PriorMode::Estimated).unwrap(),
        train_knn(&train, 5).unwrap(),
        train_centroid(&train, 4).unwrap(),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, clf) in models.iter().enumerate() {
        let path = dir.path().join(format!("m{i}.txt"));
        save_model(&path, clf).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.grid(), clf.grid());
        for (x, _) in test.iter() {
            assert_eq!(back.classify(x).unwrap(), clf.classify(x).unwrap());
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_model(&mut a, clf).unwrap();
        write_model(&mut b, &back).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn model_file_errors() {
    let cases = [
        "",
        "not a model\n",
        "rkfda-model 1\nkind svm\ngrid 3 0 1\n",
        "rkfda-model 1\nkind rkc\ngrid 3 0 1\nindices 1\nalphas 1\nmidpoint 0\n",
        "rkfda-model 1\nkind rkc\ngrid 3 0 1\nindices 1\nalphas one\nmidpoint 0\nprior 0.5\n",
    ];
    for text in cases {
        let err = read_model(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{text:?}: {err}");
    }
}

#[test]
fn plan_defaults_and_validation() {
    let plan = ExperimentPlan::parse("models = [\"G2\"]\nsample_sizes = [50]\n").unwrap();
    assert_eq!(plan.runs, 50);
    assert_eq!(plan.test_size, 1000);
    assert_eq!(plan.methods, Method::ALL.to_vec());
    assert_eq!(plan.knn_ks, vec![1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21]);
    let m = ExperimentPlan::parse("models = [\"G2\"]\nsample_sizes = [50]\nmethods = [\"rk-c\", \"KNN\"]\n").unwrap();
    assert_eq!(m.methods, vec![Method::RkC, Method::Knn]);
    assert!(matches!(
        ExperimentPlan::parse("models = [\"G2\"]\nsample_sizes = [50]\nruns = 0\n"),
        Err(Error::Usage(_))
    ));
    assert!(matches!(ExperimentPlan::parse("models = []\nsample_sizes = [50]\n"), Err(Error::Usage(_))));
    assert!(matches!(
        ExperimentPlan::parse("models = [\"G2\"]\nsample_sizes = [50]\nspeed = 3\n"),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        ExperimentPlan::parse("models = [\"G2\"]\nsample_sizes = [50]\nmethods = [\"SVM\"]\n"),
        Err(Error::Parse { .. })
    ));
}
