use bcast_core::{SeedSpec, TreeShape};
use bcast_experiments::config::Corruption;
use bcast_experiments::row::parse_json;
use bcast_experiments::scan::p_sd_point;
use bcast_experiments::{
    emit, parse_csv, render, run_and_emit, run_experiment, Error, ExperimentConfig, ExperimentKind, OutputFormat,
    ResultRow,
};
use proptest::prelude::*;

fn small_ks() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::KsScan, 11);
    cfg.k = vec![2];
    cfg.theta = vec![0.7];
    cfg.d = vec![4];
    cfg.trials = 200;
    cfg
}

#[test]
fn config_errors_are_reported_before_work() {
    let bad_version =
        r#"{"schema_version": 9, "experiment": "ks-scan", "seed": 1, "k": [2], "theta": [0.5], "d": [2]}"#;
    assert!(matches!(ExperimentConfig::from_json_str(bad_version), Err(Error::Config(_))));
    let unknown =
        r#"{"schema_version": 1, "experiment": "ks-scan", "seed": 1, "k": [2], "theta": [0.5], "d": [2], "depth": 3}"#;
    assert!(matches!(ExperimentConfig::from_json_str(unknown), Err(Error::Config(_))));
    let mut cfg = small_ks();
    cfg.theta = vec![1.5];
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn same_config_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_ks();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_and_emit(&cfg, Some(&a)).unwrap();
    run_and_emit(&cfg, Some(&b)).unwrap();
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(parse_csv(&text).unwrap().len(), 3);
}

#[test]
fn emit_writes_json_and_refuses_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let rows = run_experiment(&small_ks()).unwrap().rows;
    let path = dir.path().join("rows.json");
    emit(&rows, OutputFormat::Json, &path).unwrap();
    let back = parse_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.len(), rows.len());
    assert!(matches!(emit(&[], OutputFormat::Csv, &dir.path().join("empty.csv")), Err(Error::EmptyRows)));
}

#[test]
fn corrupted_generator_is_caught_and_named() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::EquivalenceSuite, 5);
    cfg.k = vec![2];
    cfg.d = vec![2];
    cfg.theta = vec![0.5];
    cfg.trials = 5000;
    cfg.corrupt = Some(Corruption { generator: "path-product".into(), theta_offset: 0.25 });
    let out = run_experiment(&cfg).unwrap();
    assert!(!out.passed());
    let failed: Vec<_> = out.failures().map(|c| c.name.clone()).collect();
    assert!(failed.iter().any(|n| n.starts_with("exact") && n.contains("path-product")), "{failed:?}");
    assert!(failed.iter().all(|n| n.contains("path-product")), "{failed:?}");

    cfg.corrupt = None;
    let clean = run_experiment(&cfg).unwrap();
    assert!(clean.passed(), "{:?}", clean.failures().collect::<Vec<_>>());
}

#[test]
fn moderate_noise_barely_moves_wide_trees() {
    // k = 15, theta = 0.7, d = 4: P at s = 0.3 stays within 0.05 of s = 0
    let shape = TreeShape::new(15, 4).unwrap();
    let seed = SeedSpec::new(3, "noise-example");
    let clean = p_sd_point(&shape, 0.7, 0.0, 2000, &seed.with_tag("s=0")).unwrap();
    let noisy = p_sd_point(&shape, 0.7, 0.3, 2000, &seed.with_tag("s=0.3")).unwrap();
    assert!((clean.accuracy - noisy.accuracy).abs() <= 0.05, "{clean:?} vs {noisy:?}");
}

fn arb_row() -> impl Strategy<Value = ResultRow> {
    (
        prop::sample::select(vec!["ks-scan", "noise-scan", "a5-accuracy"]),
        1usize..100,
        "[a-z0-9 .=,\"]{0,12}",
        0u32..12,
        0.0f64..0.5,
        1u64..100_000,
        0.0f64..=1.0,
        0.0f64..0.5,
        any::<u64>(),
    )
        .prop_map(|(e, k, label, d, s, trials, acc, se, seed)| ResultRow {
            experiment: e.into(),
            k,
            theta_or_channel: label,
            d,
            s,
            estimator: "majority".into(),
            trials,
            accuracy: acc,
            stderr: se,
            advantage: acc - 0.5,
            seed,
            wall_ms: 0,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_byte_identical(rows in prop::collection::vec(arb_row(), 1..20)) {
        let a = render(&rows, OutputFormat::Csv).unwrap();
        let back = parse_csv(std::str::from_utf8(&a).unwrap()).unwrap();
        prop_assert_eq!(render(&back, OutputFormat::Csv).unwrap(), a);
    }

    #[test]
    fn row_order_does_not_change_output(rows in prop::collection::vec(arb_row(), 1..20)) {
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(render(&rows, OutputFormat::Json).unwrap(), render(&rev, OutputFormat::Json).unwrap());
    }
}
