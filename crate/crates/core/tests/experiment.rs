use cantordiff::classify::classify_correlated;
use cantordiff::experiment::{
    emit_report, parse_distribution_spec, run_monte_carlo, DistributionSpec, ExperimentConfig,
    Report, RunOptions, CSV_HEADER,
};
use cantordiff::rational::rat;
use cantordiff::{Error, Execution, Limits};

fn cfg(spec: &str, depth: usize, replicas: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(
        DistributionSpec::Spec(spec.into()),
        None,
        depth,
        replicas,
        seed,
    )
}

#[test]
fn report_round_trip_and_tamper_check() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("correlated:2,3,2/3", 4, 25, 3);
    let rec = run_monte_carlo(&c, None, &RunOptions::default()).unwrap();
    let verdicts = vec![classify_correlated(2, 3, &rat(2, 3)).unwrap()];
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    emit_report(&rec, &verdicts, Some(&json), Some(&csv)).unwrap();

    let back = Report::load(&json).unwrap();
    assert_eq!(back.record.replicas, rec.replicas);
    assert_eq!(back.record.aggregates, rec.aggregates);
    assert_eq!(back.verdicts, verdicts);
    assert_eq!(back.record.config.seed, 3);
    assert!(back
        .record
        .replicas
        .iter()
        .enumerate()
        .all(|(i, r)| r.stream == i as u64));

    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 25 * 4);

    let original: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let bad = dir.path().join("bad.json");
    let tampered = |edit: &dyn Fn(&mut serde_json::Value)| {
        let mut v = original.clone();
        edit(&mut v);
        std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
        Report::load(&bad)
    };
    let bump = |v: &mut serde_json::Value| {
        let s = &mut v["record"]["replicas"][0]["survivors_first"][0];
        *s = serde_json::json!(s.as_u64().unwrap() + 1);
    };
    assert!(matches!(tampered(&bump), Err(Error::InvariantViolation(_))));
    let flip = |v: &mut serde_json::Value| {
        let f = &mut v["record"]["replicas"][0]["full"][0];
        *f = serde_json::json!(!f.as_bool().unwrap());
    };
    assert!(matches!(tampered(&flip), Err(Error::InvariantViolation(_))));
    assert!(tampered(&|_| {}).is_ok());
}

#[test]
fn same_seed_same_record() {
    let c = cfg("independent-uniform:3,3/5", 5, 40, 123);
    let seq = RunOptions {
        exec: Execution::Sequential,
        ..RunOptions::default()
    };
    let a = run_monte_carlo(&c, None, &seq).unwrap();
    let b = run_monte_carlo(&c, None, &RunOptions::default()).unwrap();
    assert_eq!(a.replicas, b.replicas);
    let other = run_monte_carlo(&cfg("independent-uniform:3,3/5", 5, 40, 124), None, &seq).unwrap();
    assert_ne!(a.replicas, other.replicas);
}

#[test]
fn survivor_cap_marks_partial() {
    let c = cfg("independent-uniform:4,1/2", 6, 60, 1);
    let opts = RunOptions {
        limits: Limits {
            max_survivors: 70,
            ..Limits::default()
        },
        ..RunOptions::default()
    };
    let rec = run_monte_carlo(&c, None, &opts).unwrap();
    assert!(rec.partial);
    assert!(rec.partial_reason.is_some());
    assert!(rec.replicas.len() < 60);
    assert!(rec
        .replicas
        .iter()
        .enumerate()
        .all(|(i, r)| r.replica == i as u64));
}

#[test]
fn empty_run_writes_header_only() {
    assert!(matches!(
        run_monte_carlo(
            &cfg("correlated:2,3,1/3", 2, 0, 0),
            None,
            &RunOptions::default()
        ),
        Err(Error::ParameterOutOfRange(_))
    ));
    let dir = tempfile::tempdir().unwrap();
    let mut rec = run_monte_carlo(
        &cfg("correlated:2,3,1/3", 2, 3, 0),
        None,
        &RunOptions::default(),
    )
    .unwrap();
    rec.replicas.clear();
    let csv = dir.path().join("e.csv");
    emit_report(&rec, &[], None, Some(&csv)).unwrap();
    assert_eq!(
        std::fs::read_to_string(csv).unwrap(),
        format!("{CSV_HEADER}\n")
    );
}

#[test]
fn config_files_and_specs() {
    let dir = tempfile::tempdir().unwrap();
    let law = dir.path().join("law.json");
    std::fs::write(&law, r#"{"M": 3, "atoms": [{"members": [0, 1], "mass": "1/2"}, {"members": [1, 2], "mass": "1/2"}]}"#)
        .unwrap();
    let d = parse_distribution_spec("file:law.json", Some(dir.path()));
    assert!(d.is_ok(), "{d:?}");
    let toml = r#"
first = "correlated:7,9,7/9"
depth = 3
replicas = 5
seed = 42
"#;
    let c = ExperimentConfig::parse(toml).unwrap();
    assert_eq!(c.seed, 42);
    let again = ExperimentConfig::parse(&c.to_toml()).unwrap();
    assert_eq!(again.to_json(), c.to_json());
    assert!(matches!(
        ExperimentConfig::parse("first = 3"),
        Err(Error::Parse(_))
    ));
    assert!(parse_distribution_spec("correlated:3,9,1/2", None).is_err());
    assert!(parse_distribution_spec("bogus:1", None).is_err());
}
