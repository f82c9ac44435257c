use aoi_cli::config::{load_file, load_str, parse_str, Command, Overrides, OUT_DIR_ENV};
use aoi_cli::{CliError, EXIT_PARSE};
use aoi_core::sim::{PolicyConfig, Preemption};
use aoi_core::DistKind;

const MINIMAL: &str = r#"{
  "command": "analytic",
  "arrival": { "kind": "poisson", "lambda": 0.5 },
  "service": { "kind": "exponential", "mu": 0.8 },
  "policy": "lcfsp"
}"#;

fn field_of(err: CliError) -> (String, String) {
    match err {
        CliError::Parse { field, message } => (field, message),
        other => panic!("expected a parse error, got {other}"),
    }
}

fn no_overrides() -> Overrides {
    Overrides::default()
}

#[test]
fn minimal_config_resolves_with_defaults() {
    let cfg = load_str(MINIMAL, &no_overrides()).unwrap();
    assert_eq!(cfg.command, Command::Analytic);
    assert_eq!(cfg.arrival.lambda(), 0.5);
    assert_eq!(cfg.service().kind(), DistKind::Exponential);
    assert_eq!(cfg.policy(), PolicyConfig::lcfsp());
    assert_eq!(cfg.settings.horizon, 2e6);
    assert_eq!(cfg.settings.warmup, 2e5);
    assert_eq!(cfg.settings.reps, 8);

    let echo: serde_json::Value = serde_json::from_str(&cfg.resolved_json()).unwrap();
    assert_eq!(echo["sim"]["seed"], 1);
    assert_eq!(echo["sim"]["reps"], 8);
    assert_eq!(echo["policies"][0]["kind"], "lcfsp");
    assert_eq!(echo["policies"][0]["preemption"], "resume");
    assert_eq!(echo["families"][0]["kind"], "exponential");
    // the echo is itself a valid config that resolves to the same experiment
    let again = load_str(&cfg.resolved_json(), &no_overrides()).unwrap();
    assert_eq!(again.families, cfg.families);
    assert_eq!(again.policies, cfg.policies);
    assert_eq!(again.settings, cfg.settings);
}

#[test]
fn inadmissible_pareto_names_the_field() {
    let text = MINIMAL.replace(
        r#""kind": "exponential", "mu": 0.8"#,
        r#""kind": "pareto", "mu": 0.8, "shape": 0.9"#,
    );
    let (field, message) = field_of(load_str(&text, &no_overrides()).unwrap_err());
    assert_eq!(field, "service.shape");
    assert!(message.contains("alpha > 1"), "{message}");
}

#[test]
fn inadmissible_weibull_and_grid_entries() {
    let text = MINIMAL.replace(
        r#""kind": "exponential", "mu": 0.8"#,
        r#""kind": "weibull", "mu": 0.8, "shape": 0.01"#,
    );
    let (field, _) = field_of(load_str(&text, &no_overrides()).unwrap_err());
    assert_eq!(field, "service.shape");

    let text = r#"{
      "command": "sweep",
      "arrival": { "kind": "poisson", "lambda": 0.5 },
      "family": { "kind": "pareto", "mu": 0.8, "grid": [1.5, 1.0] },
      "policy": "lcfsp"
    }"#;
    let (field, _) = field_of(load_str(text, &no_overrides()).unwrap_err());
    assert!(field.starts_with("family"), "{field}");
}

#[test]
fn flags_override_file_values() {
    let text = MINIMAL.replace(
        r#""policy": "lcfsp""#,
        r#""policy": "lcfsp", "sim": { "seed": 7, "horizon": 1000 }"#,
    );
    let cfg = load_str(&text, &no_overrides()).unwrap();
    assert_eq!(cfg.settings.seed, 7);
    assert_eq!(cfg.settings.warmup, 100.0);
    let o = Overrides {
        seed: Some(42),
        horizon: Some(5000.0),
        reps: Some(3),
        out: Some("x.csv".into()),
    };
    let cfg = load_str(&text, &o).unwrap();
    assert_eq!(cfg.settings.seed, 42);
    assert_eq!(cfg.settings.horizon, 5000.0);
    assert_eq!(cfg.settings.warmup, 500.0);
    assert_eq!(cfg.settings.reps, 3);
    assert_eq!(cfg.output.as_deref(), Some(std::path::Path::new("x.csv")));
    let echo: serde_json::Value = serde_json::from_str(&cfg.resolved_json()).unwrap();
    assert_eq!(echo["sim"]["seed"], 42);

    // an explicit warmup keeps its share of the horizon
    let text = MINIMAL.replace(
        r#""policy": "lcfsp""#,
        r#""policy": "lcfsp", "sim": { "horizon": 1000, "warmup": 250 }"#,
    );
    let o = Overrides {
        horizon: Some(100.0),
        ..Overrides::default()
    };
    assert_eq!(load_str(&text, &o).unwrap().settings.warmup, 25.0);
    assert_eq!(load_str(&text, &no_overrides()).unwrap().settings.warmup, 250.0);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = MINIMAL.replace(r#""policy": "lcfsp""#, r#""policy": "lcfsp", "horizn": 5"#);
    let err = parse_str(&text).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_PARSE);
    assert!(err.to_string().contains("horizn"), "{err}");

    let text = MINIMAL.replace(r#""policy": "lcfsp""#, r#""policy": "lcfsp", "sim": { "sed": 5 }"#);
    let (field, message) = field_of(load_str(&text, &no_overrides()).unwrap_err());
    assert!(
        field.starts_with("sim") && message.contains("sed"),
        "{field}: {message}"
    );
}

#[test]
fn unstable_fcfs_is_a_parse_error() {
    let text = MINIMAL
        .replace(r#""lambda": 0.5"#, r#""lambda": 0.9"#)
        .replace(r#""lcfsp""#, r#""fcfs""#);
    let (field, _) = field_of(load_str(&text, &no_overrides()).unwrap_err());
    assert_eq!(field, "arrival.lambda");
    // a pool of two is stable at the same load
    let text = text.replace(r#""fcfs""#, r#"{ "kind": "fcfs_pool", "servers": 2 }"#);
    let cfg = load_str(&text, &no_overrides()).unwrap();
    assert_eq!(cfg.policy(), PolicyConfig::FcfsPool { servers: 2 });
}

#[test]
fn policy_spellings() {
    for (raw, want) in [
        (
            r#""lcfsp_restart""#,
            PolicyConfig::LcfspSingle {
                preemption: Preemption::Restart,
            },
        ),
        (
            r#"{ "kind": "lcfsp", "preemption": "restart" }"#,
            PolicyConfig::LcfspSingle {
                preemption: Preemption::Restart,
            },
        ),
        (r#""infinite""#, PolicyConfig::InfiniteServer),
        (r#""fcfs_pool(3)""#, PolicyConfig::FcfsPool { servers: 3 }),
    ] {
        let text = MINIMAL.replace(r#""lcfsp""#, raw);
        assert_eq!(load_str(&text, &no_overrides()).unwrap().policy(), want, "{raw}");
    }
    let text = MINIMAL.replace(r#""lcfsp""#, r#""roundrobin""#);
    let (field, _) = field_of(load_str(&text, &no_overrides()).unwrap_err());
    assert_eq!(field, "policy");
}

#[test]
fn command_shape_rules() {
    let curves_without_rates = MINIMAL.replace(r#""analytic""#, r#""curves""#);
    assert_eq!(
        field_of(load_str(&curves_without_rates, &no_overrides()).unwrap_err()).0,
        "lambdas"
    );
    let rates_elsewhere = MINIMAL.replace(r#""policy": "lcfsp""#, r#""policy": "lcfsp", "lambdas": [0.5]"#);
    assert_eq!(
        field_of(load_str(&rates_elsewhere, &no_overrides()).unwrap_err()).0,
        "lambdas"
    );
    let validate_two = MINIMAL
        .replace(r#""analytic""#, r#""validate""#)
        .replace(r#""policy": "lcfsp""#, r#""policies": ["lcfsp", "fcfs"]"#);
    assert_eq!(
        field_of(load_str(&validate_two, &no_overrides()).unwrap_err()).0,
        "policy"
    );
    let bad_nu = MINIMAL
        .replace(r#""analytic""#, r#""scalarize""#)
        .replace(r#""policy": "lcfsp""#, r#""policy": "lcfsp", "nu": -1"#);
    assert_eq!(field_of(load_str(&bad_nu, &no_overrides()).unwrap_err()).0, "nu");
}

#[test]
fn files_and_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    std::fs::write(&path, MINIMAL).unwrap();
    let cfg = load_file(&path, &no_overrides()).unwrap();
    assert_eq!(cfg.command, Command::Analytic);

    let missing = load_file(&dir.path().join("nope.json"), &no_overrides()).unwrap_err();
    assert!(matches!(missing, CliError::ConfigRead { .. }));
    assert_eq!(missing.exit_code(), EXIT_PARSE);

    // set in this test only; other tests pass explicit outputs or none
    std::env::set_var(OUT_DIR_ENV, dir.path());
    let cfg = load_str(MINIMAL, &no_overrides()).unwrap();
    std::env::remove_var(OUT_DIR_ENV);
    assert_eq!(cfg.output, Some(dir.path().join("analytic.csv")));
}
