use super::*;

fn parse(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("conic-lmcf").chain(args.iter().copied())).unwrap()
}

fn config(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => panic!("not an object"),
    }
}

#[test]
fn flags_override_config() {
    let cli = parse(&["heat", "--cells", "50"]);
    let Command::Heat(flags) = &cli.command else { panic!() };
    let cfg = config(serde_json::json!({ "cells": 800, "t_end": 0.3 }));
    let merged: HeatArgs = merge(flags, &cfg).unwrap();
    assert_eq!(merged.cells, Some(50));
    assert_eq!(merged.t_end, Some(0.3));
    assert_eq!(merged.dt, None);
}

#[test]
fn flattened_groups_merge() {
    let cli = parse(&["asymptotics", "--gamma", "2.5"]);
    let Command::Asymptotics(flags) = &cli.command else { panic!() };
    let cfg = config(serde_json::json!({ "lambda": 0.0, "cells": 100, "gamma": 1.0 }));
    let merged: AsymptoticsArgs = merge(flags, &cfg).unwrap();
    assert_eq!(merged.gamma, Some(2.5));
    assert_eq!(merged.heat.cells, Some(100));
}

#[test]
fn unknown_and_mistyped_config_keys_are_usage_errors() {
    let flags = FlowArgs::default();
    let err = merge(&flags, &config(serde_json::json!({ "grid": 3 }))).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let err = merge(&flags, &config(serde_json::json!({ "n": "many" }))).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn list_and_bool_flags() {
    let cli = parse(&["fredholm", "--gamma", "-0.5,2.1", "--with-asymptotics"]);
    let Command::Fredholm(a) = &cli.command else { panic!() };
    assert_eq!(a.gamma, Some(vec![-0.5, 2.1]));
    assert_eq!(a.with_asymptotics, Some(true));
    let cli = parse(&["defect", "--eps", "0.2,0.1"]);
    let Command::Defect(a) = &cli.command else { panic!() };
    assert_eq!(a.eps, Some(vec![0.2, 0.1]));
}

#[test]
fn exit_codes_follow_error_kind() {
    assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    assert_eq!(CliError::Run(Error::InvalidInput("x".into())).exit_code(), 2);
    assert_eq!(CliError::Run(Error::ExceptionalWeight { components: vec![] }).exit_code(), 2);
    assert_eq!(CliError::Run(Error::GraphCondition { nodes: vec![0], min_det: -1.0 }).exit_code(), 1);
    assert_eq!(CliError::Run(Error::LinearSolve { step: 1, time: 0.1 }).exit_code(), 1);
}

#[test]
fn parse_failures_exit_two() {
    assert_eq!(run(["conic-lmcf", "nonsense"]), 2);
    assert_eq!(run(["conic-lmcf", "spectrum", "--no-such-flag"]), 2);
    assert_eq!(run(["conic-lmcf", "--help"]), 0);
}

#[test]
fn config_command_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"command": "flow", "gamma": [2.1]}"#).unwrap();
    let cli = parse(&["--config", path.to_str().unwrap(), "fredholm"]);
    let err = execute(&cli).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("flow"));
}

#[test]
fn config_sets_globals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-config");
    let path = dir.path().join("cfg.json");
    let cfg = serde_json::json!({ "command": "fredholm", "gamma": [2.1], "out": out, "seed": 7 });
    std::fs::write(&path, cfg.to_string()).unwrap();
    let outcome = execute(&parse(&["--config", path.to_str().unwrap(), "fredholm"])).unwrap();
    assert_eq!(outcome.stdout, "-13\n");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["inputs"]["gamma"], serde_json::json!([2.1]));
}

#[test]
fn sorted_json_is_canonical() {
    let v = serde_json::json!({ "b": 1, "a": { "d": 2, "c": [ { "z": 0, "y": 1 } ] } });
    let s = output::to_sorted_json(&v);
    let order: Vec<usize> =
        ["\"a\"", "\"c\"", "\"y\"", "\"z\"", "\"d\"", "\"b\""].iter().map(|k| s.find(k).unwrap()).collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{s}");
    assert!(s.ends_with('\n'));
}

#[test]
fn csv_uses_newlines_and_round_trip_floats() {
    let a = Artifact::csv("x.csv", &["a", "b"], vec![vec![output::num(0.1), output::num(1e-20)]]).unwrap();
    assert_eq!(a.contents, "a,b\n0.1,0.00000000000000000001\n");
    assert!(!a.contents.contains('\r'));
}
