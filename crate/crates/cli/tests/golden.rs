//! Golden-file tests for every subcommand. Set `KMODEL_BLESS=1` to rewrite
//! the expected files after an intentional change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::CommandFactory;
use kmodel_cli::Cli;

const BALL: &[&str] = &["--mass-g", "1", "--cell-cm", "2.6e-16", "--sigma0-cm", "1.3e-16", "--dt-s", "2e-6"];

/// (golden file, arguments)
const CASES: &[(&str, &[&str])] = &[
    ("constants.json", &["constants"]),
    ("constants.csv", &["constants", "--format", "csv"]),
    ("uncertainty_time.json", &["uncertainty", "--time", "1"]),
    ("uncertainty_distance.json", &["uncertainty", "--distance", "3e10"]),
    ("spread.json", &["spread", "--config", "inputs/pair.json"]),
    ("spread_oracle.json", &["spread", "--config", "inputs/pair.json", "--oracle"]),
    ("cell_point.json", &["cell", "point", "--mass-g", "9.109e-28"]),
    ("cell_sphere_ball.json", &["cell", "sphere", "--mass-g", "1", "--radius-cm", "1"]),
    (
        "cell_sphere_transition.json",
        &["cell", "sphere", "--mass-g", "1.07e-14", "--radius-cm", "1.37e-5", "--samples", "50000", "--seed", "7"],
    ),
    ("cell_sphere_grain.csv", &["cell", "sphere", "--mass-g", "1e-18", "--radius-cm", "1e-6", "--format", "csv"]),
    ("cell_transition.json", &["cell", "transition", "--density", "1"]),
    ("reproduce.json", &["reproduce"]),
    ("reproduce.csv", &["reproduce", "--format", "csv"]),
    ("run_transition.json", &["run", "--manifest", "inputs/transition_manifest.json"]),
    ("run_spread.csv", &["run", "--manifest", "inputs/spread_manifest.json"]),
];

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn kmodel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmodel"))
        .args(args)
        .current_dir(golden_dir())
        .env_remove("KMODEL_SEED")
        .output()
        .expect("binary runs")
}

fn check_golden(name: &str, args: &[&str]) {
    let out = kmodel(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = golden_dir().join(name);
    if std::env::var_os("KMODEL_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), expected, "{args:?} differs from {name}");
}

#[test]
fn subcommands_match_golden_files() {
    for (name, args) in CASES {
        check_golden(name, args);
    }
}

#[test]
fn simulate_matches_golden_files() {
    let summary: Vec<&str> = ["simulate", "--duration-s", "1e-3", "--seed", "3", "--runs", "2"]
        .into_iter()
        .chain(BALL.iter().copied())
        .collect();
    check_golden("simulate.json", &summary);
    let events: Vec<&str> = ["simulate", "--duration-s", "2e-4", "--seed", "3", "--dims", "1", "--format", "csv"]
        .into_iter()
        .chain(BALL.iter().copied())
        .collect();
    check_golden("simulate_events.csv", &events);
}

#[test]
fn every_help_subcommand_has_a_golden_case() {
    let mut covered: Vec<String> = CASES.iter().map(|(_, args)| args[0].to_string()).collect();
    covered.extend(CASES.iter().filter(|(_, a)| a[0] == "cell").map(|(_, a)| format!("cell {}", a[1])));
    covered.push("simulate".into());
    let cli = Cli::command();
    for sub in cli.get_subcommands() {
        let name = sub.get_name().to_string();
        assert!(covered.contains(&name), "no golden case for {name}");
        for nested in sub.get_subcommands() {
            let full = format!("{name} {}", nested.get_name());
            assert!(covered.contains(&full), "no golden case for {full}");
        }
    }
}

fn error_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr carries an error object")
}

#[test]
fn malformed_flag_exits_with_usage_error() {
    let out = kmodel(&["cell", "point", "--mass", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = error_json(&out);
    assert_eq!(err["code"], "usage");
    assert!(err["message"].is_string());
    assert!(err.get("context").is_some());
}

#[test]
fn invalid_values_map_to_exit_codes() {
    let negative = kmodel(&["cell", "point", "--mass-g", "-1"]);
    assert_eq!(negative.status.code(), Some(2));
    assert_eq!(error_json(&negative)["code"], "invalid_parameter");

    let coarse = kmodel(&["simulate", "--duration-s", "1e-3", "--dt-s", "1e-4", "--mass-g", "1", "--cell-cm", "2.6e-16", "--sigma0-cm", "1e-16"]);
    assert_eq!(coarse.status.code(), Some(2));

    let too_big = kmodel(&["cell", "sphere", "--mass-g", "1", "--radius-cm", "200"]);
    assert_eq!(too_big.status.code(), Some(2));

    let few_samples = kmodel(&["cell", "sphere", "--mass-g", "1", "--radius-cm", "1", "--samples", "10"]);
    assert_eq!(few_samples.status.code(), Some(2));

    let manifest = kmodel(&["run", "--manifest", "inputs/bad_manifest.json"]);
    assert_eq!(manifest.status.code(), Some(2));
    assert_eq!(error_json(&manifest)["context"]["unknown"][0], "radius_in");

    let missing = kmodel(&["spread", "--config", "inputs/absent.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let args = ["cell", "sphere", "--mass-g", "1.07e-14", "--radius-cm", "1.37e-5", "--samples", "20000"];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cell.json");
    let path_str = path.to_str().unwrap();
    let with_out: Vec<&str> = args.iter().copied().chain(["--out", path_str]).collect();
    let first = kmodel(&with_out);
    assert_eq!(first.status.code(), Some(0));
    assert!(first.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(kmodel(&args).stdout, written);
}

#[test]
fn seed_comes_from_the_environment() {
    let args = ["cell", "sphere", "--mass-g", "1.07e-14", "--radius-cm", "1.37e-5", "--samples", "20000"];
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kmodel"));
        cmd.args(args).env_remove("KMODEL_SEED");
        if let Some(s) = seed {
            cmd.env("KMODEL_SEED", s);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("11")), run(Some("11")));
    assert_ne!(run(Some("11")), run(Some("12")));
    let explicit: Vec<&str> = args.iter().copied().chain(["--seed", "11"]).collect();
    assert_eq!(kmodel(&explicit).stdout, run(Some("11")));
}

#[test]
fn reproduce_reports_every_row() {
    let out = kmodel(&["reproduce"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["all_pass"], true);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let ratio = row["ratio"].as_f64().unwrap();
        assert!(ratio > 1.0 / 31.7, "{row}");
    }
}
