//! Round-trip, determinism, and exit-code tests for the command layer,
//! exercising both the library functions and the compiled binary.

use primorbit::dynsys::FiniteSystem;
use primorbit::fixtures;
use primorbit::repr::CcFunction;
use primorbit_cli::*;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_primorbit"))
}

#[test]
fn system_serialization_round_trips() {
    for sys in fixtures::all_systems() {
        let json = system_to_json(&sys);
        let back = parse_system(&json).unwrap();
        assert_eq!(back, sys);
        assert_eq!(system_to_json(&back), json);
    }
}

#[test]
fn graph_serialization_round_trips() {
    let graph = fixtures::graph_hs();
    let json = graph_to_json(&graph);
    let back = parse_graph(&json).unwrap();
    assert_eq!(back, graph);
    assert_eq!(graph_to_json(&back), json);
}

#[test]
fn function_serialization_round_trips() {
    let sys = fixtures::sys_cycle3();
    let f = CcFunction::indicator(&sys, 0, vec![1], 1)
        .unwrap()
        .scale(num_complex::Complex64::new(0.25, -1.5))
        .add(&CcFunction::unit_indicator(&sys, 2).unwrap());
    let terms = function_terms(&sys, &f);
    let back = function_from_terms(&sys, &terms).unwrap();
    assert_eq!(back, f);
    assert_eq!(function_terms(&sys, &back), terms);
}

#[test]
fn angle_display_round_trips_through_the_parser() {
    let theta = parse_angle("1/2,2/3", 2).unwrap();
    assert_eq!(parse_angle(&theta.to_string(), 2).unwrap(), theta);
}

#[test]
fn angle_parsing_rejects_malformed_input() {
    assert!(matches!(parse_angle("1/0", 1), Err(CliError::Input(_))));
    assert!(matches!(parse_angle("x/2", 1), Err(CliError::Input(_))));
    assert!(matches!(parse_angle("1/2", 2), Err(CliError::Input(_))));
    assert_eq!(parse_angle("2", 1).unwrap(), parse_angle("2/1", 1).unwrap());
}

#[test]
fn path_parsing_round_trips_and_rejects() {
    let graph = fixtures::graph_hs();
    let p = parse_path(&graph, "g,f|e").unwrap();
    assert_eq!(p.display(&graph), "g,f|e");
    assert!(parse_path(&graph, "gf e").is_err());
    assert!(parse_path(&graph, "|q").is_err());
}

#[test]
fn system_k_must_match_map_count() {
    let text = r#"{"k": 2, "points": ["a"], "maps": [[0]]}"#;
    assert!(matches!(parse_system(text), Err(CliError::Input(_))));
}

#[test]
fn exit_codes_map_error_classes() {
    use primorbit::periodicity::PeriodicityError;
    use primorbit::repr::ReprError;
    assert_eq!(
        CliError::from(PeriodicityError::BoundTooSmall { bound: 3 }).exit_code(),
        3
    );
    assert_eq!(
        CliError::from(ReprError::BatteryFailure {
            identity: 2,
            trial: 1,
            residual: 1.0,
            description: String::new(),
        })
        .exit_code(),
        1
    );
    assert_eq!(CliError::Input("bad".into()).exit_code(), 2);
}

#[test]
fn fnv_digest_is_the_reference_function() {
    // Reference values of 64-bit FNV-1a.
    assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
    assert_eq!(fnv1a_hex(b"a"), "af63dc4c8601ec8c");
    assert_eq!(fnv1a_hex(b"foobar"), "85944171f73967e8");
}

#[test]
fn binary_validates_both_document_kinds() {
    let out = binary().arg("validate").arg(fixture("cycle3.json")).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("system ok"));

    let out = binary().arg("validate").arg(fixture("graph_hs.json")).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("graph ok"));
}

#[test]
fn binary_rejects_noncommuting_input_with_exit_2() {
    let out = binary()
        .arg("analyze")
        .arg(fixture("noncommuting.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disagree"));
}

#[test]
fn binary_refuses_witness_for_equivalent_labels_with_exit_2() {
    let out = binary()
        .args(["witness"])
        .arg(fixture("cycle3.json"))
        .args(["p0", "0", "p1", "1/3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("same primitive ideal"));
}

#[test]
fn binary_reports_are_byte_identical_across_runs() {
    for name in ["cycle3.json", "swap2.json", "collapse.json", "2cycles.json"] {
        let run = || {
            let out = binary()
                .args(["analyze", "--trials", "25"])
                .arg(fixture(name))
                .output()
                .unwrap();
            assert!(out.status.success(), "analyze failed on {name}");
            out.stdout
        };
        assert_eq!(run(), run(), "nondeterministic report for {name}");
    }
}

#[test]
fn binary_writes_output_file_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = binary()
        .args(["analyze", "--trials", "10", "--output"])
        .arg(&target)
        .arg(fixture("cycle3.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("\"digest\""));
    assert!(text.ends_with('\n'));
}

#[test]
fn analyze_profile_matches_library_values() {
    let report = cmd_analyze(&fixture("2cycles.json"), &RunOptions {
        trials: 10,
        ..RunOptions::default()
    })
    .unwrap();
    let value: serde_json::Value = serde_json::from_str(&report).unwrap();
    let entries = value["catalogue"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["quasi_orbit"], "a");
    assert_eq!(entries[1]["quasi_orbit"], "c");
    for entry in entries {
        assert_eq!(entry["displacement_group"], serde_json::json!([["2"]]));
    }
    let sys_entry = &value["system"];
    assert_eq!(sys_entry["points"], 4);
    assert_eq!(sys_entry["k"], 1);
}

#[test]
fn classify_command_matches_spec_example() {
    let out = cmd_classify(&fixture("cycle3.json"), "p0", "1/6").unwrap();
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(value["quasi_orbit"], "p0");
    assert_eq!(value["character"], "(1/2)");
}

#[test]
fn witness_command_emits_the_function_and_norms() {
    let out = cmd_witness(
        &fixture("cycle3.json"),
        "p0",
        "0",
        "p2",
        "1/6",
        &RunOptions::default(),
    )
    .unwrap();
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(value["killed_by"], "second");
    assert_eq!(value["killed_norm"], 0.0);
    assert!(value["surviving_norm"].as_f64().unwrap() >= 1e-3);
    let function = value["function"].as_array().unwrap();
    assert_eq!(function.len(), 2);
    // Round-trip the emitted function.
    let sys = load_system(&fixture("cycle3.json")).unwrap();
    let terms: Vec<TermRecord> =
        serde_json::from_value(value["function"].clone()).unwrap();
    let f = function_from_terms(&sys, &terms).unwrap();
    assert_eq!(function_terms(&sys, &f).len(), 2);
}

#[test]
fn validate_agrees_between_library_and_binary() {
    assert!(cmd_validate(&fixture("swap2.json")).unwrap().contains("2 commuting maps"));
    let err = cmd_validate(&fixture("noncommuting.json")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn system_parse_matches_fixture_object() {
    let text = std::fs::read_to_string(fixture("cycle3.json")).unwrap();
    let sys = parse_system(&text).unwrap();
    let expected = FiniteSystem::validate_system(
        vec!["p0".into(), "p1".into(), "p2".into()],
        vec![vec![1, 2, 0]],
    )
    .unwrap();
    assert_eq!(sys, expected);
}
