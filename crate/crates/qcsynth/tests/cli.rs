//! Command-line integration: spec resolution, round-trips, exit codes,
//! rendering, and file outputs, exercised in-process.

use qcsynth::cli::{main_with_args, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};
use qcsynth::spec::DecompositionSpec;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["qcsynth"];
    argv.extend_from_slice(args);
    main_with_args(argv)
}

#[test]
fn decompose_builtin_both_solvers() {
    let out = std::env::temp_dir().join("qcsynth_cli_rc.json");
    let code = run(&[
        "decompose",
        "--builtin",
        "reverse_cnot",
        "--solver",
        "both",
        "--starts",
        "20",
        "--seed",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["status"], "optimal");
    assert_eq!(report["objective"], 3);
    assert_eq!(report["sequence"].as_array().unwrap().len(), 5);
    std::fs::remove_file(out).ok();
}

#[test]
fn dump_spec_round_trips() {
    // The dumped spec re-parses to an identical structure.
    let case = qcsynth::bench::find_case("controlled_h").unwrap();
    let dumped = case.spec.to_json();
    let back = DecompositionSpec::from_json(&dumped).unwrap();
    assert_eq!(case.spec, back);
}

#[test]
fn spec_file_flow_and_infeasible_exit() {
    let dir = std::env::temp_dir();
    let path = dir.join("qcsynth_cli_infeasible.json");
    std::fs::write(
        &path,
        r#"{
            "n_qubits": 1,
            "max_depth": 2,
            "input_gates": ["Z_1", "Identity"],
            "target": {"re": [[0.0, 1.0], [1.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]], "name": "X"}
        }"#,
    )
    .unwrap();
    let code = run(&["decompose", "--spec", path.to_str().unwrap(), "--solver", "exact"]);
    assert_eq!(code, EXIT_INFEASIBLE);
    std::fs::remove_file(path).ok();
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["decompose"]), EXIT_USAGE);
    assert_eq!(run(&["decompose", "--builtin", "not_a_case"]), EXIT_USAGE);
    assert_eq!(
        run(&["decompose", "--spec", "/nonexistent/path.json"]),
        EXIT_USAGE
    );
}

#[test]
fn export_writes_lp_file() {
    let out = std::env::temp_dir().join("qcsynth_cli_export.lp");
    let code = run(&[
        "export",
        "--builtin",
        "reverse_cnot",
        "--variant",
        "milp",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("Binaries"));
    assert!(text.starts_with('\\'));
    assert_eq!(qcsynth::model::count_variables(&text), 20 + 256 + 1024);
    std::fs::remove_file(out).ok();
}

#[test]
fn bench_subcommand_writes_reports() {
    // Run one tiny slice of the suite through the CLI with exact only.
    let csv = std::env::temp_dir().join("qcsynth_cli_bench.csv");
    let json = std::env::temp_dir().join("qcsynth_cli_bench.json");
    let code = run(&[
        "bench",
        "--tier",
        "required",
        "--solver",
        "exact",
        "--budget-s",
        "300",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 11, "header plus ten required cases");
    std::fs::remove_file(csv).ok();
    std::fs::remove_file(json).ok();
}

#[test]
fn phase_set_and_no_symmetry_flags() {
    // Restricting grover to phase 1 forces a longer or infeasible result,
    // so the flag demonstrably reaches the model.
    let code = run(&[
        "decompose",
        "--builtin",
        "grover_diffusion",
        "--solver",
        "exact",
        "--phase-set",
        "1",
        "--no-symmetry",
    ]);
    // Within depth 6 a phase-1 solution may not exist; either success with
    // a valid objective or the infeasible exit is acceptable here. The
    // point is that the flags parse and run.
    assert!(code == EXIT_OK || code == EXIT_INFEASIBLE);
}
