//! End-to-end tests of the `mdpsolve` binary: exit codes, file outputs and
//! determinism.

use std::path::Path;
use std::process::{Command, Output};

use mdpsolve::report::SolveSummary;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdpsolve"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_random_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = run_in(
            dir.path(),
            &[
                "generate-random",
                "--n",
                "30",
                "--m",
                "4",
                "--gamma",
                "0.8",
                "--density",
                "0.3",
                "--seed",
                "99",
                "--out",
                name,
            ],
        );
        assert_code(&out, 0);
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn regular_generation_classifies_as_regular() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["3", "4"] {
        let out = run_in(
            dir.path(),
            &[
                "generate-random",
                "--n",
                "7",
                "--m",
                "3",
                "--gamma",
                "0.9",
                "--density",
                "0.4",
                "--seed",
                seed,
                "--ensure-regular",
                "--out",
                "model.json",
            ],
        );
        assert_code(&out, 0);
        let out = run_in(
            dir.path(),
            &["classify", "model.json", "--out", "class.json"],
        );
        assert_code(&out, 0);
        let text = std::fs::read_to_string(dir.path().join("class.json")).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["verdict"], "regular", "{text}");
    }
}

#[test]
fn classify_reports_general_for_mixed_model() {
    let dir = tempfile::tempdir().unwrap();
    // Action 0 keeps the state (reducible), action 1 swaps.
    std::fs::write(
        dir.path().join("e1.json"),
        r#"{"n":2,"m":2,"gamma":0.5,
            "transitions":[{"action":0,"triplets":[[0,0,1.0],[1,1,1.0]]},
                           {"action":1,"triplets":[[0,1,1.0],[1,0,1.0]]}],
            "costs":[[0.0,1.0],[2.0,1.0]]}"#,
    )
    .unwrap();
    let out = run_in(dir.path(), &["classify", "e1.json"]);
    assert_code(&out, 0);
    let doc: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("classify prints JSON");
    assert_eq!(doc["verdict"], "general");
    assert_eq!(doc["per_action"][0]["irreducible"], false);
    assert_eq!(doc["per_action"][1]["period"], 2);
}

#[test]
fn solve_pi_on_tiny_model_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("e1.json"),
        r#"{"n":2,"m":2,"gamma":0.5,
            "transitions":[{"action":0,"triplets":[[0,0,1.0],[1,1,1.0]]},
                           {"action":1,"triplets":[[0,1,1.0],[1,0,1.0]]}],
            "costs":[[0.0,1.0],[2.0,1.0]]}"#,
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["solve", "e1.json", "--method", "pi", "--out", "run"],
    );
    assert_code(&out, 0);
    let summary: SolveSummary = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run.summary.json")).unwrap(),
    )
    .unwrap();
    assert!(summary.outer_iters <= 3);
    assert!(summary.final_residual_inf <= 1e-9);
    let trace = std::fs::read_to_string(dir.path().join("run.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), summary.outer_iters + 2);
}

#[test]
fn solve_ipi_gmres_on_sis_model_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "generate-sis",
            "--population",
            "1000",
            "--gamma",
            "0.9",
            "--out",
            "sis.mdpb",
        ],
    );
    assert_code(&out, 0);
    let out = run_in(
        dir.path(),
        &[
            "solve",
            "sis.mdpb",
            "--method",
            "ipi",
            "--inner",
            "gmres",
            "--alpha",
            "0.1",
            "--reference",
            "pi",
            "--out",
            "sis_run",
        ],
    );
    assert_code(&out, 0);
    let summary: SolveSummary = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("sis_run.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary.solver, "ipi-gmres");
    assert_eq!(summary.alpha, Some(0.1));
    assert!(summary.final_residual_inf <= 1e-8);
    // With --reference pi the error column is filled.
    let trace = std::fs::read_to_string(dir.path().join("sis_run.trace.csv")).unwrap();
    let second = trace.lines().nth(1).unwrap();
    assert!(!second.split(',').nth(2).unwrap().is_empty(), "{second}");
}

#[test]
fn solve_caps_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "generate-random",
            "--n",
            "20",
            "--m",
            "2",
            "--gamma",
            "0.95",
            "--density",
            "0.3",
            "--seed",
            "1",
            "--out",
            "m.json",
        ],
    );
    assert_code(&out, 0);
    let out = run_in(
        dir.path(),
        &[
            "solve",
            "m.json",
            "--method",
            "vi",
            "--tol",
            "1e-14",
            "--max-outer",
            "3",
            "--out",
            "capped",
        ],
    );
    assert_code(&out, 2);
}

#[test]
fn unknown_flag_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["solve", "x.json", "--no-such-flag"]);
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn missing_model_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["solve", "nope.json", "--method", "vi"]);
    assert_code(&out, 1);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn solve_reruns_are_iteration_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "generate-random",
            "--n",
            "25",
            "--m",
            "3",
            "--gamma",
            "0.9",
            "--density",
            "0.4",
            "--seed",
            "5",
            "--out",
            "m.json",
        ],
    );
    assert_code(&out, 0);
    let mut outer = Vec::new();
    let mut inner = Vec::new();
    for name in ["r1", "r2"] {
        let out = run_in(
            dir.path(),
            &[
                "solve", "m.json", "--method", "ipi", "--inner", "minres", "--alpha", "0.2",
                "--out", name,
            ],
        );
        assert_code(&out, 0);
        let summary: SolveSummary = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("{name}.summary.json"))).unwrap(),
        )
        .unwrap();
        outer.push(summary.outer_iters);
        inner.push(summary.total_inner_iters);
    }
    assert_eq!(outer[0], outer[1]);
    assert_eq!(inner[0], inner[1]);
}

#[test]
fn sweep_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.json"),
        r#"{
          "axis": "gamma",
          "values": [0.1, 0.5],
          "solvers": [
            {"outer": "pi"},
            {"outer": "ipi", "inner": "gmres", "alpha": 0.1}
          ],
          "base": {"sis": {"population": 200, "gamma": 0.9}},
          "tol": 1e-8
        }"#,
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["sweep", "sweep.json", "--out-dir", "results"],
    );
    assert_code(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("results/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5, "{csv}");
    assert!(lines[0].starts_with("axis,axis_value,solver,status"));
    for line in &lines[1..] {
        assert!(line.contains(",ok,"), "{line}");
        assert!(line.ends_with("tolerance"), "{line}");
    }
}

#[test]
fn sweep_honors_worker_cap_env() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.json"),
        r#"{
          "axis": "population",
          "values": [40, 80],
          "solvers": [{"outer": "ipi", "inner": "gmres", "alpha": 0.1}],
          "base": {"sis": {"population": 40, "gamma": 0.9}}
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "sweep.json", "--out-dir", "results"])
        .env("IPI_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_code(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("results/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
}
