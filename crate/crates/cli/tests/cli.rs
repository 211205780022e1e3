use std::process::{Command, Output};

use qmask::density::DensityMatrix;
use qmask::io::{read_csv_blocks, read_density, Exportable};

fn qmask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmask"))
        .args(args)
        .env_remove("QMASK_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn expected_verdicts_exit_zero() {
    for s in ["classical", "orthogonal", "arbitrary", "ghz"] {
        for mode in ["--exact", "--sampled"] {
            let o = qmask(&["run", s, mode]);
            assert_eq!(o.status.code(), Some(0), "{s} {mode}\n{}", stdout(&o));
        }
    }
}

#[test]
fn orthogonal_exact_json_report() {
    let o = qmask(&["run", "orthogonal", "--exact", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "qmask.report/v1");
    assert_eq!(v["masked"], true);
    assert!(v["masking"]["reduced_equal_b"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn arbitrary_exact_deviation_in_table() {
    let o = qmask(&["run", "arbitrary", "--exact", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["masked"], false);
    assert_eq!(v["expected_masked"], false);
    let dev = v["masking"]["reduced_equal_b"].as_f64().unwrap();
    assert!((dev - 0.60).abs() < 0.01, "{dev}");
}

#[test]
fn ghz_grid_size_is_respected() {
    let o = qmask(&["run", "ghz", "--theta-grid", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("min_pair_fidelity"))
            .count(),
        4
    );
}

#[test]
fn verdict_mismatch_exits_one() {
    let o = qmask(&[
        "run",
        "orthogonal",
        "--alpha1",
        "0.6,0",
        "--alpha2",
        "0.8,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn errors_exit_two() {
    for args in [
        vec!["run", "bogus"],
        vec!["run", "orthogonal", "--no-such-flag"],
        vec!["run", "orthogonal", "--format", "xml"],
        vec!["run", "orthogonal", "--alpha1", "1,0"],
        vec!["run", "arbitrary", "--psi0", "1,2"],
        vec!["run", "orthogonal", "--exact", "--sampled"],
        vec!["stats", "orthogonal", "--trials", "1"],
        vec!["export", "masked-rho", "--out", "/nonexistent/dir/x.json"],
        vec![],
    ] {
        let o = qmask(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn help_lists_every_flag() {
    let o = qmask(&["run", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in [
        "--shots",
        "--trials",
        "--seed",
        "--format",
        "--exact",
        "--sampled",
        "--theta-grid",
    ] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn fixtures_check_flags_without_failing() {
    let o = qmask(&["fixtures-check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = |id: &str| {
        text.lines()
            .find(|l| l.starts_with(id))
            .unwrap()
            .to_string()
    };
    assert!(line("orth.fidelity.psi0-psi1").contains("PASS"));
    assert!(line("orth.distance.psi0-psi1 ").contains("FLAGGED"));
    assert!(line("orth.fidelity.theory-psi0").contains("FLAGGED"));
    assert!(line("arb.fidelity.theory-psi0").contains("FLAGGED"));
    for pair in ["A-B", "B-C", "A-C"] {
        assert!(line(&format!("ghz.fidelity.{pair}")).contains("PASS"));
    }
}

#[test]
fn stats_csv_layout() {
    let o = qmask(&["stats", "orthogonal", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("outcome,mean,sd,max,min,trials,shots,seed")
    );
    assert_eq!(lines.count(), 4);
    assert!(text.contains(",10,8192,0"));
}

#[test]
fn seed_environment_overrides_flag() {
    let run = |env: Option<&str>, seed: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmask"));
        cmd.args(["stats", "ghz", "--seed", seed, "--format", "json"]);
        match env {
            Some(v) => cmd.env("QMASK_SEED", v),
            None => cmd.env_remove("QMASK_SEED"),
        };
        cmd.output().unwrap()
    };
    let from_env = run(Some("7"), "3");
    let from_flag = run(None, "7");
    assert_eq!(from_env.status.code(), Some(0));
    assert_eq!(from_env.stdout, from_flag.stdout);
    assert_ne!(from_env.stdout, run(None, "3").stdout);
    assert_eq!(run(Some("seven"), "3").status.code(), Some(2));
}

#[test]
fn sampled_reports_repeat_exactly() {
    let a = qmask(&[
        "run",
        "orthogonal",
        "--sampled",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    let b = qmask(&[
        "run",
        "orthogonal",
        "--sampled",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn export_round_trips() {
    let dir = tempfile::tempdir().unwrap();

    let json = dir.path().join("mixed.json");
    let csv = dir.path().join("mixed.csv");
    assert!(
        qmask(&["export", "maximally-mixed", "--out", json.to_str().unwrap()])
            .status
            .success()
    );
    assert!(qmask(&[
        "export",
        "maximally-mixed",
        "--out",
        csv.to_str().unwrap(),
        "--format",
        "csv"
    ])
    .status
    .success());
    let expected = DensityMatrix::maximally_mixed(1).unwrap();
    assert_eq!(read_density(&json).unwrap(), expected);
    assert_eq!(read_density(&csv).unwrap(), expected);

    let ghz = dir.path().join("ghz.json");
    assert!(qmask(&[
        "export",
        "ghz-reductions",
        "--out",
        ghz.to_str().unwrap(),
        "--theta",
        "1.1"
    ])
    .status
    .success());
    match Exportable::from_json(&std::fs::read_to_string(&ghz).unwrap()).unwrap() {
        Exportable::Reductions { reductions } => {
            assert_eq!(reductions.len(), 3);
            assert!(reductions.iter().all(|r| r.rho.dim() == 4));
        }
        other => panic!("{other:?}"),
    }

    let tomo = dir.path().join("tomo.json");
    assert!(qmask(&[
        "export",
        "masked-tomography",
        "--out",
        tomo.to_str().unwrap()
    ])
    .status
    .success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&tomo).unwrap()).unwrap();
    assert_eq!(v["type"], "tomography");
    assert!(v["result"]["rho"]["re"].is_array() && v["result"]["rho"]["im"].is_array());

    let rho_csv = dir.path().join("rho.csv");
    assert!(qmask(&[
        "export",
        "masked-rho",
        "--out",
        rho_csv.to_str().unwrap(),
        "--format",
        "csv"
    ])
    .status
    .success());
    let blocks = read_csv_blocks(&std::fs::read_to_string(&rho_csv).unwrap()).unwrap();
    assert_eq!(blocks[0].1.shape(), (4, 4));
}
