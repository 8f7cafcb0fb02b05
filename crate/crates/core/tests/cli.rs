use std::path::Path;
use std::process::{Command, Output};

fn deepbayes(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deepbayes"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = deepbayes(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn manifest_names(dir: &Path) -> Vec<String> {
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let name = e["name"].as_str().unwrap().to_string();
            let bytes = std::fs::metadata(dir.join(&name)).unwrap().len();
            assert_eq!(e["bytes"].as_u64(), Some(bytes), "{name}");
            name
        })
        .collect()
}

fn check_run(dir: &Path, expected: &[&str]) {
    let names = manifest_names(dir);
    assert!(names.contains(&"config.resolved.json".to_string()));
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for want in expected {
        assert!(names.iter().any(|n| n == want), "missing {want} in {names:?}");
    }
    for n in &names {
        let text = std::fs::read_to_string(dir.join(n)).unwrap();
        assert!(!text.is_empty(), "{n} is empty");
        if n.ends_with(".svg") {
            assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"), "{n}");
            assert!(names.contains(&n.replace(".svg", ".csv")), "{n} lacks its CSV");
        }
    }
}

#[test]
fn every_subcommand_writes_a_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let cases: &[(&[&str], &[&str])] = &[
        (&["synth", "--n-users", "200"], &["users.csv", "sessions.csv", "class_shares.csv"]),
        (
            &["train", "--synth-users", "400", "--epochs", "3", "--hidden", "8"],
            &["trace.csv", "holdout_rankings.csv", "accuracy.csv", "model.json"],
        ),
        (
            &["experiment", "ball", "--n", "500", "--dims", "2,10"],
            &["ball_marginals.csv", "ball50_plane.svg"],
        ),
        (
            &["experiment", "partition", "--n", "60", "--epochs", "20", "--resolution", "40"],
            &["hyperplanes.csv", "partition_accuracy.csv"],
        ),
        (
            &["experiment", "dropout-ridge", "--masks", "500", "--path-points", "4"],
            &["dropout_equivalence.csv", "ridge_path.csv", "ridge_path.svg"],
        ),
        (
            &["experiment", "vi-toy", "--steps", "200", "--gradient-samples", "200"],
            &["vi_summary.csv", "gradient_estimators.csv"],
        ),
        (&["experiment", "identities", "--n", "100"], &["identities.csv"]),
        (&["experiment", "optzoo", "--steps", "20"], &["optimizers.csv", "newton.csv"]),
    ];
    for (i, (args, expected)) in cases.iter().enumerate() {
        let out = t.join(format!("run{i}"));
        let mut full = args.to_vec();
        full.extend(["--out", out.to_str().unwrap()]);
        ok(&full, t);
        check_run(&out, expected);
        let resolved: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("config.resolved.json")).unwrap()).unwrap();
        assert!(resolved["params"].is_object());
    }
}

#[test]
fn partition_reports_seven_regions() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(
        &["experiment", "partition", "--neurons", "3", "--seed", "7", "--n", "40", "--epochs", "5", "--resolution", "30"],
        tmp.path(),
    );
    assert!(stdout.contains("region_count = 7"), "{stdout}");
}

#[test]
fn training_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    for name in ["a", "b"] {
        ok(&["train", "--synth-users", "300", "--epochs", "2", "--hidden", "6", "--out", name], t);
    }
    let a = std::fs::read(t.join("a/trace.csv")).unwrap();
    let b = std::fs::read(t.join("b/trace.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_and_flags_merge() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    std::fs::write(t.join("c.json"), r#"{"n": 50, "seed": 4}"#).unwrap();
    ok(&["experiment", "identities", "--config", "c.json", "--seed", "9", "--out", "r"], t);
    let resolved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(t.join("r/config.resolved.json")).unwrap()).unwrap();
    assert_eq!(resolved["params"]["n"], 50);
    assert_eq!(resolved["params"]["seed"], 9);
}

#[test]
fn evaluate_perfect_rankings() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    std::fs::write(t.join("p.csv"), "truth,rank_1,rank_2\nFR,FR,US\nUS,US,FR\nNDF,NDF,US\n").unwrap();
    let stdout = ok(&["evaluate", "--predictions", "p.csv", "--k", "2", "--out", "e"], t);
    assert!(stdout.contains("NDCG@2 = 1.0000"), "{stdout}");
    let summary = std::fs::read_to_string(t.join("e/summary.csv")).unwrap();
    assert!(summary.contains("ndcg,1"), "{summary}");
    check_run(&t.join("e"), &["ndcg_by_destination.csv", "accuracy.csv"]);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let code = |args: &[&str]| deepbayes(args, t).status.code();

    assert_eq!(code(&[]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["experiment"]), Some(1));
    assert_eq!(code(&["help"]), Some(0));

    let bad = deepbayes(&["experiment", "identities", "--epoches", "3"], t);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("epoches"));
    assert_eq!(code(&["experiment", "identities", "--n", "many"]), Some(2));

    std::fs::write(t.join("bad.json"), r#"{"epoches": 3}"#).unwrap();
    assert_eq!(code(&["train", "--config", "bad.json"]), Some(2));

    std::fs::write(t.join("empty.csv"), "truth,rank_1\n").unwrap();
    assert_eq!(code(&["evaluate", "--predictions", "empty.csv", "--out", "x"]), Some(2));
}
