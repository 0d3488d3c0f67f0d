use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const START: i64 = 1_577_836_800;
const WEEK: i64 = 604_800;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fixture.csv")
}

fn socsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = socsim(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    socsim(dir, args).status.code().unwrap()
}

#[test]
fn bundled_fixture_matches_generator() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixture", "--out", "."]);
    let fresh = std::fs::read(dir.path().join("fixture.csv")).unwrap();
    assert!(fresh == std::fs::read(fixture()).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    assert_eq!(code(d, &["analyze", "missing.csv"]), 2);

    std::fs::write(
        d.join("bad.csv"),
        "time,initiator,receiver,kind,strength,tags\n1,a,a,host_offer,1,\n",
    )
    .unwrap();
    assert_eq!(code(d, &["ingest", "bad.csv"]), 2);
    std::fs::write(
        d.join("neg.csv"),
        "time,initiator,receiver,kind,strength,tags\n1,a,b,host_offer,-1,\n",
    )
    .unwrap();
    assert_eq!(code(d, &["ingest", "neg.csv"]), 2);

    std::fs::write(d.join("steps.json"), r#"{"steps": 0}"#).unwrap();
    assert_eq!(code(d, &["analyze", fx, "--config", "steps.json"]), 3);
    std::fs::write(d.join("garbled.json"), "{").unwrap();
    assert_eq!(code(d, &["analyze", fx, "--config", "garbled.json"]), 3);
    std::fs::write(d.join("k.json"), r#"{"cpm_k": 2}"#).unwrap();
    assert_eq!(code(d, &["analyze", fx, "--config", "k.json"]), 3);
    assert_eq!(
        code(d, &["predict-links", fx, "--split", "1", "--model", "XYZ"]),
        3
    );

    assert_eq!(code(d, &["compare", fx, fx, "--scope", "new"]), 2);
    assert_eq!(code(d, &["simulate", fx, "--split", "0"]), 2);
}

#[test]
fn ingest_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("in.csv"),
        "time,initiator,receiver,kind,strength,tags\n5,b,a,host_offer,1,\n1,a,b,surf_request,2,x;y\n",
    )
    .unwrap();
    let summary = ok(d, &["ingest", "in.csv", "--out", "o"]);
    assert!(
        summary.contains("events=2 entities=2 first=1 last=5"),
        "{summary}"
    );
    let text = std::fs::read_to_string(d.join("o/events.csv")).unwrap();
    let times: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(times, ["1", "5"]);
    ok(d, &["ingest", "o/events.csv", "--out", "again"]);
    assert_eq!(
        text,
        std::fs::read_to_string(d.join("again/events.csv")).unwrap()
    );
}

#[test]
fn analysis_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    ok(d, &["analyze", fx, "--out", "a"]);
    let snap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/snapshot.json")).unwrap()).unwrap();
    assert_eq!(snap["time"], START + 10 * WEEK);
    let dist: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/role_distribution.json")).unwrap())
            .unwrap();
    let total: f64 = dist
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
    let metrics = std::fs::read_to_string(d.join("a/metrics.csv")).unwrap();
    assert!(metrics.starts_with("entity,metric,value\n"));

    let at = (START + 5 * WEEK).to_string();
    ok(d, &["assign-roles", fx, "--at", &at, "--out", "r"]);
    let roles = std::fs::read_to_string(d.join("r/roles.csv")).unwrap();
    assert!(roles.starts_with("entity,"));
    let rules: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("r/role_rules.json")).unwrap())
            .unwrap();
    assert_eq!(rules["observer_max_activity"], 1.0);

    ok(d, &["communities", fx, "--out", "c"]);
    let groups: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("c/groups.json")).unwrap()).unwrap();
    assert_eq!(groups.as_array().unwrap().len(), 10);
    assert!(std::fs::read_to_string(d.join("c/evolution.csv"))
        .unwrap()
        .starts_with("window,kind,from,to,jaccard\n"));
}

#[test]
fn link_prediction_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = fixture();
    let split = (START + 5 * WEEK).to_string();
    for model in ["CN", "AA", "PA", "FOAF"] {
        ok(
            d,
            &[
                "predict-links",
                fx.to_str().unwrap(),
                "--split",
                &split,
                "--model",
                model,
                "--k",
                "10",
                "--out",
                model,
            ],
        );
        let preds = std::fs::read_to_string(d.join(model).join("predictions.csv")).unwrap();
        assert_eq!(preds.lines().count(), 11, "{model}");
        let score: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(d.join(model).join("link_prediction.json")).unwrap(),
        )
        .unwrap();
        let p = score["precision_at_k"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn simulate_from_end_and_compare_new() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    let cfg = r#"{"steps": 2, "seed": 3}"#;
    std::fs::write(d.join("cfg.json"), cfg).unwrap();
    ok(d, &["simulate", fx, "--config", "cfg.json", "--out", "s"]);
    let traj = std::fs::read_to_string(d.join("s/trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 3);
    let sim: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("s/simulation.json")).unwrap())
            .unwrap();
    assert_eq!(sim["start"], START + 10 * WEEK);
    assert_eq!(sim["end"], START + 12 * WEEK);
    assert_eq!(sim["config"]["seed"], 3);

    let split = (START + 10 * WEEK).to_string();
    ok(
        d,
        &[
            "compare",
            "s/predicted.csv",
            "s/predicted.csv",
            "--scope",
            "new",
            "--split",
            &split,
            "--out",
            "c",
        ],
    );
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("c/comparison.json")).unwrap())
            .unwrap();
    assert_eq!(cmp["population_scope"], "new_entities_only");
    assert_eq!(cmp["l1_distance"], 0.0);
    // The observed log has nobody after its end, so that cohort is empty.
    assert_eq!(
        code(
            d,
            &[
                "compare",
                fx,
                "s/predicted.csv",
                "--scope",
                "new",
                "--split",
                &split,
                "--out",
                "c2"
            ]
        ),
        2
    );
}

#[test]
fn report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    ok(d, &["compare", fx, fx, "--out", "c"]);
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("c/comparison.json")).unwrap())
            .unwrap();
    assert_eq!(cmp["l1_distance"], 0.0);
    ok(
        d,
        &[
            "report",
            "c/comparison.json",
            "--format",
            "svg",
            "--out",
            "r",
        ],
    );
    assert!(d.join("r/report.svg").exists());
    assert!(!d.join("r/report.csv").exists());
    ok(d, &["report", "c/comparison.json", "--out", "r"]);
    let json = std::fs::read(d.join("r/report.json")).unwrap();
    let back: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(back, cmp);
}

#[test]
fn calibrate_writes_history() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = fixture();
    let split = (START + 3 * WEEK).to_string();
    ok(
        d,
        &[
            "calibrate",
            fx.to_str().unwrap(),
            "--split",
            &split,
            "--rounds",
            "1",
            "--out",
            "k",
        ],
    );
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("k/calibration.json")).unwrap())
            .unwrap();
    let history = result["history"].as_array().unwrap();
    assert_eq!(history[0]["round"], 0);
    let best = result["best_l1"].as_f64().unwrap();
    assert!(best <= history[0]["l1"].as_f64().unwrap());
    let cfg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("k/calibrated_config.json")).unwrap())
            .unwrap();
    assert_eq!(cfg, result["best"]);
}
