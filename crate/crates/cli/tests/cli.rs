use std::path::Path;
use std::process::{Command, Output};

fn bcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcast")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("JSON output")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_is_reproducible() {
    let args = ["gen", "--k", "2", "--d", "3", "--theta", "0.5", "--seed", "7"];
    let a = bcast(&args);
    let b = bcast(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a.stdout);
    assert_eq!(v["levels"].as_array().unwrap().len(), 4);
    assert_eq!(v["levels"][3].as_array().unwrap().len(), 8);
    let c = bcast(&["gen", "--k", "2", "--d", "3", "--theta", "0.5", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bp_reproduces_the_detect_posterior() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("trees");
    let log = dir.path().join("log.jsonl");
    let o = bcast(&[
        "detect",
        "--k",
        "3",
        "--d",
        "2",
        "--theta",
        "3/5",
        "--trials",
        "4",
        "--estimator",
        "bp-exact",
        "--seed",
        "5",
        "--dump",
        p(&trees),
        "--log",
        p(&log),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&log).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    for (t, line) in lines.iter().enumerate() {
        let tree = trees.join(format!("trial-{t}.json"));
        let bp = bcast(&["bp", "--tree", p(&tree), "--theta", "3/5", "--mode", "rational"]);
        assert_eq!(code(&bp), 0);
        let v = json(&bp.stdout);
        assert_eq!(v["exact"], line["posterior"]["exact"]);
        assert_eq!(v["argmax"], line["posterior"]["argmax"]);
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&bcast(&["no-such-command"])), 1);
    assert_eq!(code(&bcast(&["gen", "--k", "2", "--d", "3", "--no-such-flag"])), 1);
    assert_eq!(code(&bcast(&["gen", "--k", "2", "--d", "3"])), 1, "theta is required for binary generators");
    assert_eq!(code(&bcast(&["gen", "--k", "2", "--d", "3", "--theta", "0.5", "--seed", "-1"])), 1);
    assert_eq!(code(&bcast(&["verify", "--only", "99"])), 1);
    let help = bcast(&["--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for flag in ["--seed", "--config", "--out", "--format", "--mode", "--jobs"] {
        assert!(text.contains(flag), "{flag} missing from --help");
    }
}

#[test]
fn io_errors_exit_3() {
    let o = bcast(&["bp", "--tree", "/definitely/not/here.json", "--theta", "1/2"]);
    assert_eq!(code(&o), 3);
    let o = bcast(&["gen", "--k", "2", "--d", "2", "--theta", "1/2", "--out", "/definitely/not/here.json"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_exit_codes_follow_the_criteria() {
    let ok = bcast(&["verify", "--quick", "--only", "1,2,8,14"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let lines: Vec<_> = std::str::from_utf8(&ok.stdout).unwrap().lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.starts_with("PASS")));
}

#[test]
fn verify_runs_config_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eq.json");
    let out = dir.path().join("eq.csv");
    let body = |corrupt: &str| {
        format!(
            r#"{{"schema_version": 1, "experiment": "equivalence-suite", "seed": 2, "k": [2], "d": [2],
                "theta": [0.5], "trials": 3000{corrupt}}}"#
        )
    };
    std::fs::write(&cfg, body("")).unwrap();
    let o = bcast(&["verify", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("experiment,k,theta_or_channel"));

    std::fs::write(&cfg, body(r#", "corrupt": {"generator": "restrictions", "theta_offset": 0.25}"#)).unwrap();
    let o = bcast(&["verify", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("restrictions"));

    std::fs::write(&cfg, body(r#", "bogus_key": 1"#)).unwrap();
    assert_eq!(code(&bcast(&["verify", "--config", p(&cfg)])), 1);
}

#[test]
fn scans_are_independent_of_jobs() {
    let run = |jobs: &str| {
        bcast(&[
            "scan-ks", "--k", "2,3", "--theta", "0.4,0.9", "--d", "3,4", "--trials", "300", "--seed", "9", "--jobs",
            jobs,
        ])
    };
    let a = run("1");
    let b = run("3");
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    // header plus 2 * 2 * 2 points times 3 estimators
    assert_eq!(a.stdout.iter().filter(|&&c| c == b'\n').count(), 1 + 24);
}

#[test]
fn scan_noise_writes_json_and_reports_monotonicity() {
    let o = bcast(&["scan-noise", "--k", "2", "--theta", "0.9", "--d", "1,2", "--s", "0,0.5", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o.stdout);
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[0]["estimator"], "bayes-exact");

    // at s > 0 deeper trees can do better than shallow ones; the table is
    // still written and the failed check is reported
    let o = bcast(&["scan-noise", "--k", "2", "--theta", "0.9", "--d", "1,2", "--s", "0,0.25"]);
    assert_eq!(code(&o), 2);
    assert_eq!(o.stdout.iter().filter(|&&c| c == b'\n').count(), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonincreasing in d (k=2, theta=0.9, s=0.25)"));
}

#[test]
fn compilers_check_their_output() {
    let g = bcast(&["compile-gadget", "--formula", "(or (and x1 x2) (not x3))", "--check"]);
    assert_eq!(code(&g), 0);
    let v = json(&g.stdout);
    assert_eq!(v["assignments"], 8);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);

    let b = bcast(&["compile-barrington", "--formula", "(and x1 (or x2 x3))", "--inputs", "110", "--check"]);
    assert_eq!(code(&b), 0);
    let v = json(&b.stdout);
    assert_eq!(v["mismatches"], 0);
    assert_eq!(v["value"], true);
    assert_eq!(v["product"], v["program"]["target"]);

    assert_eq!(code(&bcast(&["compile-gadget", "--formula", "(and x1"])), 1);
}

#[test]
fn reduce_word_decides_with_a_perfect_oracle() {
    for promise in ["identity", "target"] {
        let o = bcast(&["reduce-word", "--length", "12", "--promise", promise, "--oracle", "perfect", "--votes", "21"]);
        assert_eq!(code(&o), 0);
        let v = json(&o.stdout);
        assert_eq!(v["correct"], true);
        assert_eq!(v["outcome"]["decision"], promise);
    }
}

#[test]
fn a5_runs_both_models() {
    let o = bcast(&["a5", "--k", "60", "--d", "1", "--trials", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("pair3600") && text.contains("class16"));
}
