use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn wmog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmog")).args(args).current_dir(root()).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(root().join("corpus/golden").join(name)).unwrap()
}

#[test]
fn json_reports_match_goldens() {
    let cases: [(&[&str], &str); 7] = [
        (&["check", "corpus/wrc.outline"], "wrc.check.json"),
        (&["check", "corpus/wrc-broken.outline"], "wrc-broken.check.json"),
        (&["check", "corpus/empty.outline"], "empty.check.json"),
        (&["oracle", "corpus/wrc-broken.outline", "--model", "sc"], "wrc-broken.oracle-sc.json"),
        (&["axioms", "--model", "sc"], "axioms-sc.json"),
        (&["litmus", "corpus/sb.litmus", "--model", "tso"], "sb.litmus-tso.json"),
        (&["litmus", "corpus/wrc.outline", "--model", "tso"], "wrc.litmus-tso.json"),
    ];
    for (args, file) in cases {
        let mut a = args.to_vec();
        a.extend(["--json", "-"]);
        let first = wmog(&a);
        let second = wmog(&a);
        let text = String::from_utf8(first.stdout).unwrap();
        assert_eq!(text, golden(file), "{file}");
        assert_eq!(first.status, second.status);
        assert_eq!(text.as_bytes(), second.stdout.as_slice(), "{file} not deterministic");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&wmog(&["check", "corpus/wrc.outline"])), 0);
    assert_eq!(code(&wmog(&["check", "corpus/empty.outline"])), 0);
    assert_eq!(code(&wmog(&["check", "corpus/wrc-broken.outline"])), 1);
    assert_eq!(code(&wmog(&["oracle", "corpus/wrc-broken.outline"])), 1);
    assert_eq!(code(&wmog(&["check", "corpus/missing.outline"])), 2);
    assert_eq!(code(&wmog(&["check", "corpus/sb.litmus"])), 2);
    assert_eq!(code(&wmog(&["axioms", "--model", "tso"])), 3);
    assert_eq!(code(&wmog(&["litmus", "corpus/sb.litmus", "--model", "tso"])), 1);
    assert_eq!(code(&wmog(&["litmus", "corpus/sb.litmus"])), 0);
    assert_eq!(code(&wmog(&["litmus", "corpus/mp.litmus", "--model", "tso"])), 0);
}

#[test]
fn parse_errors_carry_positions() {
    let dir = std::env::temp_dir().join(format!("wmog-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.outline");
    std::fs::write(&bad, "thread 1 {\n  { true }\n  x := ;\n}\n").unwrap();
    let o = wmog(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.outline:3:"), "{err}");
}

#[test]
fn restricted_axioms_make_wrc_fail() {
    let o = wmog(&["check", "corpus/wrc.outline", "--allow-axioms", "C3,SV1,SV2,RW2,RW3"]);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("not discharged"));
}

#[test]
fn semantic_fallback_is_flagged() {
    let o = wmog(&["check", "corpus/wrc-broken.outline", "--semantic-fallback", "--json", "-"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["semantic_fallback"], "sc");
    // The broken postcondition is false on SC too, so it stays failed.
    assert_eq!(v["failures"], serde_json::json!(["E4"]));
    assert_eq!(code(&o), 1);
}

#[test]
fn transfer_from_saved_report() {
    let dir = std::env::temp_dir().join(format!("wmog-transfer-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("wrc.json");
    assert_eq!(code(&wmog(&["check", "corpus/wrc.outline", "--json", report.to_str().unwrap()])), 0);
    let o = wmog(&["transfer", "--report", report.to_str().unwrap(), "--model", "sc"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("transferable to sc"));
    let broken = dir.join("broken.json");
    wmog(&["check", "corpus/wrc-broken.outline", "--json", broken.to_str().unwrap()]);
    assert_eq!(code(&wmog(&["transfer", "--report", broken.to_str().unwrap()])), 1);
}

#[test]
fn mutated_model_reports_witnesses() {
    let o = wmog(&["axioms", "--model", "sc", "--mutate", "default-interf", "--json", "-"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["holds"] == false)
        .map(|r| r["axiom"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["RW2"]);
}

#[test]
fn value_override_rebuilds_the_config() {
    let o = wmog(&["axioms", "--model", "sc", "--values", "0,1,2", "--json", "-"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["states"], 3u64.pow(5));
    assert_eq!(code(&wmog(&["axioms", "--values", "1,2"])), 2);
}
