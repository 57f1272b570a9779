use std::process::Command;

fn hetmod(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hetmod")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn check_exit_codes() {
    assert_eq!(hetmod(&["check", "iwasawa"]).0, 0);
    assert_eq!(hetmod(&["check", "torus"]).0, 0);
    let (code, out, _) = hetmod(&["check", "calabi-eckmann"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["F1"]["pass"], false);
    assert_eq!(v["D2"]["pass"], false);
    assert_eq!(v["alpha_prime"], "α′ arbitrary");
}

#[test]
fn off_anomaly_iwasawa() {
    let (code, out, _) = hetmod(&["check", "iwasawa", "--alpha-prime", "-7/2"]);
    assert_eq!(code, 1);
    assert!(out.contains("\"alpha_prime\": \"-7/2\""));
    let (code, _, err) = hetmod(&["cohomology", "iwasawa", "--alpha-prime", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("anomaly residual"));
}

#[test]
fn degenerate_alpha_is_flagged() {
    let (code, out, _) = hetmod(&["symbol", "torus", "--alpha-prime", "0", "--samples", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"degenerate\": true"));
}

#[test]
fn input_errors() {
    assert_eq!(hetmod(&["check", "no-such-model"]).0, 2);
    assert_eq!(hetmod(&["check", "iwasawa", "--alpha-prime", "1/2 i"]).0, 2);
    assert_eq!(hetmod(&["check", "iwasawa", "--alpha-prime", "x"]).0, 2);
    assert_eq!(hetmod(&["frobnicate", "iwasawa"]).0, 2);
    let (code, _, err) = hetmod(&["trivialize", "calabi-eckmann"]);
    assert_eq!(code, 2);
    assert!(err.contains("no polynomial chart"));
}

#[test]
fn model_file_and_out() {
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/iwasawa_doubled_f.json");
    let out = std::env::temp_dir().join(format!("hetmod-cli-{}.json", std::process::id()));
    let (code, stdout, _) = hetmod(&["serre", model, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    std::fs::remove_file(&out).ok();
    assert_eq!(v["h"], serde_json::json!([6, 11, 11, 6]));
    assert_eq!(v["model"], "iwasawa-doubled-f");
}
