use std::process::Command;

fn fca(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fca")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn write_temp(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("fca-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const THREE_STEP: &str = r#"{"states":["A","B","C","H"],"blank":"_","initial":"A","halt":"H","transitions":[
 {"state":"A","read":"_","write":"1","move":"R","next":"B"},
 {"state":"B","read":"_","write":"1","move":"R","next":"C"},
 {"state":"C","read":"_","write":"1","move":"R","next":"H"}]}"#;

#[test]
fn tmca_build_counts() {
    let tm = write_temp("tm.json", THREE_STEP);
    let (code, out) = fca(&["tmca", "build", &tm]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let s = &v["summary"];
    assert_eq!((s["states"].as_u64(), s["tiles"].as_u64(), s["valid_2x2"].as_u64()), (Some(18), Some(9), Some(101)));
}

#[test]
fn classify_tags_and_bad_input() {
    let f = write_temp("fam.json", r#"{"neighbor_sets":[[[-1,0],[1,0]]]}"#);
    let (code, out) = fca(&["classify", &f]);
    assert_eq!(code, 0);
    assert!(out.contains("StronglySubcritical"), "{out}");
    let bad = write_temp("bad.json", "[[[0,0]]");
    assert_eq!(fca(&["classify", &bad]).0, 2);
}

#[test]
fn looper_has_no_obstacle() {
    let tm = write_temp("loop.json", r#"{"states":["A","H"],"blank":"_","initial":"A","halt":"H","transitions":[
 {"state":"A","read":"_","write":"_","move":"R","next":"A"}]}"#);
    assert_eq!(fca(&["tmca", "obstacle", &tm, "--budget", "200"]).0, 3);
}

#[test]
fn scan_csv_shape() {
    let (code, out) = fca(&["scan", "--rule", "oriented", "--p-grid", "0.2,0.6", "--width", "16", "--height", "16", "--horizon", "32", "--trials", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 3, "{out}");
}

#[test]
fn config_file_fields_and_flag_precedence() {
    let cfg = write_temp("cfg.json", r#"{"seed": 4, "format": "csv", "scan": {"rule": "oriented", "p_grid": "0.3,0.7", "width": 16, "height": 16, "horizon": 32, "trials": 4}}"#);
    let (code, out) = fca(&["--config", &cfg, "scan"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().count(), 3);
    let (code, out) = fca(&["--config", &cfg, "scan", "--p-grid", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
    let bad = write_temp("cfg-bad.json", r#"{"sead": 4}"#);
    assert_eq!(fca(&["--config", &bad, "scan"]).0, 2);
}
