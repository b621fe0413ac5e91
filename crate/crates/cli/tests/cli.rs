use std::path::Path;
use std::process::{Command, Output};

fn tilenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilenet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rules_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../rules"))
}

#[test]
fn analyze_penrose() {
    let text = stdout(&tilenet(&["analyze", "--rule", "penrose"]));
    let v: toml::Table = text.parse().unwrap();
    let s = &v["spectrum"];
    assert_eq!(s["pisot"].as_bool(), Some(true));
    let l2 = s["lambda2abs"].as_float().unwrap();
    assert!((l2 - 0.381966).abs() < 1e-6, "{l2}");
    let xi = v["rule"]["xi"].as_float().unwrap();
    assert!((xi - 1.618033988749895).abs() < 1e-15);
}

#[test]
fn analyze_rule_file_matches_builtin() {
    let path = rules_dir().join("penrose.rule");
    let a = stdout(&tilenet(&["analyze", "--rule", path.to_str().unwrap()]));
    let b = stdout(&tilenet(&["analyze", "--rule", "penrose"]));
    assert_eq!(a, b);
}

#[test]
fn bk_is_reproducible() {
    let args = ["discrepancy", "bk", "--rule", "penrose", "--jmax", "8", "--seed", "7"];
    let a = tilenet(&args);
    let b = tilenet(&args);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn chair_profile_is_flat() {
    let text = stdout(&tilenet(&["match", "--rule", "chair", "--levels", "3..6"]));
    let v: toml::Table = text.parse().unwrap();
    let e = v["exponent"].as_float().unwrap();
    assert!(e <= 0.1, "exponent {e}");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn unknown_child_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.rule");
    std::fs::write(
        &path,
        "rule bad\nq 4\nxi 2\ntile 1 (0,0) (1,0) (0,1)\nchild 1 99 rot 0 at (0,0)\n",
    )
    .unwrap();
    let o = tilenet(&["validate", "--rule", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error[parse]"), "{err}");
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn exit_codes() {
    let o = tilenet(&["analyze", "--rule", "no-such-rule"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tilenet(&["match", "--levels", "7..3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tilenet(&["analyze", "--out", "/definitely/missing/dir/report.toml"]);
    assert_eq!(o.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[io]"));
    let o = tilenet(&["generate", "--level", "40", "--out", "/tmp/never-written.csv"]);
    assert_eq!(o.status.code(), Some(5));
    let o = tilenet(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_builtins() {
    for r in ["penrose", "chair"] {
        let v: toml::Table = stdout(&tilenet(&["validate", "--rule", r])).parse().unwrap();
        assert_eq!(v["validation"]["ok"].as_bool(), Some(true));
    }
}

#[test]
fn generate_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let patch = dir.path().join("patch.csv");
    let net = dir.path().join("net.csv");
    let text = stdout(&tilenet(&[
        "generate",
        "--level",
        "5",
        "--out",
        patch.to_str().unwrap(),
        "--net",
        net.to_str().unwrap(),
    ]));
    let v: toml::Table = text.parse().unwrap();
    assert_eq!(v["tiles"].as_integer(), Some(144));
    let rows = std::fs::read_to_string(&net).unwrap();
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 145);

    let svg = dir.path().join("tiles.svg");
    stdout(&tilenet(&["render", "--level", "4", "--out", svg.to_str().unwrap()]));
    let first = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(first.matches("<polygon").count(), 55);
    stdout(&tilenet(&["render", "--level", "4", "--out", svg.to_str().unwrap()]));
    assert_eq!(std::fs::read_to_string(&svg).unwrap(), first);
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tiles.csv");
    stdout(&tilenet(&["discrepancy", "tiles", "--rule", "chair", "--csv", csv.to_str().unwrap()]));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("tile,m,value"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0.0")));

    let pairs = dir.path().join("pairs.csv");
    stdout(&tilenet(&[
        "match",
        "--rule",
        "chair",
        "--levels",
        "3,4",
        "--pairs-csv",
        pairs.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&pairs).unwrap();
    assert_eq!(text.lines().next(), Some("yx,yy,lx,ly,displacement"));
    assert_eq!(text.lines().count(), 1 + 36);
}
