use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tensorforge"));
    c.env_remove("TENSORFORGE_SEED");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tensorforge-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let out = bin().args(args).output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, out)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sml_round_trip() {
    let dir = scratch("sml");
    let inst = dir.join("t.json");
    let (code, _, _) = run(&["gen", "--kind", "sml", "--k", "2", "--d", "4", "--nj", "3", "--seed", "7", "--out", p(&inst)]);
    assert_eq!(code, 0);
    assert!(dir.join("t.plant.json").exists());

    let dec = dir.join("dec.json");
    let (code, v, _) = run(&["decompose", p(&inst), "--seed", "7", "-o", p(&dec)]);
    assert_eq!(code, 0);
    assert_eq!(v, Value::Null);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    assert_eq!(v["rank"], 2);
    assert_eq!(v["verdict"], "Equal");

    let (code, v, _) = run(&["verify", p(&inst), p(&dec)]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("Equal")));

    let (code, v, out) = run(&["decompose", p(&inst), "--kmax", "1"]);
    assert_eq!(code, 4);
    assert_eq!(v["error"]["kind"], "RankExceedsBound");
    assert!(String::from_utf8_lossy(&out.stderr).contains("RankExceedsBound"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = scratch("parse");
    assert_eq!(run(&["rank", p(&dir.join("missing.json"))]).0, 2);
    assert_eq!(run(&["gen", "--kind", "sml", "--field", "7^x", "--out", p(&dir.join("x.json"))]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    std::fs::write(dir.join("bad.json"), "{ not json").unwrap();
    assert_eq!(run(&["rank", p(&dir.join("bad.json"))]).0, 2);
}

#[test]
fn summary_format() {
    let dir = scratch("summary");
    let inst = dir.join("w.json");
    run(&["gen", "--kind", "waring", "--k", "2", "--d", "3", "--n", "3", "--field", "101", "--seed", "3", "--out", p(&inst)]);
    let out = bin().args(["rank-sym", p(&inst), "--format", "summary"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(keys, ["rank", "k", "field", "time"]);
    assert!(text.contains("field: F_101"));
}

#[test]
fn seed_from_environment() {
    let dir = scratch("env");
    let inst = dir.join("s.json");
    let out = bin().env("TENSORFORGE_SEED", "41").args(["gen", "--kind", "system", "--planted", "--out", p(&inst)]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 41);
    let a = std::fs::read(&inst).unwrap();
    run(&["gen", "--kind", "system", "--planted", "--seed", "41", "--out", p(&inst)]);
    assert_eq!(a, std::fs::read(&inst).unwrap());
}

#[test]
fn planted_system_is_satisfied() {
    let dir = scratch("solve");
    let inst = dir.join("sys.json");
    run(&["gen", "--kind", "system", "--n", "2", "--m", "3", "--d", "2", "--field", "13", "--planted", "--seed", "5", "--out", p(&inst)]);
    let (code, v, _) = run(&["solve", p(&inst)]);
    assert_eq!(code, 0);
    assert_eq!(v["solvable"], true);
    assert_eq!(v["verdict"], "Satisfied");
}

#[test]
fn lowdeg_circuit_round_trip() {
    let dir = scratch("ml");
    let inst = dir.join("c.json");
    run(&["gen", "--kind", "ml-lowdeg", "--k", "2", "--d", "2", "--n", "8", "--seed", "2", "--out", p(&inst)]);
    let learned = dir.join("learned.json");
    let (code, _, _) = run(&["reconstruct-ml", p(&inst), "--k", "2", "-o", p(&learned)]);
    assert_eq!(code, 0);
    let (code, v, _) = run(&["verify", p(&inst), p(&learned)]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("Equal")));
}

proptest::proptest! {
    #[test]
    fn field_strings_round_trip(p in 2u64..1_000_000, t in 1usize..8) {
        let d = tensorforge_cli::parse_field(&format!("{p}^{t}")).unwrap();
        proptest::prop_assert_eq!(d.prime, p);
        proptest::prop_assert_eq!(d.ext_degree, (t > 1).then_some(t));
        proptest::prop_assert_eq!(tensorforge_cli::parse_field(&p.to_string()).unwrap().ext_degree, None);
    }
}
