//! End-to-end runs of the binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use transgroups::catalog;
use transgroups::cli::AlgebraFile;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_transgroups"));
    c.env_remove("SEED");
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("catalog")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bracket_from_the_command_line() {
    assert_eq!(run(&["bracket", "p", "x^2*q + 2*x*r"]), (0, "2*x*q + 2*r\n".into(), String::new()));
}

#[test]
fn closure_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.alg", "vars: x y\nfield: p\nfield: x*q\n");
    let (code, out, _) = run(&["closure", &bad]);
    assert_eq!(code, 1);
    assert!(out.contains("residual q"), "{out}");
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.alg", "vars: x y\nfield: p +\n");
    assert_eq!(run(&["closure", &broken]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["catalog", "verify", "--entry", "no-such-entry"]).0, 2);
    assert_eq!(run(&["catalog", "verify", "--format", "yaml"]).0, 2);
    assert_eq!(run(&["invariants"]).0, 2);
}

#[test]
fn shipped_files_match_the_builtin_catalog() {
    let entries = catalog::builtin_entries();
    let mut shipped: Vec<String> = std::fs::read_dir(data_dir()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    shipped.sort();
    let expected: Vec<String> = entries.iter().map(|e| format!("{}.alg", e.id)).collect();
    assert_eq!(shipped, expected);
    for e in &entries {
        let text = std::fs::read_to_string(data_dir().join(format!("{}.alg", e.id))).unwrap();
        assert_eq!(text, e.to_alg_file().print(), "{} is stale", e.id);
        let parsed = AlgebraFile::parse(&text).unwrap();
        assert_eq!(parsed, e.to_alg_file());
        assert_eq!(parsed.algebra().unwrap(), e.algebra());
    }
}

/// Every subcommand over every shipped file, with the exit codes the
/// expectations imply.
#[test]
fn exit_codes_over_the_catalog() {
    for e in catalog::builtin_entries() {
        let path = data_dir().join(format!("{}.alg", e.id));
        let file = path.to_string_lossy().into_owned();
        let p = e.runs().into_iter().next().unwrap();
        let pstr: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        let pstr = pstr.join(",");
        let with_params = |args: &[&str]| {
            let mut a: Vec<&str> = args.to_vec();
            if !pstr.is_empty() {
                a.extend(["--params", pstr.as_str()]);
            }
            run(&a)
        };
        let (code, out, _) = run(&["closure", &file]);
        assert_eq!(code, 0, "{}: {out}", e.id);
        assert!(out.ends_with("jacobi: ok\n"));

        let (code, out, _) = with_params(&["invariants", &file, "--points", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), e.expected_at(&p).pair_invariant_count.to_string(), "{}", e.id);

        for j in &e.invariants {
            let (code, out, _) = with_params(&["verify", &file, "--invariant", j]);
            assert_eq!((code, out.as_str()), (0, "Proven\n"), "{}: {j}", e.id);
        }
        let (code, out, _) = with_params(&["verify", &file, "--invariant", "x1 + x2"]);
        assert_eq!(code, 1, "{}: {out}", e.id);
        assert!(out.starts_with("Refuted"));

        let (code, out, _) = with_params(&["flow", &file, "--gen", "1", "--from", &vec!["0.2"; e.vars.len()].join(","), "--t", "0.1"]);
        assert_eq!(code, 0);
        let drift: f64 = out.lines().find_map(|l| l.strip_prefix("drift: ")).unwrap().parse().unwrap();
        assert!(drift < 1e-8, "{}: {out}", e.id);

        let (code, out, _) = with_params(&["mobility", &file]);
        assert_eq!(code, 0);
        if let Some(b) = e.expected_at(&p).free_mobility {
            assert!(out.starts_with(&format!("free_mobility: {b}\n")), "{}: {out}", e.id);
        }
    }
}

#[test]
fn monodromy_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "rot.alg", "vars: x y z\nfield: p\nfield: y*p - x*q\nfield: x*r\n");
    assert_eq!(run(&["monodromy", &f, "--gen-combo", "0,1,0", "--from", "1,0,0", "--t-max", "10"]), (0, "period: 6.283185307\n".into(), String::new()));
    assert_eq!(run(&["monodromy", &f, "--gen-combo", "0,0,1", "--from", "1,0,0", "--t-max", "10"]).1, "period: None\n");
    assert_eq!(run(&["monodromy", &f, "--gen-combo", "0,1", "--from", "1,0,0"]).0, 2);
}

#[test]
fn catalog_verify_is_deterministic() {
    let a = run(&["catalog", "verify", "--entry", "ex94-24", "--seed", "7"]);
    assert_eq!(a.0, 0);
    assert!(a.1.contains("period 6.28318530"), "{}", a.1);
    let b = run(&["catalog", "verify", "--entry", "ex94-24", "--seed", "7"]);
    assert_eq!(a, b);
    let json = run(&["catalog", "verify", "--entry", "ex90-60c", "--format", "json"]);
    let seeded = bin().args(["catalog", "verify", "--entry", "ex90-60c", "--format", "json"]).env("SEED", "0").output().unwrap();
    assert_eq!(json.1.as_bytes(), seeded.stdout.as_slice());
    let v: serde_json::Value = serde_json::from_str(&json.1).unwrap();
    assert_eq!(v[0]["entry"], "ex90-60c");
    assert_eq!(v[0]["seed"], 0);
    assert!(v[0]["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn full_catalog_passes() {
    let (code, out, _) = run(&["catalog", "verify"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("[fail]"));
}
