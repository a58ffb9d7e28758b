use std::path::PathBuf;
use std::process::Command;

use lmtk::{run, EXIT_FAIL, EXIT_INPUT, EXIT_PASS, EXIT_UNKNOWN};

fn sample(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "systems", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn lmtk(args: &[&str]) -> (i32, String) {
    run(std::iter::once("lmtk").chain(args.iter().copied()))
}

fn binary(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lmtk"));
    cmd.args(args).env_remove("LMTK_FUEL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn certified_system_exits_zero() {
    let (code, out) = lmtk(&["check", &sample("fgh.trs")]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.contains("LM-system: PASS (collapse bounded at depth 5)"), "{out}");
    assert!(!out.contains("INTERNAL-INCONSISTENCY"));
}

#[test]
fn failing_system_exits_one_and_names_the_conditions() {
    let (code, out) = lmtk(&["check", &sample("root_stable.trs")]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("f(x,x) = f(x1,x1)"), "{out}");
    assert!(out.contains("LM-system: FAIL ("), "{out}");

    let (code, out) = lmtk(&["check", &sample("left_reducible.trs")]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("almost-left-reduced"), "{out}");
}

#[test]
fn json_report_is_machine_readable() {
    let (code, out) = lmtk(&["check", &sample("fgh.trs"), "--json"]);
    assert_eq!(code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["overall"], "pass");
    assert_eq!(v["conditions"].as_array().unwrap().len(), 7);
    assert_eq!(v["collapse_depth"], 5);

    let (_, out) = lmtk(&["normalize", &sample("three_rules.trs"), "f(b,i(b))", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["complete"], true);
    assert_eq!(v["trace"]["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn normalize_prints_the_trace() {
    let (code, out) = lmtk(&["normalize", &sample("three_rules.trs"), "f(b,i(b))"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(
        out,
        "[r1] at e: f(b,i(b)) -> g(b)\n[r2] at e: g(b) -> c\nnormal form: c (2 steps)\n"
    );
}

#[test]
fn running_out_of_fuel_is_unknown() {
    let (code, out) = lmtk(&["normalize", &sample("three_rules.trs"), "f(b,i(b))", "--fuel", "1"]);
    assert_eq!(code, EXIT_UNKNOWN);
    assert!(out.contains("fuel exhausted"), "{out}");
}

#[test]
fn fuel_is_read_from_the_environment() {
    let args = ["normalize", &sample("three_rules.trs"), "f(b,i(b))"];
    let (code, ..) = binary(&args, &[("LMTK_FUEL", "1")]);
    assert_eq!(code, EXIT_UNKNOWN);
    let (code, ..) = binary(&args, &[("LMTK_FUEL", "2")]);
    assert_eq!(code, EXIT_PASS);
    let (code, _, err) = binary(&args, &[("LMTK_FUEL", "lots")]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("LMTK_FUEL"), "{err}");
}

#[test]
fn parse_errors_exit_three_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.trs");
    std::fs::write(&path, "sig: f/1 g/2\nvars: x y\nrules:\n  f(x) -> g(x,y)\n").unwrap();
    let (code, out, err) = binary(&["check", path.to_str().unwrap()], &[]);
    assert_eq!(code, EXIT_INPUT);
    assert!(out.is_empty());
    assert!(err.contains(":4:11:"), "{err}");

    let (code, ..) = binary(&["check", "/nonexistent/system.trs"], &[]);
    assert_eq!(code, EXIT_INPUT);
    let (code, ..) = binary(&["frobnicate"], &[]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn reduce_output_is_a_reduced_system() {
    let (code, out) = lmtk(&["reduce", &sample("left_reducible.trs")]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("# deleted r1"), "{out}");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reduced.trs");
    std::fs::write(&path, &out).unwrap();
    let (code, again) = lmtk(&["reduce", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS);
    assert!(!again.contains("# deleted"), "{again}");
}

#[test]
fn forward_closure_reports_generations() {
    let (code, out) = lmtk(&["fc", &sample("three_rules_minus_one.trs")]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.starts_with("NR1: 1 new rule\n"), "{out}");
    assert!(out.contains("f(b,i(b)) -> c"), "{out}");
    let (code, out) = lmtk(&["fc", &sample("double.trs")]);
    assert_eq!(code, EXIT_UNKNOWN);
    assert!(out.contains("no fixpoint within 16 generations"));
}

#[test]
fn overlap_commands() {
    let (code, out) = lmtk(&["rhs", &sample("root_stable.trs")]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("root-stable: f(x,x) = f(x1,x1)"), "{out}");
    let (_, out) = lmtk(&["cps", &sample("self_overlap.trs")]);
    assert!(out.contains("<f(g(x1)), g(f(x1))> from [r1] over [r1] at 1"), "{out}");
    let (_, out) = lmtk(&["nosup", &sample("self_overlap.trs")]);
    assert!(out.contains("1 superposition"), "{out}");
    let (code, out) = lmtk(&["collapse", &sample("root_stable.trs")]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("f(0,0)"), "{out}");
    let (code, _) = lmtk(&["collapse", &sample("fgh.trs")]);
    assert_eq!(code, EXIT_PASS);
}

#[test]
fn legacy_files_are_accepted() {
    let (code, out) = lmtk(&["reduce", &sample("legacy.trs")]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.contains("rules:"));
}

#[test]
fn minsky_pipeline_from_the_command_line() {
    let m = sample("tiny.machine");
    let (code, out) = lmtk(&["minsky", "validate", &m]);
    assert_eq!(code, EXIT_PASS, "{out}");
    let (code, out) = lmtk(&["minsky", "simulate", &m]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("halted in qL after 2 steps"), "{out}");
    let (code, out) = lmtk(&["minsky", "cap", &m]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.contains("cap: g'(g(g'(f_qL(f_q1(f_q0(◇))))))"), "{out}");
    assert!(out.contains("normal form: c(e,0,0,0)"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.trs");
    let (code, text) = lmtk(&["minsky", "encode", &m]);
    assert_eq!(code, EXIT_PASS);
    std::fs::write(&path, text).unwrap();
    let (code, out) = lmtk(&["check", path.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(code, EXIT_PASS, "{out}");
    let (code, out) = lmtk(&[
        "cap",
        path.to_str().unwrap(),
        "--knowledge",
        "c(q0,0,0,0)",
        "--goal",
        "c(e,0,0,0)",
    ]);
    assert_eq!(code, EXIT_PASS, "{out}");
}

#[test]
fn invalid_machine_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.machine");
    std::fs::write(
        &path,
        "states: q0 q1 qL\ninitial: q0\nfinal: qL\nq0 1 + q1\nq0 2 + qL\n",
    )
    .unwrap();
    let (code, out) = lmtk(&["minsky", "validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_FAIL, "{out}");
    assert!(out.starts_with("invalid:"), "{out}");
}

#[test]
fn looping_rule_exhausts_fuel_without_crashing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.trs");
    std::fs::write(
        &path,
        "sig: h/2 a/2 c/0\nvars: x y\nrules:\n  h(a(y,y),a(y,x)) -> h(a(x,x),a(x,y))\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (code, out) = lmtk(&["normalize", p, "h(a(c,c),a(c,c))"]);
    assert_eq!(code, EXIT_UNKNOWN, "{out}");
    assert!(out.contains("fuel exhausted"), "{out}");
    let (code, out) = lmtk(&["collapse", p, "--depth", "3"]);
    assert_eq!(code, EXIT_UNKNOWN, "{out}");
    let (code, out) = lmtk(&["check", p]);
    assert_ne!(code, EXIT_PASS, "{out}");
}
