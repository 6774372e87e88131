use std::io::Write;
use std::process::{Command, Stdio};

fn c2(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_c2")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn value<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}

#[test]
fn finite_sat_prints_a_model() {
    let (code, out) = c2(&["decide", "--finite", "Ax E=1 y (f(x,y) & ~(x=y))"]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "verdict"), Some("sat"));
    assert_eq!(value(&out, "Z"), Some("4"));
    assert!(value(&out, "finite-model-size").is_some());
}

#[test]
fn contradiction_exits_one() {
    let (code, out) = c2(&["decide", "--finite", "Ax (p(x) & ~p(x))"]);
    assert_eq!(code, 1);
    assert_eq!(value(&out, "verdict"), Some("unsat"));
}

#[test]
fn infinity_axiom_from_file_has_inf_entries() {
    let dir = std::env::temp_dir().join(format!("c2-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("inf.c2");
    let cert = dir.join("cert.txt");
    std::fs::write(&input, "Ax E=1 y (f(x,y) & ~(x=y)) & Ay E<=1 x (f(x,y) & ~(x=y)) & Ey Ax ~f(x,y)\n").unwrap();
    let (code, out) =
        c2(&["decide", "--general", input.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(value(&out, "general-w").unwrap().contains("inf"));
    let text = std::fs::read_to_string(&cert).unwrap();
    assert!(text.contains("frame:") && text.contains("inf"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn stdin_and_quiet() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_c2"))
        .args(["decide", "--quiet", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"Ex p(x) & Ex ~p(x)").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "verdict: sat\n");
}

#[test]
fn bad_input_exits_three() {
    assert_eq!(c2(&["decide", "Ax ("]).0, 3);
    assert_eq!(c2(&["decide", "--max-frames", "0", "Ex p(x)"]).0, 3);
    assert_eq!(c2(&["decide", "--finite", "--general", "Ex p(x)"]).0, 3);
    assert_eq!(c2(&["decide", "Ax (p(x) & p(x,x))"]).0, 3);
}

#[test]
fn tight_budget_is_unknown() {
    let phi = "Ax E=1 y (f(x,y) & ~(x=y)) & Ay E<=1 x (f(x,y) & ~(x=y)) & Ey Ax ~f(x,y)";
    let (code, out) = c2(&["decide", "--finite", "--max-frames", "3", phi]);
    assert_eq!(code, 2);
    assert!(value(&out, "finite-reason").is_some());
}
