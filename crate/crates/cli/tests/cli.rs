//! End-to-end runs of the `teamcheck` binary. Line-format outputs are
//! compared against `tests/golden/*.txt`; set `BLESS=1` to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamcheck")).args(args).env_remove("TEAMCHECK_BUDGET").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn golden(name: &str, out: &Output) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"));
    let actual = stdout(out);
    if std::env::var_os("BLESS").is_some() {
        fs::write(&path, &actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output of {name} changed");
}

fn path(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

#[test]
fn eval_sentence_on_two_elements() {
    let out = run(&["eval", "--model", &path("two.model"), "--formula", "forall x exists y (x != y)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "true\n");
}

#[test]
fn eval_violated_dependence_atom() {
    let out = run(&["eval", "--model", &path("two.model"), "--team", &path("violating.team"), "--formula", "=(x;y)"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "false\n");
}

#[test]
fn eval_lines_format() {
    let out = run(&["--format", "lines", "eval", "--model", &path("two.model"), "--team", &path("violating.team"), "--formula", "=(x;y) lor x = x"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("result: true\nteam-size: 2\nsteps: "), "{text}");
}

#[test]
fn eval_reads_formula_file() {
    let file = std::env::temp_dir().join(format!("teamcheck-formula-{}.txt", std::process::id()));
    fs::write(&file, "exists x forall y (x = y)\n").unwrap();
    let out = run(&["eval", "--model", &path("two.model"), "--formula", &format!("@{}", file.display())]);
    fs::remove_file(&file).unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_budget_exhaustion() {
    let out = run(&["eval", "--budget", "1", "--model", &path("two.model"), "--formula", "forall x exists y (x != y)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
    let env = Command::new(env!("CARGO_BIN_EXE_teamcheck"))
        .args(["eval", "--model", &path("two.model"), "--formula", "forall x exists y (x != y)"])
        .env("TEAMCHECK_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn errors_exit_with_two() {
    let free = run(&["eval", "--model", &path("two.model"), "--formula", "x = x"]);
    assert_eq!(free.status.code(), Some(2));
    assert!(stderr(&free).contains("--team"));
    let syntax = run(&["eval", "--model", &path("two.model"), "--formula", "x = "]);
    assert_eq!(syntax.status.code(), Some(2));
    let missing = run(&["eval", "--model", &path("absent.model"), "--formula", "top"]);
    assert_eq!(missing.status.code(), Some(2));
    let usage = run(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn translate_tilde_on_literal() {
    let out = run(&["translate", "tilde0", "~(x=y)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "dia (x != y)\n");
    let checked = run(&["translate", "tilde0", "~(x=y) \\/ ~=(x;y)", "--verify"]);
    assert_eq!(checked.status.code(), Some(0), "{}", stdout(&checked));
    let not_tilde0 = run(&["translate", "tilde0", "~(x = y /\\ x = x)"]);
    assert_eq!(not_tilde0.status.code(), Some(2));
}

#[test]
fn translate_normal_form() {
    let out = run(&["--format", "lines", "translate", "nf", "--nf", &path("single.nf"), "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    golden("translate_nf", &out);
}

#[test]
fn translate_normal_form_complement() {
    let out = run(&["--format", "lines", "translate", "nf-complement", "--nf", &path("single.nf"), "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    golden("translate_nf_complement", &out);
}

#[test]
fn translate_other_kinds_verify() {
    for args in [
        &["translate", "const-elim", "exists x (const(x) /\\ forall y R(x,y))", "--verify", "--sizes", "2,3"][..],
        &["translate", "downclosure-chi", "--dep", "nonconst", "--verify", "--sizes", "2,3"],
        &["translate", "downclosure-chi", "--dep", "all", "--verify", "--sizes", "2,3"],
        &["translate", "all-rel", "--vars", "x", "--verify", "--sizes", "2,3"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}{}", stdout(&out), stderr(&out));
        assert!(stdout(&out).contains("ok (domain sizes"), "{args:?}");
    }
}

#[test]
fn classify_constancy() {
    let out = run(&["--format", "lines", "classify", "--dep", "const"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("downwards-closed: yes"));
    golden("classify_const", &out);
}

#[test]
fn classify_defined_dependency() {
    let defs = data("defs.txt");
    let out = run(&["--defs", defs.to_str().unwrap(), "classify", "--dep", "atleasttwo"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("upwards-closed: yes") && text.contains("downwards-closed: no"), "{text}");
}

#[test]
fn maxrel_constancy() {
    let out = run(&["--format", "lines", "maxrel", "--dep", "const", "--size", "2"]);
    assert_eq!(out.status.code(), Some(0));
    golden("maxrel_const", &out);
    let from_model = run(&["maxrel", "--dep", "const", "--model", &path("two.model")]);
    assert_eq!(stdout(&from_model).lines().count(), 2);
}

#[test]
fn stairs_even_cardinality() {
    let out = run(&["--format", "lines", "stairs", "--dep", "evencard", "--size", "4"]);
    assert_eq!(out.status.code(), Some(0));
    golden("stairs_evencard", &out);
    let human = run(&["stairs", "--dep", "evencard", "--size", "4"]);
    assert!(stdout(&human).contains("indicator"));
}

#[test]
fn equiv_counterexample_replays() {
    let (a, b) = ("const(x)", "all(x)");
    let out = run(&["equiv", "--formula", a, "--formula", b, "--sizes", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let dir = std::env::temp_dir().join(format!("teamcheck-replay-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let file = dir.join("cx.txt");
    fs::write(&file, text.lines().skip(1).collect::<Vec<_>>().join("\n")).unwrap();
    let file = file.to_str().unwrap();
    // the counterexample file is both a model and a team file
    let left = run(&["eval", "--model", file, "--team", file, "--formula", a]);
    let right = run(&["eval", "--model", file, "--team", file, "--formula", b]);
    fs::remove_dir_all(&dir).unwrap();
    assert_ne!(left.status.code(), right.status.code());
    assert!(text.contains(&format!("# left: {}, right: {}", stdout(&left).trim(), stdout(&right).trim())));
}

#[test]
fn equiv_holds() {
    let out = run(&["equiv", "--formula", "=(x;y)", "--formula", "~ ~=(x;y)", "--sizes", "2,3"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
}
