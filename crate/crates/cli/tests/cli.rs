use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EXAMPLE: &str = "\
A sub ex P
ex P sub A
P rsub S
P rsub R-
B sub ex Q
ex Q sub B
Q rsub R
Q rsub S-
";

const SEQ1_15: &str = "q(x0,x15) :- R(x0,x1), R(x1,x2), S(x2,x3), R(x3,x4), S(x4,x5), R(x5,x6), S(x6,x7), \
R(x7,x8), R(x8,x9), S(x9,x10), R(x10,x11), R(x11,x12), S(x12,x13), S(x13,x14), R(x14,x15)";

const ABOX: &str = "\
R(a,b)
S(b,c)
A(c)
B(a)
R(c,d)
S(d,a)
";

fn omq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omq")).args(args).output().unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stats(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(stdout(out).lines().last().unwrap()).unwrap()
}

#[test]
fn version_names_rng() {
    let out = omq(&["--version"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("ChaCha8Rng (rand_chacha 0.3)"));
}

#[test]
fn slice_clause_count() {
    let dir = TempDir::new().unwrap();
    let tbox = file(&dir, "t.owl", EXAMPLE);
    let query = file(&dir, "q.cq", SEQ1_15);
    let out_path = dir.path().join("p.dl");
    let out = omq(&["rewrite", "--method", "slice", "--tbox", p(&tbox), "--query", p(&query), "--out", p(&out_path)]);
    let s = stats(&out);
    assert_eq!(s["clauses"], 44);
    assert_eq!(s["linear"], true);
    assert!(fs::read_to_string(&out_path).unwrap().contains(":-"));
}

#[test]
fn infinite_depth_rejected() {
    let dir = TempDir::new().unwrap();
    let tbox = file(&dir, "t.owl", "A sub ex P\nex P- sub A\n");
    let query = file(&dir, "q.cq", "q(x) :- P(x,y)");
    let out_path = dir.path().join("p.dl");
    let out = omq(&["rewrite", "--method", "slice", "--tbox", p(&tbox), "--query", p(&query), "--out", p(&out_path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InfiniteDepth"));
}

#[test]
fn tw_single_atom() {
    let dir = TempDir::new().unwrap();
    let tbox = file(&dir, "t.owl", EXAMPLE);
    let query = file(&dir, "q.cq", "q(x) :- A(x)");
    let out_path = dir.path().join("p.dl");
    let out = omq(&["rewrite", "--method", "tw", "--tbox", p(&tbox), "--query", p(&query), "--out", p(&out_path)]);
    assert_eq!(stats(&out)["clauses"], 1);
}

#[test]
fn parse_error_exit_code() {
    let dir = TempDir::new().unwrap();
    let tbox = file(&dir, "t.owl", "A sub sub B\n");
    let query = file(&dir, "q.cq", "q(x) :- A(x)");
    let out_path = dir.path().join("p.dl");
    let out = omq(&["rewrite", "--method", "td", "--tbox", p(&tbox), "--query", p(&query), "--out", p(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn linear_engine_needs_linear_program() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p.dl", "% goal: G/1\nI(x) :- A(x).\nJ(x) :- B(x).\nG(x) :- I(x), J(x).\n");
    let abox = file(&dir, "a.abox", "A(a)\nB(a)\n");
    let out = omq(&["eval", "--program", p(&program), "--abox", p(&abox), "--engine", "linear"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotLinear"));
    let out = omq(&["eval", "--program", p(&program), "--abox", p(&abox), "--engine", "circuit", "--candidate", "a", "--stats"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\na\n"));
    assert!(stats(&out)["gates"].as_u64().unwrap() > 0);
}

#[test]
fn oracle_empty_and_inconsistent() {
    let dir = TempDir::new().unwrap();
    let tbox = file(&dir, "t.owl", "A sub ex P\nA disj B\n");
    let query = file(&dir, "q.cq", "q(x) :- P(x,y)");
    let empty = file(&dir, "empty.abox", "");
    let out = omq(&["oracle", "--tbox", p(&tbox), "--abox", p(&empty), "--query", p(&query)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "x\n");
    let bad = file(&dir, "bad.abox", "A(a)\nB(a)\n");
    let out = omq(&["oracle", "--tbox", p(&tbox), "--abox", p(&bad), "--query", p(&query)]);
    assert_eq!(out.status.code(), Some(4));
}

fn pipeline(method: &str, dir: &TempDir) -> (String, String, String) {
    let tbox = file(dir, "t.owl", EXAMPLE);
    let query = file(dir, "q.cq", "q(x0,x4) :- R(x0,x1), S(x1,x2), R(x2,x3), S(x3,x4)");
    let abox = file(dir, "a.abox", ABOX);
    let arbitrary = dir.path().join(format!("{method}-arb.dl"));
    let complete = dir.path().join(format!("{method}-h.dl"));
    let h = dir.path().join("h.abox");
    let run = |mode: &str, out: &Path| {
        let o = omq(&[
            "rewrite", "--method", method, "--tbox", p(&tbox), "--query", p(&query), "--out", p(out), "--abox-mode", mode,
        ]);
        stats(&o);
    };
    run("arbitrary", &arbitrary);
    run("hcomplete", &complete);
    assert!(omq(&["hcomplete", "--tbox", p(&tbox), "--abox", p(&abox), "--out", p(&h)]).status.success());
    let engine = if method == "slice" { "linear" } else { "seminaive" };
    let a = stdout(&omq(&["eval", "--program", p(&arbitrary), "--abox", p(&abox), "--engine", engine]));
    let b = stdout(&omq(&["eval", "--program", p(&complete), "--abox", p(&h), "--engine", engine]));
    let c = stdout(&omq(&["oracle", "--tbox", p(&tbox), "--abox", p(&abox), "--query", p(&query)]));
    (a, b, c)
}

fn rows(csv: &str) -> Vec<&str> {
    let mut r: Vec<&str> = csv.lines().skip(1).collect();
    r.sort();
    r
}

#[test]
fn pipelines_agree_with_oracle() {
    let dir = TempDir::new().unwrap();
    for method in ["slice", "td", "tw"] {
        let (a, b, c) = pipeline(method, &dir);
        assert!(!rows(&c).is_empty());
        assert_eq!(rows(&a), rows(&c), "{method} arbitrary");
        assert_eq!(rows(&b), rows(&c), "{method} hcomplete");
    }
}

#[test]
fn skinny_and_explicit_equalities() {
    let dir = TempDir::new().unwrap();
    let tbox = file(&dir, "t.owl", EXAMPLE);
    let query = file(&dir, "q.cq", SEQ1_15);
    let out_path = dir.path().join("p.dl");
    let out = omq(&[
        "rewrite", "--method", "td", "--tbox", p(&tbox), "--query", p(&query), "--out", p(&out_path), "--skinny", "--eq",
        "explicit",
    ]);
    assert_eq!(stats(&out)["skinny"], true);
    let abox = file(&dir, "a.abox", ABOX);
    let out = omq(&["eval", "--program", p(&out_path), "--abox", p(&abox), "--engine", "circuit"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.abox");
    let b = dir.path().join("b.abox");
    for out in [&a, &b] {
        let o = omq(&["bench", "gen", "--V", "50", "--p", "0.1", "--q", "0.2", "--seed", "9", "--out", p(out)]);
        assert_eq!(stats(&o)["rng"], "ChaCha8Rng (rand_chacha 0.3)");
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let table = stdout(&omq(&["bench", "table", "--method", "slice,td", "--sequence", "1", "--nmax", "2"]));
    assert_eq!(table, "n,slice,td\n1,2,1\n2,5,2\n");
}
