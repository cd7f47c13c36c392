use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const ALTERNATING: &str = r##"{"sigma":["a","b"],"gamma":["a","b"],"pi":{"a":"a","b":"b"},
"deltas":[[["#","a"],["a","b"],["b","a"],["b","#"]]]}"##;

const AND: &str = r##"{"sigma":["0","1"],"gamma":["0","1"],"accepting":["1"],"delta":[
{"state":"0","neighbors":["0"],"results":["0"]},{"state":"0","neighbors":["1"],"results":["0"]},
{"state":"0","neighbors":["#"],"results":["0"]},{"state":"1","neighbors":["0"],"results":["0"]},
{"state":"1","neighbors":["1"],"results":["1"]},{"state":"1","neighbors":["#"],"results":["1"]}]}"##;

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("piclang-cli-{name}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_str().unwrap().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_piclang")).args(args).output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn check_reports_membership_through_the_exit_status() {
    let s = Scratch::new("check");
    let ts = s.file("ts.json", ALTERNATING);
    let yes = s.file("yes.grid", "1 4\na b\na b a b\n");
    let no = s.file("no.grid", "1 3\na b\na b a\n");
    let (code, out, _) = run(&["check", "--tiling", &ts, "--picture", &yes]);
    assert_eq!((code, out.as_str()), (0, "VERDICT: MEMBER\n"));
    let (code, out, _) = run(&["check", "--tiling", &ts, "--picture", &no]);
    assert_eq!((code, out.as_str()), (1, "VERDICT: NON-MEMBER\n"));
    let ca = s.file("and.json", AND);
    let ones = s.file("ones.grid", "1 3\n0 1\n1 1 1\n");
    assert_eq!(run(&["check", "--automaton", &ca, "--picture", &ones]).0, 0);
    let mixed = s.file("mixed.grid", "1 3\n0 1\n1 0 1\n");
    assert_eq!(run(&["check", "--automaton", &ca, "--picture", &mixed]).0, 1);
    let f = s.file("f.eso", "(forall (x) (or (Q_a x) (min_1 x)))");
    assert_eq!(run(&["check", "--sentence", &f, "--encoding", "pixel", "--picture", &no]).0, 1);
    let sq = s.file("sq.grid", "2 2\n0 1\n0 1\n1 1\n");
    assert_eq!(run(&["check", "--oracle", "mirror", "--picture", &sq]).0, 0);
    assert_eq!(run(&["oracle", "sym", "--picture", &sq]).0, 1);
}

#[test]
fn compiled_tiling_systems_are_equivalent() {
    let s = Scratch::new("compile");
    let ts = s.file("ts.json", ALTERNATING);
    let eso = s.path("f.eso");
    assert_eq!(run(&["compile", "tiling-to-eso", "--input", &ts, "--output", &eso]).0, 0);
    let (code, out, _) = run(&["equiv", "--a", &ts, "--b", &eso, "--encoding", "pixel", "--max-n", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("EQUIVALENT up to n=3"), "{out}");
    let back = s.path("back.json");
    let (code, _, err) =
        run(&["compile", "eso-to-tiling", "--input", &eso, "--d", "1", "--alphabet", "a,b", "--output", &back]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(run(&["equiv", "--a", &ts, "--b", &back, "--max-n", "5"]).0, 0);
}

#[test]
fn inequivalence_prints_a_counterexample() {
    let s = Scratch::new("equiv");
    let ts = s.file("ts.json", ALTERNATING);
    let all_a = s.file("a.eso", "(forall (x) (Q_a x))");
    let (code, out, _) = run(&["equiv", "--a", &ts, "--b", &all_a, "--encoding", "pixel", "--max-n", "3"]);
    assert_eq!(code, 1);
    assert!(out.contains("VERDICT: INEQUIVALENT\nCOUNTEREXAMPLE: 1 1 / a b / a\n"), "{out}");
    let again = run(&["equiv", "--a", &ts, "--b", &all_a, "--encoding", "pixel", "--max-n", "3"]);
    assert_eq!(again.1, out);
}

#[test]
fn automata_compile_both_ways() {
    let s = Scratch::new("ca");
    let ca = s.file("and.json", AND);
    let eso = s.path("and.eso");
    assert_eq!(run(&["compile", "ca-to-eso", "--input", &ca, "--output", &eso]).0, 0);
    let (code, out, err) = run(&["equiv", "--a", &ca, "--b", &eso, "--encoding", "coordinate", "--max-n", "3"]);
    assert_eq!(code, 0, "{out}{err}");
    let small = s.file("s.eso", "(forall (x t) (implies (min t) (Q_1 x)))");
    let back = s.path("back.json");
    let args = ["compile", "eso-to-ca", "--input", &small, "--d", "1", "--alphabet", "0,1", "--output", &back];
    assert_eq!(run(&args).0, 0);
    assert_eq!(run(&["equiv", "--a", &ca, "--b", &back, "--max-n", "4"]).0, 0);
    let (code, _, err) = run(&[&args[..], &["--state-cap", "4"]].concat());
    assert_eq!(code, 2);
    assert!(err.contains("cap"), "{err}");
}

#[test]
fn normalizers_emit_sentences() {
    let s = Scratch::new("normalize");
    let f = s.file("f.eso", "(forall (x y) (iff (Q_a x) (Q_a y)))");
    let (code, out, err) = run(&["normalize", "sorted-pipeline", "--input", &f, "--d", "1", "--alphabet", "a,b"]);
    assert_eq!(code, 0, "{err}");
    let sorted = s.file("sorted.eso", &out);
    let (code, out, _) = run(&[
        "equiv",
        "--a",
        &f,
        "--b",
        &sorted,
        "--encoding",
        "coordinate",
        "--d",
        "1",
        "--alphabet",
        "a,b",
        "--max-n",
        "4",
    ]);
    assert_eq!(code, 0, "{out}");
    let c = s.file("c.card", "(at-least 2 (x) (Q_a x))");
    let (code, out, err) = run(&["normalize", "cardinality", "--input", &c, "--d", "1", "--alphabet", "a,b"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("(exists-rel"), "{out}");
    let p = s.file("p.eso", "(forall (x) (implies (Q_a x) (or (max_1 x) (Q_b (suc_1 (suc_1 x))))))");
    assert_eq!(run(&["normalize", "localize", "--input", &p, "--d", "1", "--alphabet", "a,b"]).0, 0);
}

#[test]
fn perm_tree_prints_one_line_per_permutation() {
    let (code, out, _) = run(&["perm-tree", "--d", "4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 24);
    assert!(out.lines().any(|l| l == "perm 2143 parent 4123 edge (1,3)"), "{out}");
}

#[test]
fn errors_exit_with_two() {
    let s = Scratch::new("errors");
    let grid = s.file("p.grid", "1 1\na\na\n");
    let broken = s.file("broken.eso", "(forall (x)\n  (Q_a x)");
    let (code, _, err) = run(&["check", "--sentence", &broken, "--encoding", "pixel", "--picture", &grid]);
    assert_eq!(code, 2);
    assert!(err.contains("broken.eso") && err.contains("line 1"), "{err}");
    assert_eq!(run(&["check", "--picture", &grid]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["check", "--tiling", &s.path("missing.json"), "--picture", &grid]).0, 2);
    assert_eq!(run(&["perm-tree", "--d", "12"]).0, 2);
}
