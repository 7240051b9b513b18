//! Pins `gsens` output on the worked examples. Set `UPDATE_GOLDEN=1` to
//! rewrite the expected files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

fn gsens(args: &[&str], stdin: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsens"));
    cmd.args(args).env_remove("GSENS_SEED").current_dir(env!("CARGO_MANIFEST_DIR"));
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    cmd.stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn compare(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn transcript(args: &[&str], stdin: Option<&str>) -> String {
    let (code, out, err) = gsens(args, stdin);
    format!("$ gsens {}\nexit {}\n--- stdout\n{}--- stderr\n{}", args.join(" "), code, out, err)
}

fn worked_files() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/worked");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".gsoul"))
        .collect();
    names.sort();
    names
}

#[test]
fn run_output_on_worked_examples() {
    for name in worked_files() {
        let path = format!("../../corpus/worked/{}", name);
        compare(&format!("run_{}.txt", name.trim_end_matches(".gsoul")), &transcript(&["run", &path], None));
    }
}

#[test]
fn check_output_on_worked_examples() {
    for name in worked_files() {
        let path = format!("../../corpus/worked/{}", name);
        compare(&format!("check_{}.txt", name.trim_end_matches(".gsoul")), &transcript(&["check", &path], None));
    }
}

#[test]
fn repl_session() {
    let input = "\
:type fn (x: Number[1r]) => x+x
let res b = false;
:type b
1/0
def add(x: Number,
        y: Number): Number = x + y;
add(1, 2)
:type add
:quit
add(3, 4)
";
    compare("repl.txt", &transcript(&["repl"], Some(input)));
}

#[test]
fn trace_lists_each_step() {
    compare("trace_double.txt", &transcript(&["run", "--trace", "../../corpus/worked/double.gsoul"], None));
}

#[test]
fn scale_by_two_prints_value_type_and_monitored_effect() {
    let (code, out, _) = gsens(&["run", "../../corpus/worked/scale.gsoul"], None);
    assert_eq!(code, 0);
    assert_eq!(out, "6 : Number[?r]  (monitored: 2r)\n");
}

#[test]
fn exit_codes() {
    let dir = tempdir();
    let write = |name: &str, src: &str| {
        let p = dir.join(name);
        std::fs::write(&p, src).unwrap();
        p.to_string_lossy().into_owned()
    };
    assert_eq!(gsens(&["run", &write("pure.gsoul", "1 + 2 * 3")], None).0, 0);
    assert_eq!(gsens(&["check", &write("type.gsoul", "1 + true")], None).0, 1);
    assert_eq!(gsens(&["run", &write("div.gsoul", "1 / 0")], None).0, 3);
    assert_eq!(gsens(&["check", &write("parse.gsoul", "let = ;")], None).0, 4);
    assert_eq!(gsens(&["check", "no/such/file.gsoul"], None).0, 5);
    assert_eq!(gsens(&["run", "--step-budget", "1000", &write("loop.gsoul", "def l(n: Number): Number = l(n); l(1)")], None).0, 3);
    assert_eq!(gsens(&["frobnicate"], None).0, 5);
    assert_eq!(gsens(&["--help"], None).0, 0);
}

#[test]
fn type_error_names_the_refuted_pair() {
    let (code, _, err) = gsens(&["check", "../../corpus/worked/table_1-3r_f.gsoul"], None);
    assert_eq!(code, 1);
    assert!(err.contains("E011"), "{}", err);
    assert!(err.contains("[1,3]") && err.contains("`Number`"), "{}", err);
}

#[test]
fn json_document_has_the_versioned_fields() {
    let (code, out, _) = gsens(&["--json", "run", "../../corpus/worked/scale.gsoul"], None);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["value"], "6");
    assert_eq!(doc["type"], "Number[?r]");
    assert_eq!(doc["monitored_effect"], "2r");
    assert_eq!(doc["diagnostics"].as_array().unwrap().len(), 0);

    let (code, out, _) = gsens(&["--json", "run", "../../corpus/worked/scale_11.gsoul"], None);
    assert_eq!(code, 2);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["exit_code"], 2);
    assert_eq!(doc["value"], serde_json::Value::Null);
    let d = &doc["diagnostics"][0];
    assert_eq!(d["code"], "R001");
    assert_eq!(d["line"], 5);
    assert!(d["message"].as_str().unwrap().contains("[11,inf]x"));

    let (code, out, _) = gsens(&["--json", "run", "--trace", "../../corpus/worked/double.gsoul"], None);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(!doc["trace"].as_array().unwrap().is_empty());
}

#[test]
fn seed_flag_and_environment() {
    let glm = "../../corpus/worked/glm.gsoul";
    let default = gsens(&["run", glm], None).1;
    assert_eq!(gsens(&["run", "--seed", "42", glm], None).1, default);
    assert_ne!(gsens(&["run", "--seed", "7", glm], None).1, default);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsens"));
    let out = cmd.args(["run", glm]).env("GSENS_SEED", "7").current_dir(env!("CARGO_MANIFEST_DIR")).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), gsens(&["run", "--seed", "7", glm], None).1);
}

#[test]
fn metatheory_and_privacy_subcommands() {
    let (code, out, _) = gsens(
        &["test", "mp", "../../corpus/worked/x_plus_2y.gsoul", "--pairs", "200", "--delta", "2r", "--sigma", "5r"],
        None,
    );
    assert_eq!(code, 0);
    assert!(out.contains("violations   0"), "{}", out);
    let (code, out, _) = gsens(
        &["test", "mp", "../../corpus/worked/x_plus_2y.gsoul", "--pairs", "200", "--sigma", "1r"],
        None,
    );
    assert_eq!(code, 2, "{}", out);
    assert_eq!(gsens(&["test", "mp", "../../corpus/worked/counterexample.gsoul", "--ts"], None).0, 1);
    assert_eq!(gsens(&["test", "gg", "../../corpus/mp", "--widenings", "50"], None).0, 0);
    assert_eq!(gsens(&["test", "evidence", "--trials", "2000"], None).0, 0);
    let id = "fn (y: Number[db]) => y";
    let double = "fn (y: Number[db]) => y + y";
    assert_eq!(gsens(&["dp", "glm", "--query", id, "--input", "3"], None).0, 0);
    assert_eq!(gsens(&["dp", "glm", "--query", double, "--input", "3"], None).0, 2);
    assert_eq!(gsens(&["dp", "glm", "--query", id, "--input", "3", "--eps", "0"], None).0, 5);
    let (code, out, _) = gsens(
        &["dp", "gat", "--query", double, "--query", id, "--threshold", "0", "--input", "100", "--runs", "5"],
        None,
    );
    assert_eq!(code, 0);
    assert_eq!(out, "1\n1\n1\n1\n1\n");
    let (code, _, _) = gsens(&["dp", "verify", "--query", id, "--samples", "400"], None);
    assert_eq!(code, 3);
}

fn tempdir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("gsens-golden-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
