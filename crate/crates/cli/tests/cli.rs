use std::path::PathBuf;
use std::process::{Command, Output};

use veq_cli::exit;

fn problem(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name).display().to_string()
}

fn scratch(name: &str, body: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn veq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veq")).args(args).env_remove("VEQ_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn missing_file_is_an_io_error() {
    let out = veq(&["linearize", "/nonexistent/problem.veq"]);
    assert_eq!(code(&out), exit::IO);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn parse_errors_carry_positions() {
    let path = scratch("bad.veq", "interval (0, 1)\nop P { a = 0 }\nunknown y\nP(y * ) = 0\n");
    let out = veq(&["linearize", &path]);
    assert_eq!(code(&out), exit::PARSE);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":4:7: syntax error"));
}

#[test]
fn zero_free_failure_and_override() {
    let path = scratch("sign.veq", "interval [-1, 1]\nop P { a = -1, k = x }\nunknown y\nP(y) = 0\n");
    assert_eq!(code(&veq(&["linearize", &path])), exit::PARSE);
    assert_eq!(code(&veq(&["linearize", &path, "--assume-nonzero"])), exit::OK);
}

#[test]
fn twist_failure() {
    assert_eq!(code(&veq(&["check-mtrba", &problem("no_twist.veq")])), exit::TWIST);
    let plain = scratch("twist.veq", "interval (0, 2)\nop P { a = 0, k = x }\nunknown y\nP(y * P(y)) = 0\n");
    assert_eq!(code(&veq(&["linearize", &plain])), exit::TWIST);
    // check brackets never need the twist
    let check = scratch("check.veq", "interval (0, 2)\nop P { a = 0, k = x }\nunknown y\nInt_P[y * Int_P[y]] = 0\n");
    assert_eq!(code(&veq(&["linearize", &check])), exit::OK);
    assert_eq!(code(&veq(&["linearize", &check, "--twisted"])), exit::TWIST);
}

#[test]
fn depth_cap() {
    let path = problem("xt_kernel.veq");
    assert_eq!(code(&veq(&["linearize", &path, "--depth-cap", "1"])), exit::DEPTH_CAP);
    assert_eq!(code(&veq(&["linearize", &path, "--depth-cap", "2"])), exit::OK);
}

#[test]
fn failed_and_errored_checks() {
    assert_eq!(code(&veq(&["verify", &problem("corrupted.veq")])), exit::CHECK_FAILED);
    assert_eq!(code(&veq(&["verify", &problem("rb_counterexample.veq")])), exit::CHECK_FAILED);
    let path = scratch("divergent.veq", "interval (0, 1)\nop P { a = 0, h = t^(-2) }\nunknown y\nP(y) * P(y) = 0\n");
    assert_eq!(code(&veq(&["verify", &path])), exit::NUMERIC);
}

#[test]
fn usage_errors() {
    let out = veq(&["verify", &problem("thomas_fermi.veq"), "--tol", "0"]);
    assert_eq!(code(&out), exit::PARSE);
    assert_eq!(code(&veq(&["frobnicate"])), exit::PARSE);
}

#[test]
fn verify_passes_on_examples() {
    for name in ["thomas_fermi.veq", "exp_kernel.veq", "xt_kernel.veq", "population.veq"] {
        let out = veq(&["verify", &problem(name)]);
        assert_eq!(code(&out), exit::OK, "{name}: {}", stdout(&out));
        assert!(stdout(&out).contains(": pass"));
    }
}

#[test]
fn output_is_reproducible_for_a_seed() {
    let path = problem("thomas_fermi.veq");
    let a = veq(&["verify", &path, "--seed", "11"]);
    let b = veq(&["verify", &path, "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let c = veq(&["verify", &path, "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment_wins() {
    let path = problem("thomas_fermi.veq");
    let flag = veq(&["verify", &path, "--seed", "11"]);
    let env = Command::new(env!("CARGO_BIN_EXE_veq"))
        .args(["verify", &path, "--seed", "3"])
        .env("VEQ_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_veq")).args(["verify", &path]).env("VEQ_SEED", "x").output().unwrap();
    assert_eq!(code(&bad), exit::PARSE);
}

#[test]
fn linear_input_is_its_own_normal_form() {
    let path = problem("population.veq");
    let rendered = veq(&["render", &path]);
    let normal = veq(&["linearize", &path, "--twisted"]);
    assert_eq!(code(&normal), exit::OK);
    assert_eq!(stdout(&rendered), stdout(&normal));
}

#[test]
fn json_output() {
    let out = veq(&["linearize", &problem("thomas_fermi.veq"), "--json"]);
    assert_eq!(code(&out), exit::OK);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["words"]["words"].as_array().is_some_and(|w| w.len() == 5), "{v}");
    assert!(v["operated"]["terms"].is_array());

    let out = veq(&["check-mtrba", &problem("family_exp.veq"), "--format", "json"]);
    assert_eq!(code(&out), exit::OK);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.is_object());
}

#[test]
fn eval_closes_polynomial_brackets() {
    let out = veq(&["eval", &problem("rb_counterexample.veq"), "--assign", "f=1", "--assign", "g=1", "--at", "1"]);
    let text = stdout(&out);
    assert!(text.contains("x^4"), "{text}");
    assert!(text.contains("2/3 * x^4"), "{text}");
    assert!(text.contains("0.333333"), "{text}");
}
