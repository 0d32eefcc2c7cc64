//! Golden-file tests of the command-line front end.
//!
//! Each case runs the binary with `--json`, compares the output byte for
//! byte with `tests/golden/<name>.json`, and checks the values that matter
//! against independent closed forms. Set `THERMEX_BLESS=1` to rewrite the
//! golden files.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(sub)
}

fn fixture(name: &str) -> String {
    dir("fixtures").join(name).to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_thermex"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Runs with `--json`, checks the exit code and the golden file, returns
/// the parsed document.
fn golden(name: &str, args: &[&str], code: i32) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let r = run(&all);
    assert_eq!(r.code, code, "{name}: stderr {}", r.stderr);
    let path = dir("golden").join(format!("{name}.json"));
    if std::env::var_os("THERMEX_BLESS").is_some() {
        std::fs::write(&path, &r.stdout).unwrap();
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(r.stdout, want, "{name}: output differs from golden file");
    serde_json::from_str(&r.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn verify_algebras_default() {
    let v = golden("verify_algebras", &["verify-algebras"], 0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["closure"], "23/23");
    assert_eq!(v["failed"], 0);
}

#[test]
fn verify_algebras_single_trial() {
    let v = golden(
        "verify_algebras_trials1",
        &["verify-algebras", "--trials", "1"],
        0,
    );
    assert_eq!(v["pass"], true);
    assert_eq!(v["trials"], 1);
}

#[test]
fn verify_algebras_corrupted_entry_fails() {
    let v = golden(
        "verify_algebras_corrupt",
        &["verify-algebras", "--trials", "20", "--corrupt", "2"],
        1,
    );
    assert_eq!(v["pass"], false);
    let fails = v["failures"].as_array().unwrap();
    assert!(fails
        .iter()
        .any(|r| r["algebra_id"] == 2 && r["check"] == "closure"));
}

#[test]
fn er22_identity_is_member() {
    let v = golden(
        "er22_identity",
        &["er", "--er", "22", &fixture("identity.json")],
        0,
    );
    assert_eq!(v["member"], true);
    assert_eq!(f(&v["residual"]), 0.0);
}

#[test]
fn er8_sample_is_member() {
    let v = golden(
        "er8_sample",
        &["er", "--er", "8", &fixture("er8_sample.json")],
        0,
    );
    assert_eq!(v["member"], true);
    assert!(f(&v["residual"]) < 1e-12 && f(&v["pullback_residual"]) < 1e-12);
}

#[test]
fn er8_perturbed_is_not_member() {
    let v = golden(
        "er8_perturbed",
        &["er", "--er", "8", &fixture("er8_perturbed.json")],
        1,
    );
    assert_eq!(v["member"], false);
    assert!(f(&v["residual"]) > 1e-6);
}

#[test]
fn er_sample_matches_fixture() {
    let r = run(&["er-sample", "--er", "8", "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        r.stdout,
        std::fs::read_to_string(fixture("er8_sample.json")).unwrap()
    );
}

#[test]
fn laminate_two_isotropic_phases() {
    // uncoupled fields: harmonic mean across the layers, arithmetic along
    let v = golden(
        "laminate_two_phases",
        &[
            "laminate",
            &fixture("two_phases.json"),
            "--f",
            "0.25",
            "--normal",
            "0,2",
        ],
        0,
    );
    let l11 = &v["Lstar"]["L11"];
    let (harm, arith) = (1.0 / (0.25 / 1.0 + 0.75 / 4.0), 0.25 * 1.0 + 0.75 * 4.0);
    assert!(close(f(&l11[0][0]), arith, 1e-14) && close(f(&l11[1][1]), harm, 1e-14));
    assert_eq!(v["Lstar"]["L11"], v["Lstar"]["L22"]);
}

#[test]
fn laminate_tree() {
    let v = golden("laminate_tree", &["laminate", &fixture("tree.json")], 0);
    assert_eq!(v["depth"], 2);
    assert_eq!(v["positive_definite"], true);
}

#[test]
fn laminate_of_identical_phases_is_the_phase() {
    let dir = tempdir();
    let p = dir.join("same.json");
    let t = r#"{"lambda": [[2, 0.3], [0.3, 1]], "nu": 0.1}"#;
    std::fs::write(&p, format!("{{\"phases\": [{t}, {t}]}}")).unwrap();
    let r = run(&[
        "laminate",
        p.to_str().unwrap(),
        "--json",
        "--f",
        "0.3",
        "--normal",
        "1,1",
    ]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let l = &v["Lstar"]["L"];
    // νT has 12 block −νR⊥ = ν[[0, 1], [−1, 0]]
    let want = [
        [2.0, 0.0, 0.3, 0.1],
        [0.0, 2.0, -0.1, 0.3],
        [0.3, -0.1, 1.0, 0.0],
        [0.1, 0.3, 0.0, 1.0],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert!(close(f(&l[i][j]), want[i][j], 1e-14), "{i}{j}: {}", l[i][j]);
        }
    }
}

#[test]
fn two_phase_borderline() {
    let v = golden(
        "two_phase_2c",
        &["two-phase", &fixture("pair_2c.json"), "--f", "0.4"],
        0,
    );
    assert_eq!(v["case"], "2c");
    assert_eq!(v["explicit"], true);
    assert!(f(&v["laminate_gap"]) < 1e-9);
}

#[test]
fn two_phase_weak() {
    let v = golden(
        "two_phase_2a",
        &["two-phase", &fixture("pair_2a.json"), "--normal", "1,1"],
        0,
    );
    assert_eq!(v["case"], "2a");
    assert!(f(&v["laminate_gap"]) < 1e-9);
}

#[test]
fn two_phase_strong_implicit() {
    let v = golden("two_phase_1b", &["two-phase", &fixture("pair_1b.json")], 0);
    assert_eq!(v["case"], "1b");
    assert_eq!(v["explicit"], false);
    assert!(f(&v["laminate_residual"]) < 1e-9);
    assert!(close(f(&v["fraction1"]), 0.3, 1e-15));
}

#[test]
fn polycrystal_of_isotropic_crystallite() {
    let v = golden(
        "polycrystal_iso",
        &["polycrystal", &fixture("crystal_iso.json")],
        0,
    );
    // L* = X, θ = 1/det(X + X̄) = 1/(4·3 − 0.6²)
    assert!(close(f(&v["theta"]), 1.0 / (12.0 - 0.36), 1e-14));
    let lh = &v["Lstar_h"];
    assert!(close(f(&lh[0][0][0]), 2.0, 1e-13) && close(f(&lh[1][1][0]), 1.5, 1e-13));
    assert!(close(f(&lh[0][1][0]), 0.3, 1e-13) && close(f(&lh[0][1][1]), -0.4, 1e-13));
    assert!(close(f(&v["alpha"]), 0.4, 1e-13));
}

#[test]
fn polycrystal_equal_s() {
    let v = golden(
        "polycrystal_equal_s",
        &[
            "polycrystal",
            &fixture("crystal_equal_s.json"),
            "--all-roots",
        ],
        0,
    );
    // X = I, Y = I/2: s = 2, θ = t/det Y = 4t
    let r3 = 3f64.sqrt();
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 2);
    assert!(close(f(&roots[0]["theta"]) / 4.0, 7.0 - 4.0 * r3, 1e-12));
    assert!(close(f(&roots[1]["theta"]) / 4.0, 7.0 + 4.0 * r3, 1e-12));
    assert_eq!(roots[0]["feasible"], true);
    assert_eq!(roots[1]["feasible"], false);
    let feasible_only = run(&["polycrystal", &fixture("crystal_equal_s.json"), "--json"]);
    let w: Value = serde_json::from_str(&feasible_only.stdout).unwrap();
    assert_eq!(w["roots"].as_array().unwrap().len(), 1);
}

#[test]
fn polycrystal_uncoupled_conduction() {
    let v = golden(
        "polycrystal_conduction",
        &["polycrystal", &fixture("crystal_conduction.json")],
        0,
    );
    // σ₀ = diag(4, 9): σ* = √36 = 6
    let l = &v["Lstar"]["L"];
    for i in 0..4 {
        assert!(close(f(&l[i][i]), 6.0, 1e-12));
    }
    for k in ["theta", "z"] {
        assert!(f(&v["residuals"][k]) < 1e-12);
    }
    assert!(f(&v["residuals"]["exact_relation"]) < 1e-10);
}

#[test]
fn zt_physical() {
    let v = golden("zt_physical", &["zt", &fixture("physical.json")], 0);
    // σS²T₀/κ = 2·0.09·1.5
    assert!(close(f(&v["ZT"]), 0.27, 1e-14));
    assert!(close(f(&v["ZT_isotropic_formula"]), 0.27, 1e-14));
}

#[test]
fn zt_isotropic() {
    let v = golden("zt_iso", &["zt", &fixture("iso_uncoupled.json")], 0);
    // Λ₁₂²/det Λ
    assert!(close(f(&v["ZT"]), 0.36 / 1.64, 1e-14));
    assert!(close(f(&v["ZT"]), f(&v["ZT_isotropic_formula"]), 1e-14));
}

#[test]
fn zt_with_rotational_coupling() {
    let v = golden("zt_iso_nu", &["zt", &fixture("iso_material.json")], 0);
    // λ = (Λ₁₂² + ν²)/(Λ₁₁Λ₂₂) = 0.2
    assert!(close(f(&v["lambda_max"]), 0.2, 1e-14));
    assert!(close(f(&v["ZT"]), 0.25, 1e-14));
    assert!(v.get("ZT_isotropic_formula").is_none());
}

#[test]
fn exit_codes_for_bad_input() {
    assert_eq!(
        run(&["er", "--er", "8", &fixture("truncated.json")]).code,
        2
    );
    assert_eq!(
        run(&["er", "--er", "8", &fixture("asymmetric.json")]).code,
        2
    );
    assert_eq!(run(&["er", "--er", "8", &fixture("missing.json")]).code, 2);
    assert_eq!(
        run(&["er", "--er", "99", &fixture("identity.json")]).code,
        2
    );
    assert_eq!(
        run(&["laminate", &fixture("two_phases.json"), "--normal", "0,0"]).code,
        2
    );
    assert_eq!(
        run(&["laminate", &fixture("two_phases.json"), "--f", "1.5"]).code,
        2
    );
    assert_eq!(run(&["verify-algebras", "--trials", "0"]).code, 2);
    assert_eq!(run(&["verify-algebras", "--tol", "-1"]).code, 2);
    assert_eq!(run(&["--bogus"]).code, 2);
}

#[test]
fn exit_codes_for_domain_errors() {
    let r = run(&["er", "--er", "8", &fixture("not_pd.json")]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("positive definite"));
    assert_eq!(
        run(&["polycrystal", &fixture("crystal_not_pd.json")]).code,
        3
    );
    assert_eq!(run(&["zt", &fixture("not_pd.json")]).code, 3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["verify-algebras", "--trials", "5", "--json"],
        vec!["polycrystal", "--json", &fixture("crystal_equal_s.json")],
        vec!["two-phase", "--json", &fixture("pair_1b.json")],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn output_file_and_summary() {
    let dir = tempdir();
    let p = dir.join("out.json");
    let r = run(&[
        "er",
        "--er",
        "22",
        &fixture("identity.json"),
        "--json",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let want = std::fs::read_to_string(dir_golden("er22_identity")).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), want);
    let s = run(&["er", "--er", "22", &fixture("identity.json")]);
    assert!(s.stdout.contains("member: true"));
}

fn dir_golden(name: &str) -> PathBuf {
    dir("golden").join(format!("{name}.json"))
}

fn tempdir() -> PathBuf {
    let p = std::env::temp_dir().join(format!(
        "thermex-cli-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&p).unwrap();
    p
}
