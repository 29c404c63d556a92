use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lamad::syntax::{parse_programs, print_programs};
use lamad::{Mode, TargetType};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn lamad(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lamad")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn numbers(line: &str) -> Vec<f64> {
    line.split(',').map(|x| x.parse().unwrap()).collect()
}

fn examples() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(data(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "lam"))
        .collect();
    v.sort();
    v
}

#[test]
fn transformed_programs_match_golden_files_and_typecheck() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let tmp = tempfile::tempdir().unwrap();
    assert!(examples().len() >= 7);
    for src in examples() {
        let stem = src.file_stem().unwrap().to_str().unwrap().to_string();
        let source = parse_programs(&fs::read_to_string(&src).unwrap()).unwrap().remove(0).source().unwrap();
        let result = source.result_type().unwrap();
        for (flag, mode) in [("fwd", Mode::Forward), ("rev", Mode::Reverse)] {
            let out = tmp.path().join(format!("{stem}.{flag}"));
            let (code, _, err) = lamad(&[flag, src.to_str().unwrap(), "-o", out.to_str().unwrap()]);
            assert_eq!(code, 0, "{stem} {flag}: {err}");
            let text = fs::read_to_string(&out).unwrap();
            let golden = golden_dir.join(format!("{stem}.{flag}"));
            if update {
                fs::write(&golden, &text).unwrap();
            } else {
                let expected = fs::read_to_string(&golden).unwrap_or_else(|_| panic!("missing {}", golden.display()));
                assert_eq!(text, expected, "{stem} {flag} differs from golden output");
            }

            let parsed = parse_programs(&text).unwrap();
            assert_eq!(parsed.len(), 2);
            let (s1, s2) = mode.translate(&source.arg_type);
            let (t1, t2) = mode.translate(&result);
            let deriv = match mode {
                Mode::Forward => TargetType::linfun(s2, t2),
                Mode::Reverse => TargetType::linfun(t2, s2),
            };
            assert_eq!(parsed[0].program.arg_type, s1);
            assert_eq!(parsed[0].check().unwrap(), t1, "{stem} {flag} primal");
            assert_eq!(parsed[1].check().unwrap(), deriv, "{stem} {flag} derivative");
            let programs: Vec<_> = parsed.iter().map(|p| p.program.clone()).collect();
            assert_eq!(print_programs(&programs), text, "{stem} {flag} does not re-print identically");
        }
    }
}

#[test]
fn reverse_derivative_of_product_evaluates_to_the_gradient() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("product.rev");
    let (code, _, _) = lamad(&["rev", data("product.lam").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, stdout, err) = lamad(&["eval", out.to_str().unwrap(), "--point", "2,3", "--tangent", "1"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.trim(), "3.0,2.0");
    let (_, primal, _) = lamad(&["eval", out.to_str().unwrap(), "--point", "2,3", "--entry", "product-primal"]);
    assert_eq!(primal.trim(), "6.0");
}

#[test]
fn check_prints_the_body_type() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("id.lam");
    fs::write(&f, "(program (arg-type (real 1)) (body (lam (x (real 1)) x)))").unwrap();
    let (code, stdout, _) = lamad(&["check", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "(fun (real 1) (real 1))");
    let (_, stdout, _) = lamad(&["check", data("composite.lam").to_str().unwrap(), "--raw-combinators"]);
    assert!(stdout.starts_with("composite : (real 1)\n(comp "), "{stdout}");
}

#[test]
fn identity_jacobian_in_every_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("id2.lam");
    fs::write(&f, "(program (arg-type (real 2)) (body arg))").unwrap();
    for mode in ["fwd", "rev", "fd"] {
        let (code, stdout, _) = lamad(&["jacobian", f.to_str().unwrap(), "--point", "0.3,-7", "--mode", mode]);
        assert_eq!(code, 0);
        let rows: Vec<Vec<f64>> = stdout.lines().map(numbers).collect();
        assert_eq!(rows.len(), 2);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((x - e).abs() <= 1e-9, "{mode}: {stdout}");
            }
        }
        if mode != "fd" {
            assert_eq!(stdout, "1.0,0.0\n0.0,1.0\n");
        }
    }
}

#[test]
fn parse_and_type_errors_exit_1_with_a_position() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("bad.lam");
    fs::write(&f, "(program (arg-type (real 2))\n  (body (op sum y)))").unwrap();
    let (code, _, err) = lamad(&["check", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains(":2:17:") && err.contains("unbound variable"), "{err}");
    fs::write(&f, "(program (arg-type (real 2))\n  (body (op sum arg))").unwrap();
    let (code, _, err) = lamad(&["fwd", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains(":1:1:"), "{err}");
    let (code, _, _) = lamad(&["eval", data("composite.lam").to_str().unwrap(), "--point", "1,2"]);
    assert_eq!(code, 1);
    let (code, _, err) = lamad(&["eval", data("higher_order_result.lam").to_str().unwrap(), "--point", "1,2"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = lamad(&["nonsense"]);
    assert_eq!(code, 1);
}

#[test]
fn gradcheck_exit_status_follows_the_tolerance() {
    let f = data("composite.lam");
    let (code, stdout, _) = lamad(&["gradcheck", f.to_str().unwrap(), "--point", "1,2,3"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("primalExact true"));
    let (code, _, _) = lamad(&["gradcheck", f.to_str().unwrap(), "--point", "1,2,3", "--tol", "0", "--h", "0.1"]);
    assert_eq!(code, 2);
}

#[test]
fn eval_output_round_trips_at_full_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("c.lam");
    fs::write(&f, "(program (arg-type (real 2)) (body (op add (pair arg (const 0.1 1e-300)))))").unwrap();
    let (code, stdout, _) = lamad(&["eval", f.to_str().unwrap(), "--point", "0.2,3.3333333333333335"]);
    assert_eq!(code, 0);
    let v = numbers(stdout.trim());
    assert_eq!(v[0].to_bits(), (0.2f64 + 0.1).to_bits());
    assert_eq!(v[1].to_bits(), (3.3333333333333335f64 + 1e-300).to_bits());
}

#[test]
fn fuzz_writes_one_record_per_program() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.jsonl");
    let (code, stdout, err) =
        lamad(&["fuzz", "--seed", "3", "--count", "12", "--depth", "4", "--report", report.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}{err}");
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    for (k, l) in lines.iter().enumerate() {
        for key in ["\"seed\":", "\"type\":", "\"maxRelErrFwdRev\":", "\"maxRelErrFwdFD\":", "\"status\":\"pass\""] {
            assert!(l.contains(key), "{l}");
        }
        assert!(l.starts_with(&format!("{{\"seed\":{}", 3 + k)));
    }
}
