use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wittforge"))
        .args(args)
        .env_remove("WITTFORGE_CACHE")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn witt_add_over_f2() {
    let (code, out, _) = run(&["witt", "add", "--ring", "ff p=2 e=1", "--n", "2", "--x", "W{1;0}", "--y", "W{1;0}"]);
    assert_eq!(code, 0);
    assert_eq!(out, "W{0;1}\n");
    for engine in ["structural", "ghost-lift"] {
        let (_, out, _) = run(&[
            "--engine", engine, "witt", "add", "--ring", "ff p=2 e=1", "--x", "W{1;0}", "--y", "W{1;0}",
        ]);
        assert_eq!(out, "W{0;1}\n");
    }
}

#[test]
fn witt_unary_commands() {
    let r = "frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=false";
    assert_eq!(run(&["witt", "teich", "--ring", r, "--n", "3", "--a", "x"]).1, "W{x;0;0}\n");
    assert_eq!(run(&["witt", "versch", "--ring", r, "--x", "W{x;1;0}"]).1, "W{0;x;1}\n");
    assert_eq!(run(&["witt", "frob", "--ring", r, "--x", "W{x;1}"]).1, "W{x^3;1}\n");
    assert_eq!(run(&["witt", "frob", "--ring", r, "--x", "W{x^3;1}", "--k", "-1"]).1, "W{x;1}\n");
    assert_eq!(run(&["witt", "project", "--ring", r, "--x", "W{x + 1;1}"]).1, "1 + x\n");
    assert_eq!(run(&["witt", "divp", "--ring", r, "--x", "W{0;x^3;1}"]).1, "W{x;1}\n");
    assert_eq!(run(&["witt", "neg", "--ring", r, "--x", "W{x;1}"]).1, "W{2*x;2}\n");
    let (code, _, err) = run(&["witt", "divp", "--ring", r, "--x", "W{1;0}"]);
    assert_eq!(code, 2);
    assert!(err.contains("nonzero"));
}

#[test]
fn eval_and_ring_check() {
    let (code, out, _) = run(&["eval", "--ring", "ff p=2 e=2 modulus=u^2+u+1", "--expr", "u^4"]);
    assert_eq!((code, out.as_str()), (0, "u\n"));
    let (_, out, _) = run(&["ring", "check", "--ring", "uq base=(ff p=2 e=1) var=T modulus=T^2+1"]);
    assert!(out.contains("REDUCED: no (nilpotent 1 + T)"), "{out}");
}

#[test]
fn frobenius_report_names_the_kernel() {
    let (code, out, _) = run(&["frob", "report", "--ring", "uq base=(ff p=3 e=1) var=T modulus=T^9"]);
    assert_eq!(code, 0);
    assert!(out.contains("KERNEL_GENERATORS: T^3\n"), "{out}");
    assert!(out.starts_with("SEED: "));
    let (code, out, _) = run(&["frob", "tower", "--p", "2", "--depth", "2"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn ramified_commands() {
    let base = "rb p=3 e=1 E=X^2-3";
    let ring = "ff p=3 e=1";
    let rw = |args: &[&str]| {
        let mut v = vec!["rw", args[0], "--base", base, "--ring", ring];
        v.extend_from_slice(&args[1..]);
        run(&v)
    };
    let (code, pi, _) = rw(&["embed", "--prec", "4", "--expr", "pi"]);
    assert_eq!(code, 0);
    let pi = pi.trim();
    let (_, three, _) = rw(&["mul", "--x", pi, "--y", pi]);
    assert_eq!(rw(&["expand", "--x", three.trim()]).1, "DIGITS[4]{0;0;1;0}\n");
    assert_eq!(rw(&["divpi", "--x", three.trim()]).1.trim(), rw(&["embed", "--prec", "3", "--expr", "pi"]).1.trim());
    assert_eq!(rw(&["reduce", "--x", three.trim()]).1, "0\n");
    let (_, back, _) = rw(&["assemble", "--digits", "DIGITS[4]{0;1;0;0}"]);
    assert_eq!(back.trim(), pi);
    let (_, two, _) = rw(&["embed", "--prec", "4", "--expr", "2"]);
    let (_, half, _) = rw(&["inv", "--x", two.trim()]);
    let (_, one, _) = rw(&["mul", "--x", two.trim(), "--y", half.trim()]);
    assert_eq!(rw(&["expand", "--x", one.trim()]).1, "DIGITS[4]{1;0;0;0}\n");
    assert_eq!(rw(&["add", "--x", one.trim(), "--y", two.trim()]).1.trim(), three.trim());
    assert_eq!(rw(&["frobpi", "--x", pi, "--k", "-2"]).1.trim(), pi);
    assert_eq!(rw(&["twist", "--x", two.trim(), "--n", "1"]).1.trim(), rw(&["embed", "--prec", "4", "--expr", "8"]).1.trim());
}

#[test]
fn hensel_lift_prints_steps_and_digits() {
    let (code, out, _) = run(&[
        "hensel",
        "lift",
        "--base",
        "rb p=3 e=1 E=X^2-3",
        "--ring",
        "frac base=(ff p=3 e=1) vars=x depth_p=6 depth_2=1 laurent=true",
        "--poly",
        "X^2-(p+x)",
        "--seed-digit",
        "x^(1/2)",
        "--prec",
        "8",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(&lines[..4], ["STEP prec=1 order=1", "STEP prec=2 order=2", "STEP prec=4 order=4", "STEP prec=8 order=8"]);
    assert!(lines[4].starts_with("DIGITS[8]{x^(1/2);0;2*x^(-1/2);0;"), "{out}");
}

#[test]
fn hensel_refuses_a_non_unit_derivative() {
    let (code, _, err) = run(&[
        "hensel", "lift", "--base", "rb p=2 e=1 E=X-2", "--ring", "ff p=2 e=1", "--poly", "X^4 - 2*X - 1",
        "--seed-digit", "1", "--prec", "4",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("derivative is not a unit"), "{err}");
    let (code, out, _) = run(&[
        "hensel", "adjoin", "--field", "ff p=2 e=1", "--ring", "ff p=2 e=1", "--poly", "X^4 - 2*X - 1",
        "--seed-digit", "1", "--prec", "8",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("RAMIFICATION: 4\nDIGITS[8]{1;1;0;0;0;0;0;0}"), "{out}");
}

#[test]
fn fontaine_commands() {
    let ring = "uq base=(ff p=2 e=1) var=u modulus=u^8";
    let (_, a, _) = run(&["fontaine", "make", "--ring", ring, "--a0", "u^4", "--len", "3"]);
    assert_eq!(a, "FONT{u^4;u^2;u}\n");
    assert_eq!(run(&["fontaine", "shift", "--ring", ring, "--x", a.trim()]).1, "FONT{u^2;u}\n");
    assert_eq!(run(&["fontaine", "shift", "--ring", ring, "--x", a.trim(), "--dir", "backward"]).1, "FONT{0;u^4;u^2}\n");
    assert_eq!(run(&["fontaine", "mul", "--ring", ring, "--x", a.trim(), "--y", a.trim()]).1, "FONT{0;u^4;u^2}\n");
    assert_eq!(run(&["fontaine", "add", "--ring", ring, "--x", a.trim(), "--y", a.trim()]).1, "FONT{0;0;0}\n");
    let (code, _, _) = run(&["fontaine", "add", "--ring", ring, "--x", "FONT{u;u}", "--y", a.trim()]);
    assert_eq!(code, 2);
}

#[test]
fn poly_commands_and_cache() {
    let dir = std::env::temp_dir().join(format!("wittforge-cli-{}", std::process::id()));
    let d = dir.to_str().unwrap();
    let (code, out, _) = run(&["poly", "gen", "--p", "3", "--kind", "sum", "--level", "2", "--out", d]);
    assert_eq!(code, 0);
    assert!(out.starts_with("WROTE "));
    let written = std::fs::read_to_string(dir.join("sum-p3-L2.txt")).unwrap();
    let (_, dumped, _) = run(&["--cache-dir", d, "poly", "dump", "--p", "3", "--kind", "sum", "--level", "2"]);
    assert_eq!(dumped, written);
    let (_, fresh, _) = run(&["--no-cache", "poly", "dump", "--p", "3", "--kind", "sum", "--level", "2"]);
    assert_eq!(fresh, written);
    let _ = std::fs::remove_dir_all(&dir);

    let (code, out, _) = run(&["bench", "poly", "--p", "2", "--level", "3", "--kind", "product"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("BENCH p=2 kind=product level=")).count(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["witt", "add", "--ring", "ff p=4 e=1", "--x", "W{1}", "--y", "W{1}"]).0, 2);
    assert_eq!(run(&["witt", "add", "--ring", "ff p=2 e=1", "--x", "W{1", "--y", "W{1}"]).0, 2);
    assert_eq!(run(&["--engine", "abacus", "witt", "neg", "--ring", "ff p=2 e=1", "--x", "W{1}"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["poly", "gen", "--p", "5", "--kind", "sum", "--level", "4"]).0, 3);
    let r = "frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false";
    assert_eq!(run(&["witt", "frob", "--ring", r, "--x", "W{x}", "--k", "-1"]).0, 3);
}

#[test]
fn verify_filters_and_determinism() {
    let (code, out, _) = run(&["verify", "examples", "--filter", "none-matching"]);
    assert_eq!(code, 0);
    assert!(out.contains("NOTE: no check matches filter `none-matching`"));
    let args = ["verify", "examples", "--filter", "twisted"];
    let (code, first, _) = run(&args);
    assert_eq!(code, 0, "{first}");
    assert!(first.contains("PASS frobenius-pi-suite"));
    assert_eq!(run(&args).1, first);
    let (code, out, _) = run(&["verify", "examples", "--filter", "sqrt", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("SEED: 7\n"));
}
