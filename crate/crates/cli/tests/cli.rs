//! End-to-end runs of the `molsim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn molsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for circuit in [
        &["fulladder"][..],
        &["maj3"],
        &["halfadder"],
        &["ripple", "3"],
    ] {
        let mut a = circuit.to_vec();
        a.extend(["-o", "one.cir"]);
        let mut b = circuit.to_vec();
        b.extend(["-o", "two.cir"]);
        assert_eq!(code(&molsim(&[&["gen"][..], &a].concat(), dir.path())), 0);
        assert_eq!(code(&molsim(&[&["gen"][..], &b].concat(), dir.path())), 0);
        let x = fs::read(dir.path().join("one.cir")).unwrap();
        let y = fs::read(dir.path().join("two.cir")).unwrap();
        assert_eq!(x, y, "{circuit:?}");
    }
}

#[test]
fn gen_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = molsim(&["gen", "maj3"], dir.path());
    assert_eq!(code(&out), 0);
    molsim(&["gen", "maj3", "-o", "m.cir"], dir.path());
    assert_eq!(out.stdout, fs::read(dir.path().join("m.cir")).unwrap());
    assert!(out.stderr.is_empty());
}

#[test]
fn generated_full_adder_verifies() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&molsim(&["gen", "fulladder", "-o", "fa.cir"], dir.path())),
        0
    );
    let out = molsim(
        &[
            "verify",
            "fa.cir",
            "--table",
            "fulladder",
            "--csv",
            "fa.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("8/8 rows pass"));
    let csv = fs::read_to_string(dir.path().join("fa.csv")).unwrap();
    assert!(csv.starts_with("row,a,b,cin,v_sum,v_cout,sum,cout,pass,margin\n"));
}

#[test]
fn other_tables_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, file) in [("maj3", "m.cir"), ("halfadder", "h.cir")] {
        molsim(&["gen", kind, "-o", file], dir.path());
        let out = molsim(&["verify", file, "--table", kind], dir.path());
        assert_eq!(
            code(&out),
            0,
            "{kind}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn weak_devices_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let weak = ["--rtd-iv", "0.952381m"];
    let mut gen = vec!["gen", "fulladder", "-o", "fa.cir"];
    gen.extend(weak);
    assert_eq!(code(&molsim(&gen, dir.path())), 0);
    let mut verify = vec!["verify", "fa.cir", "--table", "fulladder"];
    verify.extend(weak);
    let out = molsim(&verify, dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("verification failed"));
}

#[test]
fn missing_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = molsim(&["op", "missing.cir"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cir"));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cir"), "* bad\nR1 a\n").unwrap();
    let out = molsim(&["parse", "bad.cir"], dir.path());
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cir") && err.contains("line 2"), "{err}");
    assert_eq!(code(&molsim(&["frobnicate"], dir.path())), 2);
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("d.cir"),
        "* stiff diode\nV1 a 0 DC 5\nD1 a 0 DM\n.model DM d IS=1e-15\n",
    )
    .unwrap();
    let out = molsim(&["op", "d.cir", "--itl", "1"], dir.path());
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn rtd_sweep_has_201_rows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("rtd.cir"),
        "* lone rtd\nV1 a 0 DC 0\nT1 a 0 RT\n.model RT rtd\n",
    )
    .unwrap();
    let out = molsim(
        &[
            "sweep", "rtd.cir", "--source", "V1", "--from", "0", "--to", "1", "--step", "0.005",
            "-o", "iv.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("iv.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "v,a,i(V1)");
    assert_eq!(lines.len(), 202);
}

#[test]
fn tran_uses_the_netlist_directive() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("rc.cir"),
        "* rc\nV1 in 0 PULSE(0 1 0 1n 1n 1m 2m)\nR1 in out 1k\nC1 out 0 1n\n.tran 10n 2u\n",
    )
    .unwrap();
    let out = molsim(&["tran", "rc.cir", "--probe", "out"], dir.path());
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,out");
    assert_eq!(csv.lines().count(), 202);
}
