// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pandora");

fn pandora(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("PANDORA_PORT").env_remove("PANDORA_BUDGET").output().unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name).to_string_lossy().into_owned()
}

fn corpus_dir() -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    assert!(pandora(&["corpus", "build", "--out-dir", d.path().to_str().unwrap()]).status.success());
    d
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pandora(&[]).status.code(), Some(2));
    assert_eq!(pandora(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pandora(&["run"]).status.code(), Some(2));
    assert_eq!(pandora(&["exploit", "--cb", "x", "--seed-input", "y", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn verify_foreign_binary() {
    let out = pandora(&["verify", &fixture("elf_ls.bin")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "cannot execute binary file: Exec format error");
}

#[test]
fn corpus_build_verify_disasm_roundtrip() {
    let d = corpus_dir();
    let p = |f: &str| d.path().join(f).to_string_lossy().into_owned();
    for name in ["greeter.pbf", "counter.pbf", "leaky.pbf", "dataabort.pbf", "greeter_ref.pov", "leaky_ref.pov", "manifest.toml"] {
        assert!(d.path().join(name).exists(), "{name}");
    }
    let v = pandora(&["verify", &p("greeter.pbf")]);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains("verified"));

    let dis = pandora(&["disasm", &p("greeter.pbf")]);
    assert!(dis.status.success());
    fs::write(p("re.s"), &dis.stdout).unwrap();
    assert!(pandora(&["build", &p("re.s"), "-o", &p("re.pbf")]).status.success());
    assert_eq!(fs::read(p("re.pbf")).unwrap(), fs::read(p("greeter.pbf")).unwrap());
}

#[test]
fn run_exit_codes() {
    let d = corpus_dir();
    let p = |f: &str| d.path().join(f).to_string_lossy().into_owned();
    let counter = pandora(&["run", &p("counter.pbf"), "--budget", "10000"]);
    assert_eq!(counter.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&counter.stderr).contains("budget exhausted"));
    assert!(counter.stdout.starts_with(b"0\n1\n2\n"));

    let env_budget = Command::new(BIN).args(["run", &p("counter.pbf")]).env("PANDORA_BUDGET", "500").output().unwrap();
    assert!(String::from_utf8_lossy(&env_budget.stderr).contains("after 500 instructions"));

    let mut child = Command::new(BIN)
        .args(["run", &p("greeter.pbf")])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(b"1\nworld\n2\n3\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("world"));

    let abort = pandora(&["run", &p("dataabort.pbf")]);
    assert_eq!(abort.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&abort.stderr).contains("ReadFault"));
}

#[test]
fn fuzz_is_deterministic_and_writes_crashes() {
    let d = corpus_dir();
    let p = |f: &str| d.path().join(f).to_string_lossy().into_owned();
    fs::write(p("seed"), "1\nhello\n3\n").unwrap();
    let args = |out: &str| {
        vec!["fuzz".to_string(), "--cb".into(), p("greeter.pbf"), "--seed-input".into(), p("seed"), "--execs".into(), "5000".into(), "--rng".into(), "3".into(), "--out-dir".into(), p(out)]
    };
    let run = |out: &str| {
        let a = args(out);
        pandora(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let (a, b) = (run("c1"), run("c2"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(p("c1/crash-000.bin")).unwrap(), fs::read(p("c2/crash-000.bin")).unwrap());
}
