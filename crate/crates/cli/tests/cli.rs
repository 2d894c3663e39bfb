//! End-to-end checks of the binary: exit codes, deterministic generation,
//! and the bench CSV shape.

use std::path::PathBuf;
use std::process::{Command, Output};

fn nettc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nettc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn nettc_stdin(args: &[&str], stdin: &str) -> Output {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_nettc"))
        .args(args)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("nettc-test-{}-{name}", std::process::id()));
    p
}

fn write_file(name: &str, contents: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn check_yes_is_exit_zero() {
    let net = write_file("yes.net", "((a,(b)#H1),(#H1,c));\n");
    let tree = write_file("yes.tree", "((a,b),c);\n");
    let out = nettc(&["check", net.to_str().unwrap(), tree.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "YES");
}

#[test]
fn identical_tree_files_check_yes() {
    let a = write_file("same-a.nwk", "((a,b),(c,d));\n");
    let b = write_file("same-b.nwk", "((a,b),(c,d));\n");
    let out = nettc(&["check", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn gen_perturbed_tree_mode() {
    let n = scratch("p.net");
    let t = scratch("p.tree");
    let out = nettc(&[
        "gen",
        "--leaves",
        "8",
        "--rets",
        "2",
        "--class",
        "ns",
        "--seed",
        "3",
        "--tree",
        "perturbed",
        "--out-net",
        n.to_str().unwrap(),
        "--out-tree",
        t.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    // The pair is a valid instance either way; the verdict may be yes or no.
    let out = nettc(&[
        "check",
        n.to_str().unwrap(),
        t.to_str().unwrap(),
        "--oracle",
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)), "{out:?}");
}

#[test]
fn check_no_is_exit_one() {
    let net = write_file("no.net", "((a,(b)#H1),(#H1,c));\n");
    let tree = write_file("no.tree", "((a,c),b);\n");
    let out = nettc(&[
        "check",
        net.to_str().unwrap(),
        tree.to_str().unwrap(),
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "NO");
}

#[test]
fn malformed_input_is_exit_two_with_position() {
    let net = write_file("bad.net", "((a,b);\n");
    let tree = write_file("bad.tree", "(a,b);\n");
    let out = nettc(&["check", net.to_str().unwrap(), tree.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte"), "stderr: {err}");
}

#[test]
fn check_reads_stdin() {
    let tree = write_file("stdin.tree", "((a,b),c);\n");
    let out = nettc_stdin(
        &["check", "-", tree.to_str().unwrap()],
        "((a,(b)#H1),(#H1,c));\n",
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn check_trace_reports_reductions() {
    let net = write_file("tr.net", "((a,#H1),(b,((d,e))#H1));\n");
    let tree = write_file("tr.tree", "((a,(d,e)),b);\n");
    let out = nettc(&[
        "check",
        net.to_str().unwrap(),
        tree.to_str().unwrap(),
        "--trace",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pyramid"), "stderr: {err}");
}

#[test]
fn classify_reports_class_and_path_length() {
    let net = write_file("cl.net", "((a,b),c);\n");
    let out = nettc(&["classify", net.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("reticulation-visible"), "{text}");
    assert!(text.contains("reticulations=0"), "{text}");
    assert!(text.contains("max-reticulation-path=0"), "{text}");
}

#[test]
fn classify_parse_failure_is_exit_two() {
    let net = write_file("clbad.net", "((a,b)\n");
    let out = nettc(&["classify", net.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_is_byte_deterministic() {
    let n1 = scratch("g1.net");
    let t1 = scratch("g1.tree");
    let n2 = scratch("g2.net");
    let t2 = scratch("g2.tree");
    for (n, t) in [(&n1, &t1), (&n2, &t2)] {
        let out = nettc(&[
            "gen",
            "--leaves",
            "10",
            "--rets",
            "3",
            "--class",
            "rv",
            "--seed",
            "7",
            "--out-net",
            n.to_str().unwrap(),
            "--out-tree",
            t.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    assert_eq!(std::fs::read(&n1).unwrap(), std::fs::read(&n2).unwrap());
    assert_eq!(std::fs::read(&t1).unwrap(), std::fs::read(&t2).unwrap());

    // The generated pair round-trips through check as a displayed instance.
    let out = nettc(&[
        "check",
        n1.to_str().unwrap(),
        t1.to_str().unwrap(),
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn gen_rejects_impossible_parameters() {
    let out = nettc(&[
        "gen",
        "--leaves",
        "2",
        "--rets",
        "9",
        "--class",
        "ns",
        "--seed",
        "1",
        "--out-net",
        scratch("x.net").to_str().unwrap(),
        "--out-tree",
        scratch("x.tree").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("leaves"));
}

#[test]
fn bench_emits_versioned_csv() {
    let out = nettc(&[
        "bench", "--sizes", "256,512", "--reps", "2", "--class", "rv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# nettc bench csv v1");
    assert_eq!(lines.next().unwrap(), "n,k,class,median_ns,ns_per_vertex");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 5, "{row}");
        assert_eq!(cols[2], "rv");
        assert!(cols[1].parse::<usize>().unwrap() <= 1, "rv path bound");
    }
}

#[test]
fn unsupported_network_is_exit_two() {
    // The component below #H0 consists of one tree vertex whose children are
    // both reticulations escaping sideways, so it has no stability witness.
    let net = write_file(
        "unsup.net",
        "((l1,(((f1)#H1,(f2)#H2))#H0),(#H0,(#H1,#H2)));\n",
    );
    let tree = write_file("unsup.tree", "((l1,f1),f2);\n");
    let out = nettc(&["check", net.to_str().unwrap(), tree.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("UNSUPPORTED"), "{text}");

    let out = nettc(&["classify", net.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unsupported"));
}
