use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn dsp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsp"))
}

fn run(args: &[&str]) -> Output {
    dsp().args(args).output().expect("spawn dsp")
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = dsp()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn dsp");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dsp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn fig1_file() -> PathBuf {
    let out = run(&["gen", "fig1"]);
    assert!(out.status.success());
    scratch("fig1.dsp", &String::from_utf8(out.stdout).unwrap())
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_fig1_with_dsp2() {
    let f = fig1_file();
    let out = run(&["solve", "--algo", "dsp2", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("yes\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("path ")).count(), 2);
}

#[test]
fn solve_fig1_with_kdsp_and_trace() {
    let f = fig1_file();
    let out = run(&[
        "solve",
        "--algo",
        "kdsp",
        "--trace",
        "--threads",
        "2",
        f.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E(0,1)"));
}

#[test]
fn verify_rejects_overlapping_paths() {
    let inst = scratch(
        "line.dsp",
        "p dsp 4 3 2\ne 0 1\ne 1 2\ne 2 3\nt 0 3\nt 1 2\n",
    );
    let sol = scratch("overlap.sol", "yes\npath 0: 0 1 2 3\npath 1: 1 2\n");
    let out = run(&["verify", inst.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("disjointness"));
}

#[test]
fn verify_accepts_solver_output() {
    let f = fig1_file();
    let solved = run(&["solve", f.to_str().unwrap()]);
    let sol = scratch("fig1.sol", &stdout(&solved));
    let out = run(&["verify", f.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn piped_random_instances_match_the_oracle() {
    for seed in 0..12 {
        let seed = seed.to_string();
        let gen = run(&[
            "gen", "random", "--n", "8", "--p", "0.35", "--k", "3", "--seed", &seed,
        ]);
        assert!(gen.status.success());
        let solved = run_stdin(
            &["solve", "--algo", "kdsp", "--require-complete", "-"],
            &gen.stdout,
        );
        let file = scratch(&format!("r{seed}.dsp"), &stdout(&gen));
        let oracle = run(&["oracle", file.to_str().unwrap()]);
        assert_eq!(solved.status.code(), oracle.status.code(), "seed {seed}");
    }
}

#[test]
fn random_generation_is_reproducible() {
    let a = run(&["gen", "random", "--seed", "7"]);
    let b = run(&["gen", "random", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zero_budget_is_unknown() {
    let f = fig1_file();
    let out = run(&[
        "solve",
        "--algo",
        "kdsp",
        "--budget",
        "0",
        f.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).trim(), "unknown");
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(
        run(&["solve", "--algo", "nope", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&[]).status.code(), Some(2));
    let bad = scratch("bad.dsp", "p dsp 2 1 1\ne 0 7\nt 0 1\n");
    assert_eq!(
        run(&["solve", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let f = fig1_file();
    let both = run(&[
        "solve",
        "--budget",
        "5",
        "--require-complete",
        f.to_str().unwrap(),
    ]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn dsp2_rejects_three_pairs() {
    let gen = run(&["gen", "random", "--n", "8", "--k", "3", "--seed", "1"]);
    let f = scratch("k3.dsp", &stdout(&gen));
    assert_eq!(
        run(&["solve", "--algo", "dsp2", f.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn mcc_reduction_with_trace() {
    let mcc = scratch("tri.mcc", "p mcc 2 0 2\nv 0 0\nv 1 1\n");
    let out = run(&["gen", "mcc", "--trace", "--file", mcc.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("p dsp"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("merge"));
    let f = scratch("tri.dsp", &stdout(&out));
    assert_eq!(run(&["oracle", f.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn bench_prints_one_json_line() {
    let f = fig1_file();
    let out = run(&["bench", "--algo", "kdsp", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    for key in [
        "\"positions_ms\"",
        "\"solve_ms\"",
        "\"guesses\"",
        "\"eval_ms\"",
    ] {
        assert!(text.contains(key), "{key} missing in {text}");
    }
}

#[test]
fn export_dot_draws_paths_and_rectangles() {
    let f = fig1_file();
    let solved = run(&["solve", f.to_str().unwrap()]);
    let sol = scratch("fig1-dot.sol", &stdout(&solved));
    let out = run(&[
        "export-dot",
        "--solution",
        sol.to_str().unwrap(),
        f.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("graph projection {"));
    assert!(text.contains("penwidth"));
    assert!(text.contains("r1_3"));
}
