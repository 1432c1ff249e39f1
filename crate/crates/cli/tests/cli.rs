//! End-to-end tests over the compiled binary: each subcommand, the output
//! files it writes, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn hamlsh(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamlsh"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SWEEP_HEADER: &str =
    "n,d,r,c,lambda,start_distance,target_distance,algo,success_rate,sem,mean_queries,sem_queries,trials";

#[test]
fn gen_data_then_attack_on_file() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = hamlsh(
        &["gen-data", "--kind", "random", "-n", "60", "-d", "64", "--out", "pts.txt"],
        tmp.path(),
    );
    assert!(gen.status.success(), "{gen:?}");
    let text = std::fs::read_to_string(tmp.path().join("pts.txt")).unwrap();
    assert_eq!(text.lines().count(), 60);
    assert!(text.lines().all(|l| l.len() == 64 && l.bytes().all(|b| b == b'0' || b == b'1')));

    let attack = hamlsh(
        &["attack", "--dataset", "pts.txt", "-r", "8", "--trials", "3", "--seed", "5"],
        tmp.path(),
    );
    assert!(attack.status.success(), "{attack:?}");
    let out = stdout(&attack);
    assert_eq!(out.matches("trial ").count(), 3);
    assert!(out.contains("success rate: "), "{out}");
}

#[test]
fn attack_rejects_n_with_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    hamlsh(
        &["gen-data", "-n", "10", "-d", "32", "--out", "p.txt"],
        tmp.path(),
    );
    let out = hamlsh(
        &["attack", "--dataset", "p.txt", "-n", "10", "-r", "4"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn sweep_writes_csv_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("cfg.toml"),
        r#"
name = "t"
trials = 5
seed = 1

[dataset]
kind = "zero"

[grid]
n = 200
d = 300
r = 30
"#,
    )
    .unwrap();
    let out = hamlsh(
        &["sweep", "--config", "cfg.toml", "--out", "t.csv", "--json"],
        tmp.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    assert!(csv.starts_with(SWEEP_HEADER), "{csv}");
    assert!(csv.trim_end().lines().nth(1).unwrap().starts_with("200,300,30,"));
    let json = std::fs::read_to_string(tmp.path().join("t.json")).unwrap();
    assert!(json.contains("\"success_rate\""), "{json}");
}

#[test]
fn sweep_stdout_respects_overrides_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("cfg.toml"),
        r#"
trials = 999
seed = 999

[dataset]
kind = "zero"

[grid]
n = 200
d = 300
r = 30
"#,
    )
    .unwrap();
    let args = ["sweep", "--config", "cfg.toml", "--trials", "4", "--seed", "2"];
    let a = hamlsh(&args, tmp.path());
    let b = hamlsh(&args, tmp.path());
    assert!(a.status.success());
    let text = stdout(&a);
    assert_eq!(text, stdout(&b), "same command, same bytes");
    assert!(text.trim_end().lines().nth(1).unwrap().ends_with(",4"), "{text}");
}

#[test]
fn verify_passes_and_missing_config_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let v = hamlsh(&["verify", "--seed", "0"], tmp.path());
    assert!(v.status.success(), "{v:?}");
    let out = stdout(&v);
    assert_eq!(out.matches("[PASS]").count(), 7, "{out}");
    assert!(out.contains("ok: 7 checks"));

    let missing = hamlsh(&["sweep"], tmp.path());
    assert_eq!(missing.status.code(), Some(1), "{missing:?}");
}

#[test]
fn io_and_config_errors_use_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let io = hamlsh(
        &["attack", "--dataset", "no-such-file.txt", "-r", "5"],
        tmp.path(),
    );
    assert_eq!(io.status.code(), Some(3), "{io:?}");

    // c*r > d is rejected at parameter derivation.
    let cfg = hamlsh(&["attack", "-n", "50", "-d", "32", "-r", "20"], tmp.path());
    assert_eq!(cfg.status.code(), Some(2), "{cfg:?}");
}
