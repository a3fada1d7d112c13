use std::process::Command;

fn radiosync(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_radiosync")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn gen_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let p = path.to_str().unwrap();
    let (code, _) = radiosync(&["sched", "gen", "--d", "36", "--out", p]);
    assert_eq!(code, 0);
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("L=98\n"));
    let (code, out) = radiosync(&["sched", "verify", "--d", "36", "--file", p]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS"), "{out}");
}

#[test]
fn verify_reports_first_gap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "L=10\n0 1\n").unwrap();
    let (code, out) = radiosync(&["sched", "verify", "--d", "5", "--file", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(out.trim(), "FAIL: shift 2 uncovered");
}

#[test]
fn birthday_prints_one_record() {
    let (code, out) = radiosync(&["birthday", "--lemma", "1", "--L", "10000", "--C", "1.82", "--trials", "500", "--seed", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,10000,0.5,1.82,182,182,500,"), "{}", lines[1]);
}

#[test]
fn sync_run_is_reproducible() {
    let args = ["sync", "run", "--d", "128", "--beta", "0.5", "--seed", "4"];
    let (code, a) = radiosync(&args);
    assert_eq!(code, 0);
    assert_eq!(a, radiosync(&args).1);
    assert!(a.lines().nth(1).unwrap().starts_with("4,128,12,0.500000,false,true,"), "{a}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "d = 512\nbeta = 0.5\nseed = 9\n").unwrap();
    let (code, out) = radiosync(&["sync", "run", "--config", path.to_str().unwrap(), "--d", "128"]);
    assert_eq!(code, 0);
    assert!(out.lines().nth(1).unwrap().starts_with("9,128,"), "{out}");
}

#[test]
fn sweep_output_is_byte_stable() {
    let args = ["sweep", "--d", "64,128", "--exclusive", "false,true", "--trials", "2", "--seed", "3"];
    let (code, a) = radiosync(&args);
    assert_eq!(code, 0);
    assert_eq!(a.lines().count(), 5);
    assert_eq!(a, radiosync(&args).1);
}

#[test]
fn bad_input_exits_nonzero() {
    assert_eq!(radiosync(&["sync", "run", "--d", "0", "--beta", "0.5"]).0, 2);
    assert_ne!(radiosync(&["birthday", "--lemma", "3", "--L", "10", "--C", "1"]).0, 0);
}
