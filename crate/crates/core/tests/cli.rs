use std::path::Path;
use std::process::Command;

fn spin7() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spin7"))
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn chi_command() {
    let out = spin7().args(["chi", "--weights", "1,1,1,1,8,12", "--exponents", "24,24,24,24,3,2"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "23325");
    let out = spin7()
        .args(["chi", "--weights", "1,1,1,1,8,12", "--exponents", "24,24,24,24,3,2", "--uncorrected"])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "23326");
    let out = spin7().args(["chi", "--weights", "1,1,1,1,4,4", "--exponents", "12,12,12,12,3,3", "--chain"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "12 -108 1224 -2436 4887");
}

#[test]
fn analyze_exit_status() {
    let out = spin7().args(["analyze", &fixture("s7.scn"), "--kv"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("s7.b4_minus=807"));
    let dir = std::env::temp_dir().join(format!("spin7-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.scn");
    std::fs::write(
        &bad,
        "format: 1\nname: bad\nweights: 1 1 1 1 4 4\nequation: z0^12 + z1^12 + z2^12 + z3^12 + z4^3 + z5^3\nseed\ninvolution: pair(0,1; -) pair(2,3; -) conj(4) conj(5)\ncheck\nquotient sigma\nresolve: 2\n",
    )
    .unwrap();
    let out = spin7().args(["analyze", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(&bad, "format: 1\nresolve: 2\n").unwrap();
    let out = spin7().args(["analyze", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn table_command_follows_the_fixture_directory_variable() {
    let out = spin7().arg("paper-table").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("14/14 rows match"));
    let empty = Path::new(env!("CARGO_TARGET_TMPDIR")).join("no-fixtures");
    std::fs::create_dir_all(&empty).unwrap();
    let out = spin7().arg("paper-table").env("SPIN7_FIXTURE_DIR", &empty).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0/14 rows match"));
}

#[test]
fn enumerate_and_algebra_commands() {
    let out = spin7().args(["enumerate", "--max-d", "24", "--filter", "z4-scalar"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("(1,1,1,1,8,12) d=24 points=1"));
    assert!(text.contains("3 candidates"));
    let out = spin7().args(["enumerate", "--max-d", "500"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = spin7().args(["algebra", "--check", "groups"]).output().unwrap();
    assert!(out.status.success());
}
