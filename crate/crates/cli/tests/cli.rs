use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_endpoint-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("ENDPOINT_LAB_MAX_N")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn rho_writes_table() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("w.txt"), "2\n1 2 0 4\n").unwrap();
    let out = lab(dir.path(), &["rho", "--weight", "w.txt", "--out", "rho.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("rho.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,index,rho,vacuous");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[3], "1,1,1.5,false");
    assert_eq!(lines[6], "2,2,1,true");
}

#[test]
fn fs_suite_passes() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), &["verify-fs", "--n", "8", "--trials", "1000", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("[PASS] constant_one"));
}

#[test]
fn main_suite_exit_follows_bound() {
    let dir = TempDir::new().unwrap();
    let ok = lab(dir.path(), &["verify-main", "--n", "12", "--trials", "200", "--eps", "log_pow:2", "--bound", "64", "--out", "main.json"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let failing = lab(dir.path(), &["verify-main", "--n", "8", "--trials", "40", "--bound", "0.01"]);
    assert_eq!(code(&failing), 1);
    assert!(stderr(&failing).contains("[FAIL]"));
}

#[test]
fn report_echoes_effective_config() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.cfg"), "# defaults\nn = 6\ntrials = 30\nseed = 11\n").unwrap();
    let out = lab(dir.path(), &["verify-ainf", "--config", "run.cfg", "--seed", "12", "--out", "r.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let opts = &v["provenance"]["config"]["options"];
    assert_eq!(opts["n"], "6");
    assert_eq!(opts["trials"], "30");
    assert_eq!(opts["seed"], "12");
    assert_eq!(opts["bound"], "8");
    assert_eq!(v["provenance"]["seed"], 12);
    assert_eq!(v["provenance"]["config"]["subcommand"], "verify-ainf");
    assert_eq!(v["records"].as_array().unwrap().len(), 30);
}

#[test]
fn runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = lab(dir.path(), &["domination", "--n", "8", "--trials", "50", "--seed", "3", "--out", name]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("trial,s,K_eps,a1,ainf,quotient,normalized_quotient,pass\n"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = lab(dir.path(), &["rho", "--weight", "absent.txt"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("absent.txt"));

    fs::write(dir.path().join("bad.txt"), "2\n1 2\n3 oops\n").unwrap();
    let malformed = lab(dir.path(), &["maximal", "--weight", "bad.txt"]);
    assert_eq!(code(&malformed), 2);
    assert!(stderr(&malformed).contains("line 3"), "{}", stderr(&malformed));

    fs::write(dir.path().join("c.cfg"), "n = 4\ncolour = red\n").unwrap();
    let unknown = lab(dir.path(), &["verify-fs", "--config", "c.cfg"]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("colour"));

    assert_eq!(code(&lab(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&lab(dir.path(), &["verify-fs", "--n", "eight"])), 2);
    assert_eq!(code(&lab(dir.path(), &["verify-main", "--eps", "nonsense:1"])), 2);
    assert_eq!(code(&lab(dir.path(), &["verify-main", "--a", "2"])), 2);
    assert_eq!(code(&lab(dir.path(), &["verify-fs", "--out", "no/such/dir/r.json", "--trials", "1"])), 2);
    assert_eq!(code(&lab(dir.path(), &["--help"])), 0);
}

#[test]
fn resolution_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_endpoint-lab"))
        .args(["verify-fs", "--n", "9", "--trials", "5"])
        .current_dir(dir.path())
        .env("ENDPOINT_LAB_MAX_N", "8")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cap"));
}

#[test]
fn sparse_split_of_a_collection_file() {
    let dir = TempDir::new().unwrap();
    let chain: String = (0..=12).map(|l| format!("{l} 0\n")).collect();
    fs::write(dir.path().join("chain.txt"), format!("12\n{chain}")).unwrap();
    let out = lab(dir.path(), &["sparse-split", "--collection", "chain.txt", "--out", "parts.txt"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let parts = fs::read_to_string(dir.path().join("parts.txt")).unwrap();
    assert_eq!(parts.matches("# part").count(), 8);

    // Every cube at level 2 and below: fails the packing condition.
    let dense: String = (0..4).map(|i| format!("2 {i}\n")).chain((0..8).map(|i| format!("3 {i}\n"))).collect();
    fs::write(dir.path().join("dense.txt"), format!("3\n0 0\n1 0\n1 1\n{dense}")).unwrap();
    let out = lab(dir.path(), &["sparse-split", "--collection", "dense.txt"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("[FAIL] carleson_packing"));

    let sweep = lab(dir.path(), &["sparse-split", "--n", "10", "--trials", "100", "--a", "2.5"]);
    assert_eq!(code(&sweep), 0, "{}", stderr(&sweep));
}

#[test]
fn table_and_descriptive_subcommands() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), &["maximal", "--weight", "power:0.9", "--n", "5", "--phi", "llogl:delta=1", "--out", "m.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(csv.starts_with("cell,w,dyadic,entropy,orlicz\n"));
    assert_eq!(csv.lines().count(), 33);

    let cmp = lab(dir.path(), &["compare", "--weight", "power:0.9", "--n", "6", "--out", "c.json"]);
    assert_eq!(code(&cmp), 0, "{}", stderr(&cmp));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert!(v["pass_flags"].as_object().unwrap().is_empty());
    assert_eq!(v["provenance"]["config"]["options"]["phi"], "dlr:delta=1");

    let rep = lab(dir.path(), &["replay", "--n", "8", "--trials", "30", "--seed", "5"]);
    assert_eq!(code(&rep), 0, "{}", stderr(&rep));
    assert!(stderr(&rep).contains("[PASS] h_small"));
}

#[test]
fn plots_are_written_deterministically() {
    let dir = TempDir::new().unwrap();
    for name in ["a.svg", "b.svg"] {
        let out = lab(dir.path(), &["verify-cor", "--n", "8", "--trials", "40", "--s-list", "0,0.5,0.9", "--plot", name]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let a = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert_eq!(a, fs::read_to_string(dir.path().join("b.svg")).unwrap());
    assert!(a.contains("<polyline"));
    assert_eq!(a.matches("<circle").count(), 3);

    let hist = lab(dir.path(), &["verify-main", "--n", "8", "--trials", "40", "--plot", "h.svg"]);
    assert_eq!(code(&hist), 0);
    assert!(fs::read_to_string(dir.path().join("h.svg")).unwrap().contains("<rect"));
}
