//! Running the `chamberflow` binary from tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chamberflow"))
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Runs the binary with `CHAMBERFLOW_OUT_DIR` set to `out`.
pub fn run_in(out: &Path, args: &[&str]) -> Output {
    bin().args(args).env("CHAMBERFLOW_OUT_DIR", out).output().expect("binary runs")
}

pub fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chamberflow-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

/// Input files used by the command suite.
pub fn write_inputs(dir: &Path) {
    let files = [
        ("identity.json", "[[1,0,0],[0,1,0],[0,0,1]]"),
        ("g.json", "[[4,1,0.5],[0.2,1,0.3],[0.1,0,0.25]]"),
        ("prox.json", "[[1e6,3,1],[0,1,2],[0,0,1e-6]]"),
        ("kronecker.json", "{\"vectors\": [[1,0],[0,1],[1.4142135623730951,1.7320508075688772]], \"basis\": [0,1], \"eps\": 0.1}"),
        ("half.json", "{\"vectors\": [[1],[0.5]], \"basis\": [0], \"eps\": 0.1}"),
        ("approx.json", "{\"ls\": [[1],[1.4142135623730951]], \"target\": [10.7], \"eta\": 0.05}"),
    ];
    for (name, text) in files {
        std::fs::write(dir.join(name), text).expect("write input");
    }
}

/// Every subcommand once, each writing its JSON (and CSV where there is one) under the output
/// directory. Returns `(label, exit code)` pairs.
pub fn run_suite(inputs: &Path, out: &Path, seed: u64) -> Vec<(String, i32)> {
    let seed = seed.to_string();
    let i = |name: &str| inputs.join(name).display().to_string();
    let config = data("bundled.json").display().to_string();
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("project_cartan", vec!["project".into(), "--kind".into(), "cartan".into(), i("g.json")]),
        ("project_jordan", vec!["project".into(), "--kind".into(), "jordan".into(), i("g.json")]),
        ("project_iwasawa", vec!["project".into(), "--kind".into(), "iwasawa".into(), i("g.json")]),
        ("rep", vec!["rep".into(), "--k".into(), "2".into(), i("g.json")]),
        ("certify", vec!["certify".into(), "--r".into(), "0.2".into(), "--eps".into(), "0.1".into(), i("prox.json")]),
        ("schottky_certify", vec!["schottky".into(), "certify".into()]),
        ("schottky_estimate", vec!["schottky".into(), "estimate".into(), "--word".into(), "1^3 2^5 1^2".into()]),
        ("hopf", vec!["hopf".into(), i("g.json")]),
        ("flow", vec!["flow".into(), "--theta".into(), "0.7071067811865476,0,-0.7071067811865476".into(), "--t".into(), "2.5".into(), i("g.json")]),
        ("cone_sample", vec!["cone".into(), "sample".into(), "--depth".into(), "4".into()]),
        ("cone_contains", vec!["cone".into(), "contains".into(), "--theta".into(), "1,0,-1".into()]),
        ("dense_check", vec!["dense".into(), "check".into(), i("kronecker.json")]),
        ("dense_complete", vec!["dense".into(), "complete".into(), i("kronecker.json")]),
        ("dense_refuse", vec!["dense".into(), "complete".into(), i("half.json")]),
        ("dense_approx", vec!["dense".into(), "approx".into(), i("approx.json")]),
        ("mix_demo", vec!["mix".into(), "demo".into()]),
    ];
    let mut codes = Vec::new();
    for (label, args) in cases {
        let mut full: Vec<String> = vec!["--config".into(), config.clone(), "--seed".into(), seed.clone()];
        full.extend(args);
        full.extend(["--json".into(), format!("{label}.json"), "--csv".into(), format!("{label}.csv")]);
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let output = run_in(out, &refs);
        std::fs::write(out.join(format!("{label}.stdout")), &output.stdout).expect("write stdout");
        codes.push((label.to_string(), output.status.code().unwrap_or(-1)));
    }
    codes
}

/// Sorted file names and contents of a directory.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("read dir")
        .map(|e| {
            let e = e.expect("entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("read"))
        })
        .collect();
    files.sort();
    files
}
