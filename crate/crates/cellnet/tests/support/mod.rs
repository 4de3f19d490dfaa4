#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn cellnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellnet"))
        .args(args)
        .output()
        .expect("spawn cellnet")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs and asserts success, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let o = cellnet(args);
    assert!(o.status.success(), "cellnet {args:?} failed: {}", stderr(&o));
    stdout(&o)
}

/// Value of `key=` on the first stdout line that has it.
pub fn metric(text: &str, key: &str) -> f64 {
    text.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key}= in {text:?}"))
        .parse()
        .unwrap()
}

pub fn desk(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/mnist-desk")
        .join(file)
}

pub fn desk_train() -> [String; 4] {
    [
        "--data".into(),
        desk("train-images-idx3-ubyte.gz").display().to_string(),
        "--labels".into(),
        desk("train-labels-idx1-ubyte.gz").display().to_string(),
    ]
}

pub fn desk_test() -> [String; 4] {
    [
        "--data".into(),
        desk("t10k-images-idx3-ubyte.gz").display().to_string(),
        "--labels".into(),
        desk("t10k-labels-idx1-ubyte.gz").display().to_string(),
    ]
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
