mod support;

use std::time::Instant;

use cellnet::cli::gradcheck_with;
use cellnet::{load_model, Model};
use cellnet_core::objective;
use support::*;
use tempfile::TempDir;

fn synth_csv(dir: &TempDir, name: &str, kind: &str, n: usize, d: usize, noise: f64, seed: u64) -> String {
    let p = dir.path().join(name);
    ok(&[
        "synth", "--kind", kind, "--n", &n.to_string(), "--d", &d.to_string(),
        "--noise", &noise.to_string(), "--seed", &seed.to_string(), "--out", s(&p),
    ]);
    s(&p).to_string()
}

#[test]
fn synth_same_seed_same_bytes() {
    let a = ok(&["synth", "--kind", "xor-blobs", "--n", "50", "--d", "3", "--noise", "0.3", "--seed", "4"]);
    let b = ok(&["synth", "--kind", "xor-blobs", "--n", "50", "--d", "3", "--noise", "0.3", "--seed", "4"]);
    assert_eq!(a, b);
    assert!(a.starts_with("x0,x1,x2,y\n"));
    assert_eq!(a.lines().count(), 51);
}

#[test]
fn conflicting_seeding_flags_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "d.csv", "two-gaussians", 20, 2, 1.0, 0);
    let out = dir.path().join("m.json");
    let o = cellnet(&[
        "train", "--csv", &csv, "--mode", "binary", "--cells", "3", "--stratified", "2,1", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_flag_and_unreadable_path_exit_one() {
    assert_eq!(cellnet(&["train", "--bogus"]).status.code(), Some(1));
    let o = cellnet(&["train", "--csv", "/nonexistent/x.csv", "--out", "/tmp/never.json"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("/nonexistent/x.csv"));
}

#[test]
fn malformed_data_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "a,y\n1,0\nfoo,1\n").unwrap();
    let o = cellnet(&["train", "--csv", s(&p), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn non_binary_targets_in_binary_mode_exit_two() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "d.csv", "linear", 20, 2, 0.0, 0);
    let o = cellnet(&["train", "--csv", &csv, "--mode", "binary", "--cells", "2", "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn zero_epochs_writes_seeded_model() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "d.csv", "linear", 40, 2, 0.0, 1);
    let out = dir.path().join("m.json");
    let text = ok(&["train", "--csv", &csv, "--cells", "4", "--epochs", "0", "--alpha-init", "0.7", "--out", s(&out)]);
    assert_eq!(metric(&text, "parameters"), 24.0);
    let Model::Single(net) = load_model(&out).unwrap() else { panic!("bundle") };
    assert_eq!(net.cells(), 4);
    assert!(net.alphas().iter().all(|&a| a == 0.7));
    assert!(net.betas().iter().all(|&b| b == 0.0));
}

#[test]
fn progress_lines_on_stderr() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "d.csv", "linear", 40, 2, 0.0, 1);
    let o = cellnet(&["train", "--csv", &csv, "--cells", "2", "--epochs", "3", "--out", s(&dir.path().join("m.json"))]);
    assert!(o.status.success());
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("epoch=")).collect();
    assert_eq!(lines.len(), 3, "{err}");
    assert!(lines[2].starts_with("epoch=3 objective=") && lines[2].contains(" elapsed_s="));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(metric(&out, "objective").is_finite() && metric(&out, "elapsed_s") >= 0.0);
}

#[test]
fn linear_fixture_fits_exactly() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "d.csv", "linear", 200, 3, 0.0, 1);
    let model = dir.path().join("m.json");
    ok(&["train", "--csv", &csv, "--cells", "1", "--epochs", "300", "--deterministic", "--quiet", "--out", s(&model)]);
    let mse = metric(&ok(&["evaluate", "--model", s(&model), "--csv", &csv]), "mse");
    assert!(mse < 1e-6, "mse={mse}");
}

#[test]
fn evaluate_dimension_mismatch_cites_dimensions() {
    let dir = TempDir::new().unwrap();
    let train = synth_csv(&dir, "a.csv", "linear", 30, 2, 0.0, 1);
    let other = synth_csv(&dir, "b.csv", "linear", 30, 3, 0.0, 1);
    let model = dir.path().join("m.json");
    ok(&["train", "--csv", &train, "--cells", "1", "--epochs", "1", "--quiet", "--out", s(&model)]);
    let o = cellnet(&["evaluate", "--model", s(&model), "--csv", &other]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`dimensions` is 2"), "{}", stderr(&o));
}

#[test]
fn evaluate_empty_test_set_fails() {
    let dir = TempDir::new().unwrap();
    let train = synth_csv(&dir, "a.csv", "linear", 30, 2, 0.0, 1);
    let model = dir.path().join("m.json");
    ok(&["train", "--csv", &train, "--cells", "1", "--epochs", "1", "--quiet", "--out", s(&model)]);
    let empty = dir.path().join("e.csv");
    std::fs::write(&empty, "x0,x1,y\n").unwrap();
    let o = cellnet(&["evaluate", "--model", s(&model), "--csv", s(&empty)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty dataset"));
}

#[test]
fn binary_train_evaluate_predict() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "g.csv", "two-gaussians", 200, 4, 1.0, 2);
    let model = dir.path().join("m.json");
    ok(&["train", "--csv", &csv, "--mode", "binary", "--cells", "1", "--epochs", "20", "--quiet", "--out", s(&model)]);
    let text = ok(&["evaluate", "--model", s(&model), "--csv", &csv]);
    assert!(metric(&text, "accuracy") >= 0.99);
    assert_eq!(metric(&text, "n"), 200.0);
    let pred = ok(&["predict", "--model", s(&model), "--csv", &csv]);
    let mut lines = pred.lines();
    assert_eq!(lines.next(), Some("probability"));
    let probs: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(probs.len(), 200);
    assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
}

#[test]
fn stratified_ovr_has_46_cells_per_classifier() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ovr.json");
    let mut args: Vec<String> = vec!["train-ovr".into()];
    args.extend(desk_train());
    args.extend(["--stratified", "10,4", "--epochs", "0", "--quiet", "--out", s(&out)].map(String::from));
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let text = ok(&argv);
    assert_eq!(metric(&text, "parameters"), 722_200.0);
    let Model::Ovr(m) = load_model(&out).unwrap() else { panic!("single") };
    assert_eq!(m.classes(), &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
    assert!(m.networks().iter().all(|n| n.cells() == 46));
}

#[test]
fn ovr_predict_columns() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "x.csv", "xor-blobs", 120, 2, 0.3, 6);
    let model = dir.path().join("m.json");
    ok(&["train-ovr", "--csv", &csv, "--cells", "4", "--epochs", "5", "--quiet", "--out", s(&model)]);
    let pred = ok(&["predict", "--model", s(&model), "--csv", &csv]);
    assert_eq!(pred.lines().next(), Some("label,p_0,p_1"));
    assert_eq!(pred.lines().count(), 121);
}

#[test]
fn grid_one_by_one() {
    let dir = TempDir::new().unwrap();
    let train = synth_csv(&dir, "a.csv", "xor-blobs", 100, 2, 0.5, 1);
    let test = synth_csv(&dir, "b.csv", "xor-blobs", 100, 2, 0.5, 2);
    let table = ok(&[
        "grid", "--csv", &train, "--test-csv", &test, "--cells", "4", "--epochs", "3", "--quiet",
        "--lambda-alphas", "0.1", "--lambda-betas", "0.001",
    ]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "lambda_alpha\\lambda_beta,0.001");
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "0.1");
    assert!((0.0..=1.0).contains(&cells[1].parse::<f64>().unwrap()));
}

#[test]
fn grid_cells_match_standalone_runs_and_finish_quickly() {
    let dir = TempDir::new().unwrap();
    let train = synth_csv(&dir, "a.csv", "xor-blobs", 100, 2, 0.7, 1);
    let test = synth_csv(&dir, "b.csv", "xor-blobs", 100, 2, 0.7, 2);
    let common = ["--cells", "4", "--epochs", "10", "--seed", "3", "--deterministic", "--quiet"];
    let start = Instant::now();
    let mut args = vec!["grid", "--csv", &train, "--test-csv", &test];
    args.extend(common);
    args.extend(["--lambda-alphas", "0.25,0.05", "--lambda-betas", "0.00005,0.0000005,0"]);
    let table = ok(&args);
    assert!(start.elapsed().as_secs() < 60);
    let rows: Vec<Vec<String>> = table
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].len(), 4);
    for row in &rows[1..] {
        for (c, cell) in row[1..].iter().enumerate() {
            let model = dir.path().join("m.json");
            let mut args = vec!["train-ovr", "--csv", &train, "--lambda-alpha", &row[0], "--lambda-beta", &rows[0][c + 1]];
            args.extend(common);
            args.extend(["--out", s(&model)]);
            ok(&args);
            let eval = ok(&["evaluate", "--model", s(&model), "--csv", &test]);
            assert_eq!(eval.trim_end(), format!("accuracy={cell} n=100"));
        }
    }
}

#[test]
fn grid_failed_cell_records_nan() {
    let dir = TempDir::new().unwrap();
    let train = synth_csv(&dir, "a.csv", "xor-blobs", 60, 2, 0.5, 1);
    let test = synth_csv(&dir, "b.csv", "xor-blobs", 60, 3, 0.5, 2);
    let table = ok(&[
        "grid", "--csv", &train, "--test-csv", &test, "--cells", "2", "--epochs", "1", "--quiet",
        "--lambda-alphas", "0.1,0.2", "--lambda-betas", "0",
    ]);
    assert_eq!(table, "lambda_alpha\\lambda_beta,0\n0.1,NaN\n0.2,NaN\n");
}

#[test]
fn gradcheck_command() {
    let text = ok(&["gradcheck", "--trials", "20", "--seed", "5"]);
    for key in ["betas", "centers", "alphas"] {
        assert!(metric(&text, key) < 1e-4, "{text}");
    }
    assert!(metric(&text, "checked") > 0.0);
    let vacuous = ok(&["gradcheck", "--trials", "0"]);
    assert_eq!(metric(&vacuous, "checked"), 0.0);
}

#[test]
fn gradcheck_catches_forced_bug() {
    let err = gradcheck_with(5, 1, |net, batch, hp| {
        let mut g = objective::gradient(net, batch, hp)?;
        for v in &mut g.d_centers {
            *v *= 1.01;
        }
        Ok(g)
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("gradient check failed"));
}

#[test]
fn threads_flag_accepted() {
    let dir = TempDir::new().unwrap();
    let csv = synth_csv(&dir, "d.csv", "linear", 40, 2, 0.0, 1);
    let o = cellnet(&["train", "--csv", &csv, "--threads", "2", "--epochs", "1", "--cells", "2", "--quiet", "--out", s(&dir.path().join("m.json"))]);
    assert!(o.status.success());
    let o = cellnet(&["train", "--csv", &csv, "--threads", "0", "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(1));
}
