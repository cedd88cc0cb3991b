use std::path::Path;
use std::process::{Command, Output};

use dpcdvae::io::write_structures;
use dpcdvae::synthetic::{dataset, Perturbation};

fn dpcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpcv")).args(args).env_remove("DPCV_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_data(dir: &Path, n: usize) -> String {
    let path = dir.join("data.jsonl");
    write_structures(&path, &dataset(n, &Perturbation::default(), 31).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&dpcv(&[])), 1);
    assert_eq!(code(&dpcv(&["frobnicate"])), 1);
    assert_eq!(code(&dpcv(&["generate", "--count", "3"])), 1);
    assert_eq!(code(&dpcv(&["--help"])), 0);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let o = dpcv(&["train", "--data", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{}\n").unwrap();
    let o = dpcv(&["evaluate", "--mode", "recon", "--generated", bad.to_str().unwrap(), "--reference", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 4);
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"train": {"epochz": 3}}"#).unwrap();
    let o = dpcv(&["train", "--config", cfg.to_str().unwrap(), "--data", &data, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 4);
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"model": {"hidden_dim": 8, "latent_dim": 4, "num_layers": 1}, "train": {"epochs": 5, "learning_rate": 1e300}}"#).unwrap();
    let o = dpcv(&["train", "--config", cfg.to_str().unwrap(), "--data", &data, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grad norm"));
}

#[test]
fn schedule_dump_prints_one_row_per_step() {
    let o = dpcv(&["schedule-dump", "--T", "10"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,alpha,alpha_bar,sigma,sigma_prime");
    assert_eq!(lines.len(), 11);
    let last: Vec<f64> = lines[10].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 10.0);
    assert!((last[2] - 1.0 / (1.0 + 10f64.exp())).abs() < 1e-15);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[3], 0.0);
}

#[test]
fn evaluating_a_set_against_itself_matches_everything() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 12);
    let o = dpcv(&["evaluate", "--mode", "recon", "--generated", &data, "--reference", &data]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["match_rate"], 100.0);
    assert!(report["mean_delta_rms"].as_f64().unwrap() < 1e-9);
    assert!(report.get("cov_r").is_none());

    let o = dpcv(&["evaluate", "--mode", "gen", "--generated", &data, "--reference", &data]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["cov_r"], 100.0);
    assert_eq!(report["cov_p"], 100.0);
    assert_eq!(report["validity_struct"], 100.0);
    assert_eq!(report["wasserstein_rho"], 0.0);
}

#[test]
fn seed_override_changes_generation() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 8);
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"schedule": {"steps": 20}, "model": {"hidden_dim": 8, "latent_dim": 4, "num_layers": 1}, "train": {"epochs": 60, "learning_rate": 0.005}}"#).unwrap();
    let out = dir.path().join("run");
    assert_eq!(code(&dpcv(&["train", "--config", cfg.to_str().unwrap(), "--data", &data, "--out", out.to_str().unwrap()])), 0);
    let csv = std::fs::read_to_string(out.join("loss.csv")).unwrap();
    assert!(csv.starts_with("epoch,L_total,L_simple,CE,KLD,latt,comp,N_a\n"));
    assert_eq!(csv.lines().count(), 61);

    let ckpt = out.join("model.dpcv");
    let gen = |name: &str, seed: Option<&str>| {
        let path = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_dpcv"));
        cmd.args(["generate", "--ckpt", ckpt.to_str().unwrap(), "--count", "3", "--out", path.to_str().unwrap()]);
        match seed {
            Some(s) => cmd.env("DPCV_SEED", s),
            None => cmd.env_remove("DPCV_SEED"),
        };
        assert!(cmd.status().unwrap().success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(gen("a.jsonl", None), gen("b.jsonl", None));
    assert_ne!(gen("a.jsonl", None), gen("c.jsonl", Some("5")));
}
