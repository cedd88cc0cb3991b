use std::path::PathBuf;

use dpcdvae::io::{checkpoint, read_cif_p1, read_jsonl, read_structures, write_structures, RunConfig, CHECKPOINT_VERSION};
use dpcdvae::metrics::density;
use dpcdvae::model::DpCdvae;
use dpcdvae::synthetic::{dataset, Perturbation};
use dpcdvae::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn diamond_cif() {
    let s = read_cif_p1(&fixture("diamond_p1.cif")).unwrap();
    assert_eq!(s.num_atoms(), 8);
    let p = s.lattice().params();
    assert_eq!((p.a, p.b, p.c), (5.431, 5.431, 5.431));
    assert!((s.lattice().volume() - 5.431f64.powi(3)).abs() < 1e-9);
    assert!(s.atomic_numbers().iter().all(|&z| z == 14));
    // 8 · 28.0855 u / 160.2 Å³
    assert!((density(&s).unwrap() - 2.329).abs() < 2e-3);
}

#[test]
fn cif_with_symmetry_operations_is_rejected() {
    let err = read_cif_p1(&fixture("four_symops.cif")).unwrap_err();
    assert!(matches!(err, Error::UnsupportedSymmetry(_)), "{err}");
}

#[test]
fn cif_with_unknown_element_is_a_parse_error() {
    let err = read_cif_p1(&fixture("unknown_element.cif")).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }), "{err}");
    assert!(err.to_string().contains("Xx"));
}

#[test]
fn jsonl_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let data = dataset(20, &Perturbation::default(), 3).unwrap();
    write_structures(&path, &data).unwrap();
    let back = read_structures(&path).unwrap();
    assert_eq!(back, data);
}

#[test]
fn jsonl_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let good = r#"{"lattice":[[3.57,0,0],[0,3.57,0],[0,0,3.57]],"frac_coords":[[0,0,0]],"atomic_numbers":[6]}"#;
    std::fs::write(&path, format!("{good}\n{good}\n{{\"lattice\": oops}}\n")).unwrap();
    let err = read_jsonl(&path).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    assert!(err.to_string().contains(":3:"));

    std::fs::write(&path, format!("{good}\n")).unwrap();
    let one = read_structures(&path).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].num_atoms(), 1);

    let edge = r#"{"lattice":[[3,0,0],[0,3,0],[0,0,3]],"frac_coords":[[1.0,0.5,0.5]],"atomic_numbers":[11]}"#;
    std::fs::write(&path, format!("{good}\n{edge}\n")).unwrap();
    assert!(matches!(read_jsonl(&path).unwrap_err(), Error::Parse { line: 2, .. }));

    let extra = r#"{"lattice":[[3,0,0],[0,3,0],[0,0,3]],"frac_coords":[[0,0,0]],"atomic_numbers":[11],"spin":1}"#;
    std::fs::write(&path, format!("{extra}\n")).unwrap();
    assert!(read_jsonl(&path).is_err());

    std::fs::write(&path, "\n\n").unwrap();
    assert!(read_jsonl(&path).is_err());
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let data = dataset(4, &Perturbation::default(), 1).unwrap();
    let mut cfg = RunConfig { seed: 99, ..Default::default() };
    cfg.model.hidden_dim = 16;
    cfg.model.fit_to(&data);
    let model = DpCdvae::new(cfg.model.clone(), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.dpcv");
    checkpoint::save(&path, &cfg, model.params()).unwrap();
    let (cfg2, params) = checkpoint::load(&path).unwrap();
    assert_eq!(cfg2, cfg);
    assert_eq!(params.len(), model.params().len());
    for ((_, na, a), (_, nb, b)) in model.params().iter().zip(params.iter()) {
        assert_eq!(na, nb);
        assert_eq!(a.shape(), b.shape());
        assert!(a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_eq!(checkpoint::encode(&cfg2, &params).unwrap(), std::fs::read(&path).unwrap());
}

#[test]
fn checkpoint_version_mismatch_is_explained() {
    let cfg = RunConfig::default();
    let mut bytes = checkpoint::encode(&cfg, &Default::default()).unwrap();
    bytes[4..8].copy_from_slice(&(CHECKPOINT_VERSION + 1).to_le_bytes());
    let err = checkpoint::decode(&bytes).unwrap_err().to_string();
    assert!(err.contains("version 2") && err.contains("expected 1"), "{err}");

    let mut truncated = checkpoint::encode(&cfg, &Default::default()).unwrap();
    truncated.pop();
    assert!(checkpoint::decode(&truncated).is_err());
    assert!(checkpoint::decode(b"NOPE").is_err());
}

#[test]
fn config_rejects_unknown_keys() {
    assert!(RunConfig::from_json(r#"{"seed": 1, "model": {"hidden": 3}}"#).is_err());
    assert!(RunConfig::from_json(r#"{"sampler": {"variant": "sideways"}}"#).is_err());
    let cfg = RunConfig::from_json(r#"{"sampler": {"variant": "standard"}, "train": {"epochs": 3}}"#).unwrap();
    assert_eq!(cfg.train.epochs, 3);
    assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
}
