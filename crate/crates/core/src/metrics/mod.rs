//! Reconstruction, generation and ground-state metrics.

pub mod coverage;
pub mod hungarian;
pub mod matcher;
pub mod validity;
pub mod wasserstein;

use serde::{Deserialize, Serialize};

pub use coverage::{coverage, fingerprint, CoverageThresholds, Fingerprint};
pub use hungarian::hungarian;
pub use matcher::{match_rate_and_rms, structure_match, MatchCriteria};
pub use validity::{charge_balance, min_pair_distance, structure_valid, validity, ChargeBalance, Validity};
pub use wasserstein::wasserstein_1d;

use crate::elements::{atomic_mass, AMU_GRAMS};
use crate::error::{Error, Result};
use crate::lattice::CrystalStructure;

/// Mass density in g/cm³.
pub fn density(structure: &CrystalStructure) -> Result<f64> {
    let mut mass = 0.0;
    for &z in structure.atomic_numbers() {
        mass += atomic_mass(z).ok_or_else(|| Error::InvalidInput(format!("no mass for Z={z}")))?;
    }
    Ok(mass * AMU_GRAMS / (structure.lattice().volume() * 1e-24))
}

pub fn n_elements(structure: &CrystalStructure) -> usize {
    structure.composition().len()
}

/// Flat metrics document; metrics that were not computed are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub match_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_delta_rms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity_struct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity_comp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wasserstein_rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wasserstein_nelem: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_v_rms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e_rms: Option<f64>,
}

/// Match rate and `⟨δ_rms⟩` for index-aligned reconstructions.
pub fn reconstruction_report(
    generated: &[CrystalStructure],
    reference: &[CrystalStructure],
    criteria: &MatchCriteria,
) -> Result<MetricsReport> {
    if generated.len() != reference.len() {
        return Err(Error::InvalidInput(format!(
            "{} generated vs {} reference structures",
            generated.len(),
            reference.len()
        )));
    }
    let pairs: Vec<_> = reference.iter().cloned().zip(generated.iter().cloned()).collect();
    let (rate, rms) = match_rate_and_rms(&pairs, criteria)?;
    Ok(MetricsReport { match_rate: Some(rate), mean_delta_rms: rms, ..Default::default() })
}

/// Validity, coverage and property statistics of a generated set.
pub fn generation_report(
    generated: &[CrystalStructure],
    reference: &[CrystalStructure],
    thresholds: &CoverageThresholds,
) -> Result<MetricsReport> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("generation metrics need nonempty sets".into()));
    }
    let mut n_struct = 0;
    let mut n_comp = 0;
    for s in generated {
        let v = validity(s)?;
        n_struct += v.structural as usize;
        n_comp += v.comp_valid() as usize;
    }
    let pct = |k: usize| 100.0 * k as f64 / generated.len() as f64;
    let (cov_r, cov_p) = coverage(generated, reference, thresholds)?;
    let rho = |set: &[CrystalStructure]| set.iter().map(density).collect::<Result<Vec<f64>>>();
    let nelem = |set: &[CrystalStructure]| set.iter().map(|s| n_elements(s) as f64).collect::<Vec<_>>();
    Ok(MetricsReport {
        validity_struct: Some(pct(n_struct)),
        validity_comp: Some(pct(n_comp)),
        cov_r: Some(cov_r),
        cov_p: Some(cov_p),
        wasserstein_rho: Some(wasserstein_1d(&rho(generated)?, &rho(reference)?)?),
        wasserstein_nelem: Some(wasserstein_1d(&nelem(generated), &nelem(reference))?),
        ..Default::default()
    })
}

/// Matching against relaxed structures plus RMS volume-per-atom (Å³/atom)
/// and energy-per-atom (meV/atom) differences. Energies are in eV/atom.
pub fn ground_state_compare(
    generated: &[CrystalStructure],
    relaxed: &[CrystalStructure],
    energies_gen: &[f64],
    energies_rel: &[f64],
    criteria: &MatchCriteria,
) -> Result<MetricsReport> {
    let n = generated.len();
    if n == 0 || relaxed.len() != n || energies_gen.len() != n || energies_rel.len() != n {
        return Err(Error::InvalidInput("ground-state inputs must be nonempty and equally long".into()));
    }
    let mut report = reconstruction_report(generated, relaxed, criteria)?;
    let per_atom = |s: &CrystalStructure| s.lattice().volume() / s.num_atoms() as f64;
    let dv = generated.iter().zip(relaxed).map(|(g, r)| (per_atom(g) - per_atom(r)).powi(2)).sum::<f64>() / n as f64;
    let de = energies_gen.iter().zip(energies_rel).map(|(g, r)| (1000.0 * (g - r)).powi(2)).sum::<f64>() / n as f64;
    report.delta_v_rms = Some(dv.sqrt());
    report.delta_e_rms = Some(de.sqrt());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn diamond() -> CrystalStructure {
        let f = vec![
            [0.0, 0.0, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
            [0.25, 0.25, 0.25],
            [0.25, 0.75, 0.75],
            [0.75, 0.25, 0.75],
            [0.75, 0.75, 0.25],
        ];
        CrystalStructure::new(Lattice::cubic(3.567).unwrap(), f, vec![6; 8]).unwrap()
    }

    #[test]
    fn diamond_density() {
        // 8 · 12.011 · 1.66053906660e-24 g / (3.567e-8 cm)³
        let expected = 8.0 * 12.011 * 1.66053906660e-24 / (3.567e-8f64).powi(3);
        let rho = density(&diamond()).unwrap();
        assert!((rho - expected).abs() < 1e-12);
        assert!((rho - 3.515).abs() < 5e-3);
        assert_eq!(n_elements(&diamond()), 1);
    }

    #[test]
    fn report_field_names() {
        let r = MetricsReport { match_rate: Some(100.0), mean_delta_rms: None, ..Default::default() };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"match_rate":100.0}"#);
    }

    #[test]
    fn ground_state_offsets() {
        let s = vec![diamond(), diamond()];
        let r = ground_state_compare(&s, &s, &[-1.0, -2.0], &[-1.1, -2.1], &MatchCriteria::default()).unwrap();
        assert_eq!(r.match_rate, Some(100.0));
        assert!(r.mean_delta_rms.unwrap() < 1e-12);
        assert_eq!(r.delta_v_rms, Some(0.0));
        assert!((r.delta_e_rms.unwrap() - 100.0).abs() < 1e-9);
    }
}
