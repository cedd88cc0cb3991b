//! Recall/precision coverage with element-fraction and radial-distribution
//! fingerprints.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::CrystalStructure;

pub const RDF_MAX: f64 = 10.0;
pub const RDF_BIN: f64 = 0.1;
pub const RDF_BINS: usize = 100;
/// Gaussian smearing width (Å).
pub const RDF_SMEAR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageThresholds {
    /// Euclidean distance between element-fraction vectors.
    pub composition: f64,
    /// RMS difference between radial distribution functions.
    pub structure: f64,
}

impl Default for CoverageThresholds {
    fn default() -> Self {
        Self { composition: 0.1, structure: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub composition: BTreeMap<u8, f64>,
    pub rdf: Vec<f64>,
}

/// All periodic pair distances in `(0, r_max)` with each unordered pair
/// counted once from every atom's side.
pub fn pair_distances(structure: &CrystalStructure, r_max: f64) -> Vec<f64> {
    let lattice = structure.lattice();
    let inv = lattice.inverse();
    let reach: Vec<i32> = (0..3).map(|k| (r_max * inv.column(k).norm()).ceil() as i32 + 1).collect();
    let cart = structure.cartesian();
    let rows = [lattice.vector(0), lattice.vector(1), lattice.vector(2)];
    let mut out = Vec::new();
    for i in 0..cart.len() {
        for j in 0..cart.len() {
            for a in -reach[0]..=reach[0] {
                for b in -reach[1]..=reach[1] {
                    for c in -reach[2]..=reach[2] {
                        let v = cart[j] - cart[i] + rows[0] * a as f64 + rows[1] * b as f64 + rows[2] * c as f64;
                        let d = v.norm();
                        if d > 1e-8 && d < r_max {
                            out.push(d);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Gaussian-smeared radial distribution function normalized by the number
/// density, so an ideal gas tends to 1.
pub fn radial_distribution(structure: &CrystalStructure) -> Vec<f64> {
    let n = structure.num_atoms() as f64;
    let rho = n / structure.lattice().volume();
    let mut g = vec![0.0; RDF_BINS];
    let norm = 1.0 / (RDF_SMEAR * (2.0 * PI).sqrt());
    for d in pair_distances(structure, RDF_MAX + 4.0 * RDF_SMEAR) {
        for (k, gk) in g.iter_mut().enumerate() {
            let r = (k as f64 + 0.5) * RDF_BIN;
            let x = (r - d) / RDF_SMEAR;
            *gk += norm * (-0.5 * x * x).exp();
        }
    }
    for (k, gk) in g.iter_mut().enumerate() {
        let r = (k as f64 + 0.5) * RDF_BIN;
        *gk /= n * rho * 4.0 * PI * r * r;
    }
    g
}

pub fn fingerprint(structure: &CrystalStructure) -> Fingerprint {
    let n = structure.num_atoms() as f64;
    let composition = structure.composition().into_iter().map(|(z, c)| (z, c as f64 / n)).collect();
    Fingerprint { composition, rdf: radial_distribution(structure) }
}

pub fn composition_distance(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let keys: std::collections::BTreeSet<u8> = a.composition.keys().chain(b.composition.keys()).copied().collect();
    keys.iter()
        .map(|z| {
            let d = a.composition.get(z).unwrap_or(&0.0) - b.composition.get(z).unwrap_or(&0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn structure_distance(a: &Fingerprint, b: &Fingerprint) -> f64 {
    (a.rdf.iter().zip(&b.rdf).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.rdf.len() as f64).sqrt()
}

fn covered_fraction(targets: &[Fingerprint], pool: &[Fingerprint], t: &CoverageThresholds) -> f64 {
    let hits = targets
        .par_iter()
        .filter(|r| {
            pool.iter()
                .any(|g| composition_distance(r, g) <= t.composition && structure_distance(r, g) <= t.structure)
        })
        .count();
    100.0 * hits as f64 / targets.len() as f64
}

/// `(COV-R, COV-P)` in percent.
pub fn coverage(generated: &[CrystalStructure], reference: &[CrystalStructure], t: &CoverageThresholds) -> Result<(f64, f64)> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("coverage needs nonempty structure lists".into()));
    }
    if t.composition.is_nan() || t.structure.is_nan() || t.composition < 0.0 || t.structure < 0.0 {
        return Err(Error::Config("coverage thresholds must be >= 0".into()));
    }
    let g: Vec<Fingerprint> = generated.par_iter().map(fingerprint).collect();
    let r: Vec<Fingerprint> = reference.par_iter().map(fingerprint).collect();
    Ok((covered_fraction(&r, &g, t), covered_fraction(&g, &r, t)))
}
