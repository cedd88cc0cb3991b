//! Tolerance-based structure comparison.
//!
//! Both cells are Niggli-reduced. Candidate bases of the second lattice are
//! built from short lattice vectors whose lengths and mutual angles agree
//! with the first; for each basis the structures are put on the averaged
//! lattice, aligned by translating an atom of the rarest species onto the
//! reference, and paired per species by minimum-cost assignment.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::hungarian::hungarian;
use crate::error::{Error, Result};
use crate::lattice::{wrap_frac, CrystalStructure, Frac, Lattice, LatticeParams, MinImageFrame};
use crate::model::preprocess;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchCriteria {
    /// Site tolerance in units of `(V/N)^{1/3}`.
    pub stol: f64,
    /// Angle tolerance in degrees.
    pub angle_tol: f64,
    /// Fractional length tolerance.
    pub ltol: f64,
}

impl Default for MatchCriteria {
    fn default() -> Self {
        Self { stol: 0.5, angle_tol: 10.0, ltol: 0.3 }
    }
}

impl MatchCriteria {
    pub fn validate(&self) -> Result<()> {
        if [self.stol, self.angle_tol, self.ltol].iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(())
        } else {
            Err(Error::Config("match criteria must be positive".into()))
        }
    }
}

/// Integer coefficient range used to enumerate candidate lattice vectors.
const VECTOR_RANGE: i32 = 2;

struct Candidate {
    coeffs: [i32; 3],
    vector: [f64; 3],
    length: f64,
}

fn angle_deg(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}

fn det3(m: &[[i32; 3]; 3]) -> i64 {
    let m = m.map(|r| r.map(i64::from));
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Unimodular bases of `cand` (rows are coefficient vectors over its rows)
/// whose lengths and angles fit those of `base`.
fn lattice_mappings(base: &Lattice, cand: &Lattice, c: &MatchCriteria) -> Vec<[[i32; 3]; 3]> {
    let bp = base.params();
    let lengths = bp.lengths();
    let angles = bp.angles();
    let rows = cand.rows();
    let mut vectors = Vec::new();
    for i in -VECTOR_RANGE..=VECTOR_RANGE {
        for j in -VECTOR_RANGE..=VECTOR_RANGE {
            for k in -VECTOR_RANGE..=VECTOR_RANGE {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                let v: [f64; 3] =
                    std::array::from_fn(|d| i as f64 * rows[0][d] + j as f64 * rows[1][d] + k as f64 * rows[2][d]);
                let length = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                vectors.push(Candidate { coeffs: [i, j, k], vector: v, length });
            }
        }
    }
    let slot = |s: usize| -> Vec<&Candidate> {
        vectors.iter().filter(|v| (v.length - lengths[s]).abs() <= c.ltol * lengths[s]).collect()
    };
    let (s0, s1, s2) = (slot(0), slot(1), slot(2));
    let mut out = Vec::new();
    // angles: alpha between b,c; beta between a,c; gamma between a,b
    for a in &s0 {
        for b in &s1 {
            if (angle_deg(&a.vector, &b.vector) - angles[2]).abs() > c.angle_tol {
                continue;
            }
            for cc in &s2 {
                if (angle_deg(&b.vector, &cc.vector) - angles[0]).abs() > c.angle_tol
                    || (angle_deg(&a.vector, &cc.vector) - angles[1]).abs() > c.angle_tol
                {
                    continue;
                }
                let u = [a.coeffs, b.coeffs, cc.coeffs];
                if det3(&u) == 1 {
                    out.push(u);
                }
            }
        }
    }
    out
}

fn apply_frac(f: &Frac, m: &Matrix3<f64>) -> Frac {
    std::array::from_fn(|j| f[0] * m[(0, j)] + f[1] * m[(1, j)] + f[2] * m[(2, j)])
}

fn average_lattice(a: &LatticeParams, b: &LatticeParams) -> Result<Lattice> {
    let x = a.as_array();
    let y = b.as_array();
    let m: [f64; 6] = std::array::from_fn(|i| 0.5 * (x[i] + y[i]));
    Lattice::from_params(LatticeParams::new(m[0], m[1], m[2], m[3], m[4], m[5]))
}

/// Best normalized RMS over atom correspondences for fixed bases, or `None`
/// when no correspondence keeps every site within `stol`.
#[allow(clippy::too_many_arguments)]
fn match_sites(
    base: &[Frac],
    base_z: &[u8],
    cand: &[Frac],
    cand_z: &[u8],
    lattice: &Lattice,
    frame: &MinImageFrame,
    norm: f64,
    stol: f64,
) -> Option<f64> {
    let n = base.len();
    let mut species: Vec<u8> = base_z.to_vec();
    species.sort_unstable();
    species.dedup();
    let count = |z: u8| base_z.iter().filter(|&&x| x == z).count();
    let anchor_z = *species.iter().min_by_key(|&&z| (count(z), z)).expect("nonempty");
    let anchor = base_z.iter().position(|&z| z == anchor_z).expect("present");

    let groups: Vec<(Vec<usize>, Vec<usize>)> = species
        .iter()
        .map(|&z| {
            (
                (0..n).filter(|&i| base_z[i] == z).collect(),
                (0..n).filter(|&i| cand_z[i] == z).collect(),
            )
        })
        .collect();

    let mut best: Option<f64> = None;
    for j in (0..n).filter(|&j| cand_z[j] == anchor_z) {
        let shift: Frac = std::array::from_fn(|k| base[anchor][k] - cand[j][k]);
        let shifted: Vec<Frac> = cand.iter().map(|f| wrap_frac(&std::array::from_fn(|k| f[k] + shift[k]))).collect();

        // pairing, then remove the mean residual translation and re-pair
        let pairing = assign(base, &shifted, &groups, frame);
        let mut mean = [0.0; 3];
        for &(b, c) in &pairing {
            let d = frac_delta(&shifted[c], &base[b], lattice, frame);
            for k in 0..3 {
                mean[k] += d[k] / n as f64;
            }
        }
        let refined: Vec<Frac> =
            shifted.iter().map(|f| wrap_frac(&std::array::from_fn(|k| f[k] - mean[k]))).collect();
        let refined_pairing = assign(base, &refined, &groups, frame);
        let mut evaluate = |p: &[(usize, usize)], pos: &[Frac]| {
            let d: Vec<f64> = p.iter().map(|&(b, c)| frame.distance(&base[b], &pos[c]) / norm).collect();
            let max = d.iter().cloned().fold(0.0, f64::max);
            if max <= stol {
                let rms = (d.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
                best = Some(best.map_or(rms, |b: f64| b.min(rms)));
            }
        };
        evaluate(&pairing, &shifted);
        evaluate(&refined_pairing, &refined);
    }
    best
}

/// Minimum-image fractional displacement `to - from` in the frame's cell.
fn frac_delta(from: &Frac, to: &Frac, lattice: &Lattice, frame: &MinImageFrame) -> Frac {
    lattice.to_fractional(&frame.vector(to, from))
}

fn assign(base: &[Frac], cand: &[Frac], groups: &[(Vec<usize>, Vec<usize>)], frame: &MinImageFrame) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(base.len());
    for (bi, ci) in groups {
        let cost: Vec<Vec<f64>> = bi.iter().map(|&b| ci.iter().map(|&c| frame.distance(&base[b], &cand[c])).collect()).collect();
        for (r, c) in hungarian(&cost).into_iter().enumerate() {
            out.push((bi[r], ci[c]));
        }
    }
    out
}

/// Normalized RMS site distance when `candidate` matches `base`, else `None`.
pub fn structure_match(base: &CrystalStructure, candidate: &CrystalStructure, criteria: &MatchCriteria) -> Result<Option<f64>> {
    criteria.validate()?;
    if base.composition() != candidate.composition() {
        return Ok(None);
    }
    let b = preprocess(base)?;
    let c = preprocess(candidate)?;
    let n = b.num_atoms();
    let bp = b.lattice().params();
    let mut best: Option<f64> = None;
    for u in lattice_mappings(b.lattice(), c.lattice(), criteria) {
        let um = Matrix3::from_fn(|i, j| u[i][j] as f64);
        let new_rows = um * c.lattice().matrix();
        let Ok(cl) = Lattice::from_matrix(std::array::from_fn(|i| std::array::from_fn(|j| new_rows[(i, j)]))) else {
            continue;
        };
        let inv = um.try_inverse().expect("unimodular");
        let cf: Vec<Frac> = c.frac_coords().iter().map(|f| wrap_frac(&apply_frac(f, &inv))).collect();
        let avg = average_lattice(&bp, &cl.params())?;
        let norm = (avg.volume() / n as f64).cbrt();
        let frame = MinImageFrame::new(&avg)?;
        if let Some(rms) = match_sites(b.frac_coords(), b.atomic_numbers(), &cf, c.atomic_numbers(), &avg, &frame, norm, criteria.stol) {
            best = Some(best.map_or(rms, |x: f64| x.min(rms)));
        }
    }
    Ok(best)
}

/// `(match rate %, mean normalized RMS over matched pairs)`.
pub fn match_rate_and_rms(pairs: &[(CrystalStructure, CrystalStructure)], criteria: &MatchCriteria) -> Result<(f64, Option<f64>)> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no structure pairs to compare".into()));
    }
    use rayon::prelude::*;
    let results: Vec<Result<Option<f64>>> = pairs.par_iter().map(|(b, c)| structure_match(b, c, criteria)).collect();
    let mut matched = Vec::new();
    for r in results {
        if let Some(d) = r? {
            matched.push(d);
        }
    }
    let rate = 100.0 * matched.len() as f64 / pairs.len() as f64;
    let mean = (!matched.is_empty()).then(|| matched.iter().sum::<f64>() / matched.len() as f64);
    Ok((rate, mean))
}
