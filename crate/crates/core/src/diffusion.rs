//! Forward perturbation and reverse sampling of fractional coordinates, plus
//! atom-type perturbation.
//!
//! All randomness comes from a caller-supplied generator (or explicit noise
//! arrays), so identical seeds reproduce identical trajectories.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{wrap_frac, CrystalStructure, Frac, Lattice};
use crate::schedule::NoiseSchedule;

/// Which reverse update drives sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReverseVariant {
    /// Plain DDPM update on unwrapped coordinates.
    Standard,
    /// Update from the wrapped coordinates with `ᾱ_t` in the leading factor.
    #[default]
    Periodic,
}

/// How the initial atom types are drawn from the decoded composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialTypes {
    /// Each atom drawn independently from the categorical composition.
    #[default]
    Categorical,
    /// Every atom gets the most probable type.
    Argmax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionState {
    pub t: usize,
    /// Unwrapped coordinates.
    pub r: Vec<Frac>,
    /// `wrap_pi(r)`.
    pub r_f: Vec<Frac>,
}

fn check_shapes(a: &[Frac], b: &[Frac], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{what}: {} rows vs {} rows", a.len(), b.len())));
    }
    Ok(())
}

/// `r_t = √ᾱ_t r_0 + √(1-ᾱ_t) ε`, wrapped into the cell.
pub fn forward_perturb(r0: &[Frac], t: usize, schedule: &NoiseSchedule, eps: &[Frac]) -> Result<DiffusionState> {
    schedule.check_step(t)?;
    check_shapes(r0, eps, "forward_perturb noise")?;
    let ab = schedule.alpha_bar(t);
    let (s, n) = (ab.sqrt(), (1.0 - ab).sqrt());
    let r: Vec<Frac> = r0
        .iter()
        .zip(eps)
        .map(|(x, e)| [s * x[0] + n * e[0], s * x[1] + n * e[1], s * x[2] + n * e[2]])
        .collect();
    let r_f = r.iter().map(wrap_frac).collect();
    Ok(DiffusionState { t, r, r_f })
}

/// `r_{t-1} = (r_t - (1-α_t)/√(1-ᾱ_t) ε_θ)/√α_t + σ_t ε′`.
pub fn reverse_step_standard(
    r_t: &[Frac],
    eps_theta: &[Frac],
    t: usize,
    schedule: &NoiseSchedule,
    noise: &[Frac],
) -> Result<Vec<Frac>> {
    schedule.check_step(t)?;
    check_shapes(r_t, eps_theta, "reverse_step_standard eps_theta")?;
    check_shapes(r_t, noise, "reverse_step_standard noise")?;
    let alpha = schedule.alpha(t);
    let coef = (1.0 - alpha) / (1.0 - schedule.alpha_bar(t)).sqrt();
    let scale = 1.0 / alpha.sqrt();
    let sigma = schedule.sigma(t);
    Ok(r_t
        .iter()
        .zip(eps_theta)
        .zip(noise)
        .map(|((r, e), z)| std::array::from_fn(|k| scale * (r[k] - coef * e[k]) + sigma * z[k]))
        .collect())
}

/// `r_{t-1} = (r_f_t - √(1-ᾱ_t) ε_θ)/√ᾱ_t + σ_t ε′`; returns `(r_{t-1}, wrap_pi(r_{t-1}))`.
pub fn reverse_step_periodic(
    r_f_t: &[Frac],
    eps_theta: &[Frac],
    t: usize,
    schedule: &NoiseSchedule,
    noise: &[Frac],
) -> Result<(Vec<Frac>, Vec<Frac>)> {
    schedule.check_step(t)?;
    check_shapes(r_f_t, eps_theta, "reverse_step_periodic eps_theta")?;
    check_shapes(r_f_t, noise, "reverse_step_periodic noise")?;
    let ab = schedule.alpha_bar(t);
    let (scale, coef) = (1.0 / ab.sqrt(), (1.0 - ab).sqrt());
    let sigma = schedule.sigma(t);
    let r: Vec<Frac> = r_f_t
        .iter()
        .zip(eps_theta)
        .zip(noise)
        .map(|((r, e), z)| std::array::from_fn(|k| scale * (r[k] - coef * e[k]) + sigma * z[k]))
        .collect();
    let r_f = r.iter().map(wrap_frac).collect();
    Ok((r, r_f))
}

pub fn one_hot(indices: &[usize], k: usize) -> Vec<Vec<f64>> {
    indices
        .iter()
        .map(|&i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Categorical draw from `probs` with one uniform variate.
pub fn sample_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Per-atom type distribution `softmax(A_row + σ′ A_z)`.
pub fn type_probabilities(a_row: &[f64], a_z: &[f64], sigma_prime: f64) -> Vec<f64> {
    let logits: Vec<f64> = a_row.iter().zip(a_z).map(|(a, p)| a + sigma_prime * p).collect();
    softmax(&logits)
}

/// Draws perturbed types `Z_t` for every atom.
pub fn perturb_types<R: Rng + ?Sized>(
    a: &[Vec<f64>],
    a_z: &[f64],
    t: usize,
    schedule: &NoiseSchedule,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let sp = schedule.sigma_prime_at(t)?;
    validate_composition(a_z)?;
    a.iter()
        .map(|row| {
            if row.len() != a_z.len() {
                return Err(Error::Shape(format!("type row has {} classes, composition {}", row.len(), a_z.len())));
            }
            let u: f64 = rng.random();
            Ok(sample_categorical(&type_probabilities(row, a_z, sp), u))
        })
        .collect()
}

fn validate_composition(a_z: &[f64]) -> Result<()> {
    let sum: f64 = a_z.iter().sum();
    if a_z.is_empty() || a_z.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("composition {a_z:?} is not a probability vector")));
    }
    Ok(())
}

/// Initial types `Z_T` for `n` atoms from the decoded composition.
pub fn sample_initial_types<R: Rng + ?Sized>(a_z: &[f64], n: usize, mode: InitialTypes, rng: &mut R) -> Result<Vec<usize>> {
    validate_composition(a_z)?;
    Ok(match mode {
        InitialTypes::Categorical => (0..n).map(|_| sample_categorical(a_z, rng.random())).collect(),
        InitialTypes::Argmax => vec![argmax(a_z); n],
    })
}

pub fn standard_normal_rows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Frac> {
    (0..n)
        .map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)])
        .collect()
}

/// Predicts fractional-frame noise and per-atom type logits for a noisy
/// structure at step `t`. Types are indices into the model's species list.
pub trait NoisePredictor {
    fn predict(&self, lattice: &Lattice, frac: &[Frac], types: &[usize], t: usize) -> Result<(Vec<Frac>, Vec<Vec<f64>>)>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub variant: ReverseVariant,
    /// Add the `σ_t ε′` term; disabling it gives the deterministic mean path.
    pub langevin_noise: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { variant: ReverseVariant::Periodic, langevin_noise: true }
    }
}

/// Runs the reverse chain from `t = T` down to 1 on the cell `lattice`.
///
/// Coordinates start from a standard normal draw; after every step the types
/// are replaced by the argmax of the predicted logits.
pub fn sample_trajectory<P, R>(
    denoiser: &P,
    lattice: &Lattice,
    initial_types: Vec<usize>,
    species: &[u8],
    schedule: &NoiseSchedule,
    rng: &mut R,
    options: SamplerOptions,
) -> Result<CrystalStructure>
where
    P: NoisePredictor + ?Sized,
    R: Rng + ?Sized,
{
    let n = initial_types.len();
    if n == 0 {
        return Err(Error::InvalidInput("cannot sample a structure with zero atoms".into()));
    }
    if let Some(&bad) = initial_types.iter().find(|&&i| i >= species.len()) {
        return Err(Error::InvalidInput(format!("type index {bad} outside species list")));
    }
    let mut r = standard_normal_rows(n, rng);
    let mut r_f: Vec<Frac> = r.iter().map(wrap_frac).collect();
    let mut types = initial_types;
    let zeros = vec![[0.0; 3]; n];

    for t in (1..=schedule.steps()).rev() {
        let (eps, logits) = denoiser.predict(lattice, &r_f, &types, t)?;
        let noise = if options.langevin_noise { standard_normal_rows(n, rng) } else { zeros.clone() };
        match options.variant {
            ReverseVariant::Standard => {
                r = reverse_step_standard(&r, &eps, t, schedule, &noise)?;
                if r.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::Divergence { step: t });
                }
                r_f = r.iter().map(wrap_frac).collect();
            }
            ReverseVariant::Periodic => {
                let (next, next_f) = reverse_step_periodic(&r_f, &eps, t, schedule, &noise)?;
                if next.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::Divergence { step: t });
                }
                r = next;
                r_f = next_f;
            }
        }
        if logits.len() != n {
            return Err(Error::Shape(format!("denoiser returned {} type rows for {n} atoms", logits.len())));
        }
        types = logits.iter().map(|row| argmax(row)).collect();
    }
    let numbers = types.iter().map(|&i| species[i]).collect();
    CrystalStructure::new(*lattice, r_f, numbers)
}
