//! Training objective for one structure.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::network::DpCdvae;
use super::tape::{Tape, Tensor, Var};
use crate::diffusion::{forward_perturb, one_hot, sample_categorical, softmax, type_probabilities};
use crate::error::{Error, Result};
use crate::lattice::{CrystalStructure, Frac};
use crate::schedule::NoiseSchedule;

/// Weights of the loss terms. `type_weight` scales the type cross-entropy
/// inside the diffusion loss; the rest scale the VAE terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub type_weight: f64,
    pub kld: f64,
    pub lattice: f64,
    pub composition: f64,
    pub num_atoms: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { type_weight: 1.0, kld: 0.01, lattice: 1.0, composition: 1.0, num_atoms: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.type_weight, self.kld, self.lattice, self.composition, self.num_atoms];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config(format!("loss weights must be finite and >= 0, got {all:?}")));
        }
        Ok(())
    }
}

/// Values of every loss term for one structure or averaged over a batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub simple: f64,
    pub type_ce: f64,
    pub kld: f64,
    pub lattice: f64,
    pub composition: f64,
    pub num_atoms: f64,
}

impl LossParts {
    pub fn add(&mut self, o: &LossParts) {
        self.total += o.total;
        self.simple += o.simple;
        self.type_ce += o.type_ce;
        self.kld += o.kld;
        self.lattice += o.lattice;
        self.composition += o.composition;
        self.num_atoms += o.num_atoms;
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for v in [
            &mut self.total,
            &mut self.simple,
            &mut self.type_ce,
            &mut self.kld,
            &mut self.lattice,
            &mut self.composition,
            &mut self.num_atoms,
        ] {
            *v *= s;
        }
        self
    }
}

/// `‖ε − ε_θ‖²` averaged over atoms and components.
pub fn loss_simple(eps: &[Frac], eps_theta: &[Frac]) -> Result<f64> {
    if eps.len() != eps_theta.len() || eps.is_empty() {
        return Err(Error::Shape(format!("{} noise rows vs {} predictions", eps.len(), eps_theta.len())));
    }
    let sum: f64 = eps.iter().zip(eps_theta).flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).powi(2))).sum();
    Ok(sum / (3 * eps.len()) as f64)
}

/// Mean cross-entropy of logits against target distributions (one row each).
pub fn cross_entropy(target: &[Vec<f64>], logits: &[Vec<f64>]) -> Result<f64> {
    if target.len() != logits.len() || target.is_empty() {
        return Err(Error::Shape(format!("{} targets vs {} logit rows", target.len(), logits.len())));
    }
    let mut total = 0.0;
    for (p, l) in target.iter().zip(logits) {
        if p.len() != l.len() {
            return Err(Error::Shape("target and logit widths differ".into()));
        }
        let max = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + l.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        total -= p.iter().zip(l).map(|(p, x)| p * (x - lse)).sum::<f64>();
    }
    Ok(total / target.len() as f64)
}

pub fn loss_diff(eps: &[Frac], eps_theta: &[Frac], a: &[Vec<f64>], a_theta: &[Vec<f64>], type_weight: f64) -> Result<f64> {
    Ok(loss_simple(eps, eps_theta)? + type_weight * cross_entropy(a, a_theta)?)
}

/// Fills `total` from the other parts.
pub fn loss_total(parts: &LossParts, w: &LossWeights) -> f64 {
    parts.simple
        + w.type_weight * parts.type_ce
        + w.kld * parts.kld
        + w.lattice * parts.lattice
        + w.composition * parts.composition
        + w.num_atoms * parts.num_atoms
}

/// `z = μ + e^{logvar} ε″`.
pub fn reparameterize(mu: &[f64], logvar: &[f64], eps: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != logvar.len() || mu.len() != eps.len() {
        return Err(Error::Shape("reparameterize inputs differ in length".into()));
    }
    Ok(mu.iter().zip(logvar).zip(eps).map(|((m, lv), e)| m + lv.exp() * e).collect())
}

/// KL divergence from `N(μ, e^{2·logvar})` to the standard normal.
pub fn kld(mu: &[f64], logvar: &[f64]) -> f64 {
    0.5 * mu.iter().zip(logvar).map(|(m, lv)| m * m + (2.0 * lv).exp() - 1.0 - 2.0 * lv).sum::<f64>()
}

/// Random quantities consumed by one loss evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDraws {
    pub t: usize,
    pub coord_noise: Vec<Frac>,
    pub latent_noise: Vec<f64>,
    /// One uniform per atom for the type perturbation.
    pub type_uniforms: Vec<f64>,
}

impl SampleDraws {
    pub fn draw<R: Rng + ?Sized>(num_atoms: usize, latent_dim: usize, steps: usize, rng: &mut R) -> Self {
        let t = rng.random_range(1..=steps);
        let coord_noise = crate::diffusion::standard_normal_rows(num_atoms, rng);
        let latent_noise = (0..latent_dim).map(|_| rng.sample(StandardNormal)).collect();
        let type_uniforms = (0..num_atoms).map(|_| rng.random()).collect();
        Self { t, coord_noise, latent_noise, type_uniforms }
    }
}

/// Lattice target: lengths in Å, angles in degrees.
pub fn lattice_target(structure: &CrystalStructure) -> [f64; 6] {
    structure.lattice().params().as_array()
}

/// Element fractions over the model vocabulary.
pub fn composition_target(model: &DpCdvae, structure: &CrystalStructure) -> Result<Vec<f64>> {
    let k = model.config().num_types();
    let mut out = vec![0.0; k];
    let n = structure.num_atoms() as f64;
    for &z in structure.atomic_numbers() {
        let i = model
            .config()
            .type_index(z)
            .ok_or_else(|| Error::InvalidInput(format!("element Z={z} is not in the model vocabulary")))?;
        out[i] += 1.0 / n;
    }
    Ok(out)
}

/// Records the full objective on `tape` and returns the scalar loss node
/// with the value of each term.
///
/// The denoiser runs on the structure's own lattice; decoded lattices are
/// only used at sampling time.
pub fn record_loss(
    model: &DpCdvae,
    tape: &mut Tape,
    structure: &CrystalStructure,
    draws: &SampleDraws,
    schedule: &NoiseSchedule,
    weights: &LossWeights,
) -> Result<(Var, LossParts)> {
    let cfg = model.config();
    let n = structure.num_atoms();
    if draws.coord_noise.len() != n || draws.type_uniforms.len() != n || draws.latent_noise.len() != cfg.latent_dim {
        return Err(Error::Shape("sample draws do not match the structure".into()));
    }
    if n > cfg.max_atoms {
        return Err(Error::InvalidInput(format!("{n} atoms exceed max_atoms {}", cfg.max_atoms)));
    }

    let (mu, logvar) = model.encode_on(tape, structure)?;
    let std = tape.exp(logvar);
    let e = tape.constant(Tensor::row_vector(draws.latent_noise.clone()));
    let noise = tape.mul(std, e);
    let z = tape.add(mu, noise);

    // KLD = ½ Σ (μ² + e^{2 lv} − 1 − 2 lv)
    let mu2 = tape.square(mu);
    let var = tape.square(std);
    let lv2 = tape.scale(logvar, 2.0);
    let k1 = tape.add(mu2, var);
    let k2 = tape.sub(k1, lv2);
    let k3 = tape.add_scalar(k2, -1.0);
    let k4 = tape.sum_all(k3);
    let kld_v = tape.scale(k4, 0.5);

    let heads = model.heads_on(tape, z);
    let target = lattice_target(structure);
    let to_rad = std::f64::consts::PI / 180.0;
    let unit = [1.0, 1.0, 1.0, to_rad, to_rad, to_rad];
    let unit_v = tape.constant(Tensor::row_vector(unit.to_vec()));
    let pred = tape.mul(heads.lattice, unit_v);
    let target_v = tape.constant(Tensor::row_vector(target.iter().zip(unit).map(|(t, u)| t * u).collect()));
    let d = tape.sub(pred, target_v);
    let d2 = tape.square(d);
    let latt_v = tape.mean_all(d2);

    let mut na = vec![0.0; cfg.max_atoms];
    na[n - 1] = 1.0;
    let na_v = tape.cross_entropy(heads.num_atoms_logits, Tensor::row_vector(na));

    let comp_target = composition_target(model, structure)?;
    let comp_v = tape.cross_entropy(heads.composition_logits, Tensor::row_vector(comp_target));

    // diffusion branch
    let t = draws.t;
    let state = forward_perturb(structure.frac_coords(), t, schedule, &draws.coord_noise)?;
    let a_z = softmax(&tape.value(heads.composition_logits).data);
    let sp = schedule.sigma_prime_at(t)?;
    let true_types: Vec<usize> = structure
        .atomic_numbers()
        .iter()
        .map(|&z| cfg.type_index(z).expect("checked by composition_target"))
        .collect();
    let a = one_hot(&true_types, cfg.num_types());
    let z_t: Vec<usize> = a
        .iter()
        .zip(&draws.type_uniforms)
        .map(|(row, &u)| sample_categorical(&type_probabilities(row, &a_z, sp), u))
        .collect();
    let (eps_pred, logits, _) =
        model.denoise_on(tape, structure.lattice(), &state.r_f, &z_t, z, t, schedule.steps())?;
    let eps_true = tape.constant(Tensor::from_rows(&draws.coord_noise));
    let de = tape.sub(eps_pred, eps_true);
    let de2 = tape.square(de);
    let simple_v = tape.mean_all(de2);
    let ce_v = tape.cross_entropy(logits, Tensor::from_rows(&a));

    let mut total = simple_v;
    for (v, w) in [
        (ce_v, weights.type_weight),
        (kld_v, weights.kld),
        (latt_v, weights.lattice),
        (comp_v, weights.composition),
        (na_v, weights.num_atoms),
    ] {
        let s = tape.scale(v, w);
        total = tape.add(total, s);
    }

    let item = |tape: &Tape, v: Var| tape.value(v).item();
    let parts = LossParts {
        total: item(tape, total),
        simple: item(tape, simple_v),
        type_ce: item(tape, ce_v),
        kld: item(tape, kld_v),
        lattice: item(tape, latt_v),
        composition: item(tape, comp_v),
        num_atoms: item(tape, na_v),
    };
    Ok((total, parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_loss_zero_iff_equal() {
        let e = vec![[0.1, -0.2, 0.3], [1.0, 2.0, 3.0]];
        assert_eq!(loss_simple(&e, &e).unwrap(), 0.0);
        let mut f = e.clone();
        f[1][2] += 0.6;
        assert!((loss_simple(&e, &f).unwrap() - 0.36 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_logits_cross_entropy() {
        let target = vec![vec![0.0, 0.0, 1.0, 0.0, 0.0]];
        let logits = vec![vec![0.7; 5]];
        assert!((cross_entropy(&target, &logits).unwrap() - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_reduce_to_diffusion_loss() {
        let parts = LossParts { simple: 0.3, type_ce: 0.2, kld: 5.0, lattice: 7.0, composition: 1.0, num_atoms: 2.0, total: 0.0 };
        let w = LossWeights { type_weight: 1.5, kld: 0.0, lattice: 0.0, composition: 0.0, num_atoms: 0.0 };
        assert!((loss_total(&parts, &w) - (0.3 + 1.5 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn reparameterize_cases() {
        let mu = [0.5, -1.0];
        assert_eq!(reparameterize(&mu, &[0.3, -2.0], &[0.0, 0.0]).unwrap(), mu.to_vec());
        assert_eq!(reparameterize(&mu, &[0.0, 0.0], &[1.0, 2.0]).unwrap(), vec![1.5, 1.0]);
        assert_eq!(kld(&[0.0], &[0.0]), 0.0);
    }
}
