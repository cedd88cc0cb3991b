//! Reconstruction and generation with a trained model.
//!
//! Every structure gets its own ChaCha stream derived from the run seed, so
//! batches can be processed in parallel and still reproduce exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::diffusion::{sample_initial_types, sample_trajectory};
use crate::error::Result;
use crate::io::SamplerConfig;
use crate::lattice::CrystalStructure;
use crate::model::{reparameterize, DpCdvae};
use crate::schedule::NoiseSchedule;

/// Generator for item `index` of a batch.
pub fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Decodes `z` into lattice, atom count and composition, then runs the
/// reverse chain on the decoded cell.
pub fn sample_from_latent<R: Rng + ?Sized>(
    model: &DpCdvae,
    z: &[f64],
    schedule: &NoiseSchedule,
    sampler: &SamplerConfig,
    rng: &mut R,
) -> Result<CrystalStructure> {
    let decoded = model.decode_heads(z)?;
    let types = sample_initial_types(&decoded.composition, decoded.num_atoms, sampler.initial_types, rng)?;
    let denoiser = model.conditioned(z, schedule.steps());
    sample_trajectory(&denoiser, &decoded.lattice, types, &model.config().species, schedule, rng, sampler.options())
}

/// Encodes, draws `z = μ + e^{logvar} ε″` and samples.
pub fn reconstruct_one<R: Rng + ?Sized>(
    model: &DpCdvae,
    structure: &CrystalStructure,
    schedule: &NoiseSchedule,
    sampler: &SamplerConfig,
    rng: &mut R,
) -> Result<CrystalStructure> {
    let (mu, logvar) = model.encode(structure)?;
    let eps: Vec<f64> = (0..mu.len()).map(|_| rng.sample(StandardNormal)).collect();
    let z = reparameterize(&mu, &logvar, &eps)?;
    sample_from_latent(model, &z, schedule, sampler, rng)
}

/// Draws `z ~ N(0, I)` and samples.
pub fn generate_one<R: Rng + ?Sized>(
    model: &DpCdvae,
    schedule: &NoiseSchedule,
    sampler: &SamplerConfig,
    rng: &mut R,
) -> Result<CrystalStructure> {
    let z: Vec<f64> = (0..model.config().latent_dim).map(|_| rng.sample(StandardNormal)).collect();
    sample_from_latent(model, &z, schedule, sampler, rng)
}

pub fn reconstruct_all(
    model: &DpCdvae,
    data: &[CrystalStructure],
    schedule: &NoiseSchedule,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<Vec<CrystalStructure>> {
    data.par_iter()
        .enumerate()
        .map(|(i, s)| reconstruct_one(model, s, schedule, sampler, &mut item_rng(seed, i)))
        .collect()
}

pub fn generate_all(
    model: &DpCdvae,
    count: usize,
    schedule: &NoiseSchedule,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<Vec<CrystalStructure>> {
    (0..count)
        .into_par_iter()
        .map(|i| generate_one(model, schedule, sampler, &mut item_rng(seed, i)))
        .collect()
}
