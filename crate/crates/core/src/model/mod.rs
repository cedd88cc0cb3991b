//! Trainable model: autodiff, layers, encoder/decoder/denoiser, losses and
//! training.

pub mod features;
pub mod loss;
pub mod network;
pub mod nn;
pub mod tape;
pub mod train;

pub use features::{fourier_features, time_embedding, FOURIER_DIM};
pub use loss::{kld, loss_diff, loss_simple, loss_total, reparameterize, LossParts, LossWeights, SampleDraws};
pub use network::{ConditionedDenoiser, Decoded, DpCdvae, ModelConfig};
pub use tape::{Gradients, ParamId, ParamStore, Tape, Tensor};
pub use train::{preprocess, train, EpochReport, TrainConfig, TrainHistory};

use crate::lattice::CrystalStructure;

impl ModelConfig {
    /// Fills an empty species list and a zero `max_atoms` from a dataset.
    pub fn fit_to(&mut self, data: &[CrystalStructure]) {
        if self.species.is_empty() {
            let mut s: Vec<u8> = data.iter().flat_map(|d| d.atomic_numbers().iter().copied()).collect();
            s.sort_unstable();
            s.dedup();
            self.species = s;
        }
        if self.max_atoms == 0 {
            self.max_atoms = data.iter().map(|d| d.num_atoms()).max().unwrap_or(1);
        }
    }
}
