//! Mini-batch training with Adam.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{record_loss, LossParts, LossWeights, SampleDraws};
use super::network::DpCdvae;
use super::tape::{Gradients, ParamStore, Tape, Tensor};
use crate::error::{Error, Result};
use crate::lattice::{niggli_reduce_with_transform, wrap_frac, CrystalStructure, Frac};
use crate::schedule::NoiseSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub weights: LossWeights,
    pub learning_rate: f64,
    /// When positive, the rate follows a cosine from `learning_rate` down to
    /// this value over all epochs.
    pub final_learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub grad_clip: f64,
    /// Write a checkpoint every this many epochs (0: only at the end).
    pub save_every: usize,
    /// Filled from the run seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            weights: LossWeights::default(),
            learning_rate: 1e-3,
            final_learning_rate: 0.0,
            batch_size: 16,
            epochs: 100,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            grad_clip: 10.0,
            save_every: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Learning rate used during `epoch` (1-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        if self.final_learning_rate <= 0.0 || self.epochs <= 1 {
            return self.learning_rate;
        }
        let progress = (epoch - 1) as f64 / (self.epochs - 1) as f64;
        let cos = 0.5 * (1.0 + (std::f64::consts::PI * progress).cos());
        self.final_learning_rate + (self.learning_rate - self.final_learning_rate) * cos
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && self.final_learning_rate >= 0.0
            && self.final_learning_rate <= self.learning_rate
            && self.batch_size > 0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.adam_eps > 0.0
            && self.grad_clip >= 0.0;
        if !ok {
            return Err(Error::Config("invalid training hyperparameters".into()));
        }
        Ok(())
    }
}

/// Adam state for every parameter tensor.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
}

impl Adam {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store.iter().map(|(_, _, t)| Tensor::zeros(t.rows, t.cols)).collect();
        Self { m: zeros.clone(), v: zeros, step: 0 }
    }

    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients, cfg: &TrainConfig, lr: f64) {
        self.step += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.step as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.step as i32);
        let ids: Vec<_> = store.iter().map(|(id, _, _)| id).collect();
        for id in ids {
            let g = grads.get(id);
            let (m, v) = (&mut self.m[id.0], &mut self.v[id.0]);
            let p = store.get_mut(id);
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
                v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
                let mh = m.data[i] / bc1;
                let vh = v.data[i] / bc2;
                p.data[i] -= lr * mh / (vh.sqrt() + cfg.adam_eps);
            }
        }
    }
}

/// Niggli-reduces the cell and remaps coordinates into it.
pub fn preprocess(structure: &CrystalStructure) -> Result<CrystalStructure> {
    let red = niggli_reduce_with_transform(structure.lattice())?;
    let map = red.frac_map();
    let frac: Vec<Frac> = structure
        .frac_coords()
        .iter()
        .map(|f| {
            let g = [
                f[0] * map[(0, 0)] + f[1] * map[(1, 0)] + f[2] * map[(2, 0)],
                f[0] * map[(0, 1)] + f[1] * map[(1, 1)] + f[2] * map[(2, 1)],
                f[0] * map[(0, 2)] + f[1] * map[(1, 2)] + f[2] * map[(2, 2)],
            ];
            wrap_frac(&g)
        })
        .collect();
    CrystalStructure::new(red.lattice, frac, structure.atomic_numbers().to_vec())
}

/// Loss and parameter gradients for one structure.
pub fn loss_and_grad(
    model: &DpCdvae,
    structure: &CrystalStructure,
    draws: &SampleDraws,
    schedule: &NoiseSchedule,
    weights: &LossWeights,
) -> Result<(LossParts, Gradients)> {
    let mut tape = Tape::new(model.params());
    let (loss, parts) = record_loss(model, &mut tape, structure, draws, schedule, weights)?;
    Ok((parts, tape.backward(loss)))
}

/// Loss value only.
pub fn loss_value(
    model: &DpCdvae,
    structure: &CrystalStructure,
    draws: &SampleDraws,
    schedule: &NoiseSchedule,
    weights: &LossWeights,
) -> Result<LossParts> {
    let mut tape = Tape::new(model.params());
    Ok(record_loss(model, &mut tape, structure, draws, schedule, weights)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub loss: LossParts,
    pub grad_norm: f64,
}

/// Per-epoch mean losses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochReport>,
}

impl TrainHistory {
    pub const CSV_HEADER: &'static str = "epoch,L_total,L_simple,CE,KLD,latt,comp,N_a";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.epochs {
            let l = &e.loss;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.epoch, l.total, l.simple, l.type_ce, l.kld, l.lattice, l.composition, l.num_atoms
            ));
        }
        out
    }
}

/// Trains `model` in place. `on_epoch` runs after every epoch; returning an
/// error stops training.
///
/// Each epoch reshuffles the data and draws a fresh `t ~ U{1..T}` per
/// structure. Batch gradients are evaluated in parallel and summed in data
/// order, so the result depends only on the seed.
pub fn train<F>(
    model: &mut DpCdvae,
    data: &[CrystalStructure],
    schedule: &NoiseSchedule,
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainHistory>
where
    F: FnMut(&EpochReport, &DpCdvae) -> Result<()>,
{
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let data: Vec<CrystalStructure> = data.iter().map(preprocess).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.params());
    let mut history = TrainHistory::default();
    let latent = model.config().latent_dim;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0usize;

    for epoch in 1..=cfg.epochs {
        let lr = cfg.learning_rate_at(epoch);
        order.shuffle(&mut rng);
        let draws: Vec<SampleDraws> = order
            .iter()
            .map(|&i| SampleDraws::draw(data[i].num_atoms(), latent, schedule.steps(), &mut rng))
            .collect();
        let mut epoch_loss = LossParts::default();
        let mut last_norm = 0.0;
        for (batch, batch_draws) in order.chunks(cfg.batch_size).zip(draws.chunks(cfg.batch_size)) {
            step += 1;
            let m: &DpCdvae = model;
            let results: Vec<Result<(LossParts, Gradients)>> = batch
                .par_iter()
                .zip(batch_draws.par_iter())
                .map(|(&i, d)| loss_and_grad(m, &data[i], d, schedule, &cfg.weights))
                .collect();
            let mut grads = Gradients::zeros_like(model.params());
            let mut batch_loss = LossParts::default();
            for r in results {
                let (parts, g) = r?;
                batch_loss.add(&parts);
                grads.add_assign(&g);
            }
            let inv = 1.0 / batch.len() as f64;
            grads.scale(inv);
            let norm = grads.norm();
            if !batch_loss.total.is_finite() || !norm.is_finite() {
                return Err(Error::TrainingDivergence {
                    step,
                    loss: batch_loss.total * inv,
                    lr,
                    grad_norm: norm,
                });
            }
            if cfg.grad_clip > 0.0 && norm > cfg.grad_clip {
                grads.scale(cfg.grad_clip / norm);
            }
            adam.step(model.params_mut(), &grads, cfg, lr);
            epoch_loss.add(&batch_loss);
            last_norm = norm;
        }
        let report = EpochReport { epoch, loss: epoch_loss.scaled(1.0 / data.len() as f64), grad_norm: last_norm };
        history.epochs.push(report);
        on_epoch(&report, model)?;
    }
    Ok(history)
}
