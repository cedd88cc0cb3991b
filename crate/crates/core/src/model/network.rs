//! Encoder, decoder heads and the equivariant denoiser.
//!
//! Both graph networks are small message-passing stacks over a
//! [`PeriodicGraph`]. Edge inputs are radial-basis expansions of distances, so
//! node embeddings are invariant under rotations and atom relabeling. The
//! denoiser's coordinate output is a per-atom sum of gated unit edge vectors,
//! which rotates with the input frame.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{fourier_features, time_embedding, FOURIER_DIM};
use super::nn::{radial_basis, Linear, Mlp};
use super::tape::{ParamStore, Tape, Tensor, Var};
use crate::diffusion::{softmax, NoisePredictor};
use crate::error::{Error, Result};
use crate::lattice::build_graph_from_parts;
use crate::lattice::{CrystalStructure, Frac, Lattice, LatticeParams, PeriodicGraph};

/// Lower and upper bound (degrees) of decoded cell angles.
pub const ANGLE_MIN: f64 = 30.0;
pub const ANGLE_MAX: f64 = 150.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Atomic numbers of the type vocabulary; filled from the training set
    /// when empty.
    pub species: Vec<u8>,
    /// Largest atom count the `N_a` head can emit; 0 means "from data".
    pub max_atoms: usize,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub num_rbf: usize,
    pub time_dim: usize,
    pub cutoff: f64,
    pub max_neighbors: usize,
    /// Feed the atom count to the encoder as a side input.
    pub encode_num_atoms: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            species: Vec::new(),
            max_atoms: 0,
            latent_dim: 64,
            hidden_dim: 128,
            num_layers: 3,
            num_rbf: 16,
            time_dim: 8,
            cutoff: 7.0,
            max_neighbors: 12,
            encode_num_atoms: false,
        }
    }
}

impl ModelConfig {
    pub fn num_types(&self) -> usize {
        self.species.len()
    }

    /// Width of the denoiser node features `(Z_t, F_t, z, t)`.
    pub fn node_feature_dim(&self) -> usize {
        self.num_types() + FOURIER_DIM + self.latent_dim + self.time_dim
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.species.is_empty() {
            return bad("model.species is empty");
        }
        let mut sorted = self.species.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.species.len() || self.species.iter().any(|z| !(1..=118).contains(z)) {
            return bad("model.species must hold distinct atomic numbers in 1..=118");
        }
        if self.max_atoms == 0 {
            return bad("model.max_atoms must be positive");
        }
        if self.latent_dim == 0 || self.hidden_dim == 0 || self.num_layers == 0 || self.num_rbf < 2 {
            return bad("model dimensions must be positive (num_rbf >= 2)");
        }
        if self.time_dim % 2 != 0 {
            return bad("model.time_dim must be even");
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) || self.max_neighbors == 0 {
            return bad("model.cutoff and model.max_neighbors must be positive");
        }
        Ok(())
    }

    pub fn type_index(&self, z: u8) -> Option<usize> {
        self.species.iter().position(|&s| s == z)
    }
}

#[derive(Debug, Clone)]
struct Interaction {
    message: Mlp,
    update: Mlp,
}

impl Interaction {
    fn new(store: &mut ParamStore, name: &str, hidden: usize, rbf: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            message: Mlp::new(store, &format!("{name}.message"), 2 * hidden + rbf, hidden, hidden, rng),
            update: Mlp::new(store, &format!("{name}.update"), 2 * hidden, hidden, hidden, rng),
        }
    }

    fn forward(&self, tape: &mut Tape, h: Var, edges: &EdgeInputs, scale: f64) -> Var {
        let n = tape.value(h).rows;
        let agg = if edges.dst.is_empty() {
            tape.constant(Tensor::zeros(n, tape.value(h).cols))
        } else {
            let hd = tape.gather_rows(h, &edges.dst);
            let hs = tape.gather_rows(h, &edges.src);
            let x = tape.concat_cols(&[hd, hs, edges.rbf]);
            let m = self.message.forward(tape, x);
            let s = tape.scatter_add_rows(m, &edges.dst, n);
            tape.scale(s, scale)
        };
        let x = tape.concat_cols(&[h, agg]);
        let dh = self.update.forward(tape, x);
        tape.add(h, dh)
    }
}

/// Graph quantities that enter the tape as constants.
struct EdgeInputs {
    dst: Vec<usize>,
    src: Vec<usize>,
    rbf: Var,
    unit: Var,
}

impl EdgeInputs {
    fn new(tape: &mut Tape, graph: &PeriodicGraph, num_rbf: usize) -> Self {
        let rbf_rows: Vec<Vec<f64>> = graph.edges.iter().map(|e| radial_basis(e.distance, graph.cutoff, num_rbf)).collect();
        let unit_rows: Vec<[f64; 3]> = graph.edges.iter().map(|e| e.vector.map(|v| v / e.distance)).collect();
        let (rbf, unit) = if graph.edges.is_empty() {
            (Tensor::zeros(0, num_rbf), Tensor::zeros(0, 3))
        } else {
            (Tensor::from_rows(&rbf_rows), Tensor::from_rows(&unit_rows))
        };
        Self { dst: graph.dst_indices(), src: graph.src_indices(), rbf: tape.constant(rbf), unit: tape.constant(unit) }
    }
}

#[derive(Debug, Clone)]
struct Encoder {
    embed: Linear,
    num_atoms_embed: Option<Linear>,
    layers: Vec<Interaction>,
    readout: Mlp,
}

#[derive(Debug, Clone)]
struct Heads {
    lattice: Mlp,
    num_atoms: Mlp,
    composition: Mlp,
}

#[derive(Debug, Clone)]
struct Denoiser {
    embed: Mlp,
    layers: Vec<Interaction>,
    gate: Mlp,
    types: Mlp,
}

/// Output of the decoder heads on the tape.
#[derive(Debug, Clone, Copy)]
pub struct HeadVars {
    /// `1×6`: lengths (Å) then angles (degrees).
    pub lattice: Var,
    pub num_atoms_logits: Var,
    pub composition_logits: Var,
}

/// Smallest normalized Gram determinant accepted for a decoded cell.
const MIN_CELL_GRAM: f64 = 1e-3;

fn gram_det(angles: [f64; 3]) -> f64 {
    let [ca, cb, cg] = angles.map(|x| x.to_radians().cos());
    1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg
}

/// Pulls the angles toward 90° along a straight line until the cell is
/// realizable. Lengths are untouched.
fn realizable(p: LatticeParams) -> LatticeParams {
    let angles = [p.alpha, p.beta, p.gamma];
    let at = |s: f64| angles.map(|x| 90.0 + s * (x - 90.0));
    if gram_det(angles) >= MIN_CELL_GRAM {
        return p;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gram_det(at(mid)) >= MIN_CELL_GRAM {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let [alpha, beta, gamma] = at(lo);
    LatticeParams { alpha, beta, gamma, ..p }
}

/// Decoded lattice, atom count and composition for one latent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub params: LatticeParams,
    pub lattice: Lattice,
    pub num_atoms: usize,
    pub composition: Vec<f64>,
}

/// Encoder `φ`, decoder heads and denoiser `θ` with their parameters.
#[derive(Debug, Clone)]
pub struct DpCdvae {
    config: ModelConfig,
    params: ParamStore,
    encoder: Encoder,
    heads: Heads,
    denoiser: Denoiser,
}

impl DpCdvae {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let (k, h, r, d) = (config.num_types(), config.hidden_dim, config.num_rbf, config.latent_dim);

        let encoder = Encoder {
            embed: Linear::new(&mut store, "encoder.embed", k, h, &mut rng),
            num_atoms_embed: config
                .encode_num_atoms
                .then(|| Linear::new(&mut store, "encoder.num_atoms", config.max_atoms, h, &mut rng)),
            layers: (0..config.num_layers)
                .map(|i| Interaction::new(&mut store, &format!("encoder.layer{i}"), h, r, &mut rng))
                .collect(),
            readout: Mlp::new(
                &mut store,
                "encoder.readout",
                if config.encode_num_atoms { 2 * h } else { h },
                h,
                2 * d,
                &mut rng,
            ),
        };
        let heads = Heads {
            lattice: Mlp::new(&mut store, "heads.lattice", d, h, 6, &mut rng),
            num_atoms: Mlp::new(&mut store, "heads.num_atoms", d, h, config.max_atoms, &mut rng),
            composition: Mlp::new(&mut store, "heads.composition", d, h, k, &mut rng),
        };
        let denoiser = Denoiser {
            embed: Mlp::new(&mut store, "denoiser.embed", config.node_feature_dim(), h, h, &mut rng),
            layers: (0..config.num_layers)
                .map(|i| Interaction::new(&mut store, &format!("denoiser.layer{i}"), h, r, &mut rng))
                .collect(),
            gate: Mlp::new(&mut store, "denoiser.gate", 2 * h + r, h, 1, &mut rng),
            types: Mlp::new(&mut store, "denoiser.types", h, h, k, &mut rng),
        };
        Ok(Self { config, params: store, encoder, heads, denoiser })
    }

    /// Rebuilds a model around previously saved parameters.
    pub fn from_params(config: ModelConfig, params: ParamStore) -> Result<Self> {
        let mut model = Self::new(config, 0)?;
        if model.params.len() != params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                model.params.len(),
                params.len()
            )));
        }
        for ((_, name_a, a), (_, name_b, b)) in model.params.iter().zip(params.iter()) {
            if name_a != name_b || a.shape() != b.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name_b} {:?} does not match expected {name_a} {:?}",
                    b.shape(),
                    a.shape()
                )));
            }
            if b.data.iter().any(|x| !x.is_finite()) {
                return Err(Error::Checkpoint(format!("tensor {name_b} has non-finite values")));
            }
        }
        model.params = params;
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    fn graph(&self, lattice: &Lattice, frac: &[Frac]) -> Result<PeriodicGraph> {
        build_graph_from_parts(lattice, frac, self.config.cutoff, self.config.max_neighbors)
    }

    fn aggregation_scale(&self) -> f64 {
        1.0 / self.config.max_neighbors as f64
    }

    fn type_indices(&self, structure: &CrystalStructure) -> Result<Vec<usize>> {
        structure
            .atomic_numbers()
            .iter()
            .map(|&z| {
                self.config
                    .type_index(z)
                    .ok_or_else(|| Error::InvalidInput(format!("element Z={z} is not in the model vocabulary")))
            })
            .collect()
    }

    /// Encoder on the tape; returns `(μ, logvar)` as `1×d_z` rows.
    pub fn encode_on(&self, tape: &mut Tape, structure: &CrystalStructure) -> Result<(Var, Var)> {
        let types = self.type_indices(structure)?;
        let n = types.len();
        if self.config.encode_num_atoms && n > self.config.max_atoms {
            return Err(Error::InvalidInput(format!("{n} atoms exceed max_atoms {}", self.config.max_atoms)));
        }
        let graph = self.graph(structure.lattice(), structure.frac_coords())?;
        let edges = EdgeInputs::new(tape, &graph, self.config.num_rbf);
        let onehot = tape.constant(Tensor::from_rows(&crate::diffusion::one_hot(&types, self.config.num_types())));
        let mut h = self.encoder.embed.forward(tape, onehot);
        for layer in &self.encoder.layers {
            h = layer.forward(tape, h, &edges, self.aggregation_scale());
        }
        let mut pooled = tape.mean_rows(h);
        if let Some(embed) = &self.encoder.num_atoms_embed {
            let mut v = vec![0.0; self.config.max_atoms];
            v[n - 1] = 1.0;
            let na = tape.constant(Tensor::row_vector(v));
            let e = embed.forward(tape, na);
            let e = tape.silu(e);
            pooled = tape.concat_cols(&[pooled, e]);
        }
        let out = self.encoder.readout.forward(tape, pooled);
        let d = self.config.latent_dim;
        Ok((tape.slice_cols(out, 0, d), tape.slice_cols(out, d, d)))
    }

    /// `(μ_φ, logvar_φ)` for a structure.
    pub fn encode(&self, structure: &CrystalStructure) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut tape = Tape::new(&self.params);
        let (mu, logvar) = self.encode_on(&mut tape, structure)?;
        Ok((tape.value(mu).data.clone(), tape.value(logvar).data.clone()))
    }

    pub fn heads_on(&self, tape: &mut Tape, z: Var) -> HeadVars {
        let raw = self.heads.lattice.forward(tape, z);
        let lengths = tape.slice_cols(raw, 0, 3);
        let lengths = tape.softplus(lengths);
        let angles = tape.slice_cols(raw, 3, 3);
        let angles = tape.sigmoid(angles);
        let angles = tape.scale(angles, ANGLE_MAX - ANGLE_MIN);
        let angles = tape.add_scalar(angles, ANGLE_MIN);
        let lattice = tape.concat_cols(&[lengths, angles]);
        HeadVars {
            lattice,
            num_atoms_logits: self.heads.num_atoms.forward(tape, z),
            composition_logits: self.heads.composition.forward(tape, z),
        }
    }

    /// Decodes lattice, atom count and composition from a latent vector.
    pub fn decode_heads(&self, z: &[f64]) -> Result<Decoded> {
        if z.len() != self.config.latent_dim || z.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("latent vector has wrong length or non-finite entries".into()));
        }
        let mut tape = Tape::new(&self.params);
        let zv = tape.constant(Tensor::row_vector(z.to_vec()));
        let heads = self.heads_on(&mut tape, zv);
        let p = &tape.value(heads.lattice).data;
        let params = realizable(LatticeParams::new(p[0], p[1], p[2], p[3], p[4], p[5]));
        let lattice = Lattice::from_params(params)?;
        let num_atoms = crate::diffusion::argmax(&tape.value(heads.num_atoms_logits).data) + 1;
        let composition = softmax(&tape.value(heads.composition_logits).data);
        Ok(Decoded { params, lattice, num_atoms, composition })
    }

    /// Denoiser on the tape. Returns the fractional-frame noise estimate
    /// (`N×3`), type logits (`N×K`) and the Cartesian estimate (`N×3`).
    #[allow(clippy::too_many_arguments)]
    pub fn denoise_on(
        &self,
        tape: &mut Tape,
        lattice: &Lattice,
        frac: &[Frac],
        types: &[usize],
        z: Var,
        t: usize,
        steps: usize,
    ) -> Result<(Var, Var, Var)> {
        let n = frac.len();
        if types.len() != n {
            return Err(Error::Shape(format!("{} types for {n} atoms", types.len())));
        }
        let k = self.config.num_types();
        if let Some(bad) = types.iter().find(|&&i| i >= k) {
            return Err(Error::InvalidInput(format!("type index {bad} outside vocabulary of {k}")));
        }
        let frac: Vec<Frac> = frac.iter().map(crate::lattice::wrap_frac).collect();
        let graph = self.graph(lattice, &frac)?;
        let edges = EdgeInputs::new(tape, &graph, self.config.num_rbf);

        let onehot = tape.constant(Tensor::from_rows(&crate::diffusion::one_hot(types, k)));
        let fourier = tape.constant(Tensor::from_rows(&fourier_features(&frac)));
        let zb = tape.broadcast_rows(z, n);
        let temb = time_embedding(t, steps, self.config.time_dim);
        let temb = tape.constant(Tensor::from_rows(&vec![temb; n]));
        let features = tape.concat_cols(&[onehot, fourier, zb, temb]);

        let mut h = self.denoiser.embed.forward(tape, features);
        for layer in &self.denoiser.layers {
            h = layer.forward(tape, h, &edges, self.aggregation_scale());
        }

        let cart = if edges.dst.is_empty() {
            tape.constant(Tensor::zeros(n, 3))
        } else {
            let hd = tape.gather_rows(h, &edges.dst);
            let hs = tape.gather_rows(h, &edges.src);
            let x = tape.concat_cols(&[hd, hs, edges.rbf]);
            let gate = self.denoiser.gate.forward(tape, x);
            let directed = tape.mul_col(edges.unit, gate);
            tape.scatter_add_rows(directed, &edges.dst, n)
        };
        let inv = lattice.inverse();
        let inv_rows: Vec<[f64; 3]> = (0..3).map(|i| [inv[(i, 0)], inv[(i, 1)], inv[(i, 2)]]).collect();
        let inv = tape.constant(Tensor::from_rows(&inv_rows));
        let eps = tape.matmul(cart, inv);
        let logits = self.denoiser.types.forward(tape, h);
        Ok((eps, logits, cart))
    }

    /// `(ε_θ, A_θ)` for a noisy structure conditioned on `z`.
    pub fn denoise(
        &self,
        lattice: &Lattice,
        frac: &[Frac],
        types: &[usize],
        z: &[f64],
        t: usize,
        steps: usize,
    ) -> Result<(Vec<Frac>, Vec<Vec<f64>>)> {
        let mut tape = Tape::new(&self.params);
        let zv = tape.constant(Tensor::row_vector(z.to_vec()));
        let (eps, logits, _) = self.denoise_on(&mut tape, lattice, frac, types, zv, t, steps)?;
        let eps = tape.value(eps).data.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok((eps, tape.value(logits).to_rows()))
    }

    /// Cartesian noise estimate before the fractional mapping.
    pub fn denoise_cartesian(
        &self,
        lattice: &Lattice,
        frac: &[Frac],
        types: &[usize],
        z: &[f64],
        t: usize,
        steps: usize,
    ) -> Result<Vec<[f64; 3]>> {
        let mut tape = Tape::new(&self.params);
        let zv = tape.constant(Tensor::row_vector(z.to_vec()));
        let (_, _, cart) = self.denoise_on(&mut tape, lattice, frac, types, zv, t, steps)?;
        Ok(tape.value(cart).data.chunks(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    pub fn conditioned<'a>(&'a self, z: &'a [f64], steps: usize) -> ConditionedDenoiser<'a> {
        ConditionedDenoiser { model: self, z, steps }
    }
}

/// Denoiser with a fixed latent code, usable by the samplers.
pub struct ConditionedDenoiser<'a> {
    model: &'a DpCdvae,
    z: &'a [f64],
    steps: usize,
}

impl NoisePredictor for ConditionedDenoiser<'_> {
    fn predict(&self, lattice: &Lattice, frac: &[Frac], types: &[usize], t: usize) -> Result<(Vec<Frac>, Vec<Vec<f64>>)> {
        self.model.denoise(lattice, frac, types, self.z, t, self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realizable_keeps_valid_cells_and_repairs_flat_ones() {
        let ok = LatticeParams::new(4.0, 5.0, 6.0, 80.0, 100.0, 110.0);
        assert_eq!(realizable(ok), ok);
        let bad = LatticeParams::new(4.0, 5.0, 6.0, 45.0, 130.0, 61.0);
        let fixed = realizable(bad);
        assert_eq!((fixed.a, fixed.b, fixed.c), (4.0, 5.0, 6.0));
        assert!(Lattice::from_params(fixed).is_ok());
        let g = gram_det([fixed.alpha, fixed.beta, fixed.gamma]);
        assert!((MIN_CELL_GRAM..1.1 * MIN_CELL_GRAM).contains(&g), "{g}");
    }
}
