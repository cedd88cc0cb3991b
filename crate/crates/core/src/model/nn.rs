use rand::Rng;

use super::tape::{ParamId, ParamStore, Tape, Tensor, Var};

/// Affine layer `x·W + b`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        // Xavier-uniform
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        let weight = store.add(format!("{name}.weight"), Tensor::from_vec(in_dim, out_dim, w));
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(1, out_dim));
        Self { weight, bias, in_dim, out_dim }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let (w, b) = (tape.param(self.weight), tape.param(self.bias));
        let y = tape.matmul(x, w);
        tape.add_row(y, b)
    }
}

/// Two-layer perceptron with a SiLU between the layers.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub first: Linear,
    pub second: Linear,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            first: Linear::new(store, &format!("{name}.0"), in_dim, hidden, rng),
            second: Linear::new(store, &format!("{name}.1"), hidden, out_dim, rng),
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let h = self.first.forward(tape, x);
        let h = tape.silu(h);
        self.second.forward(tape, h)
    }
}

/// Gaussian radial basis with a cosine envelope that vanishes at `cutoff`.
pub fn radial_basis(distance: f64, cutoff: f64, count: usize) -> Vec<f64> {
    let width = cutoff / count as f64;
    let envelope = if distance < cutoff { 0.5 * ((std::f64::consts::PI * distance / cutoff).cos() + 1.0) } else { 0.0 };
    (0..count)
        .map(|k| {
            let center = cutoff * k as f64 / (count - 1).max(1) as f64;
            let x = (distance - center) / width;
            envelope * (-0.5 * x * x).exp()
        })
        .collect()
}
