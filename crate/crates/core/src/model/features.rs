use std::f64::consts::PI;

use crate::lattice::Frac;

pub const FOURIER_MIN: u32 = 3;
pub const FOURIER_MAX: u32 = 8;
/// `2 (sin, cos) × 6 frequencies × 3 components`.
pub const FOURIER_DIM: usize = 2 * (FOURIER_MAX - FOURIER_MIN + 1) as usize * 3;

/// Per atom, for each `n` in `3..=8`: `sin(2ⁿπ r)` for x, y, z followed by
/// `cos(2ⁿπ r)` for x, y, z.
pub fn fourier_features(r: &[Frac]) -> Vec<Vec<f64>> {
    r.iter()
        .map(|x| {
            let mut out = Vec::with_capacity(FOURIER_DIM);
            for n in FOURIER_MIN..=FOURIER_MAX {
                let w = (1u64 << n) as f64 * PI;
                out.extend(x.iter().map(|c| (w * c).sin()));
                out.extend(x.iter().map(|c| (w * c).cos()));
            }
            out
        })
        .collect()
}

/// Sinusoidal embedding of `t / steps` with `dim / 2` octave frequencies.
pub fn time_embedding(t: usize, steps: usize, dim: usize) -> Vec<f64> {
    let s = t as f64 / steps as f64;
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim / 2 {
        let w = PI * (1u64 << k) as f64;
        out.push((w * s).sin());
        out.push((w * s).cos());
    }
    out.resize(dim, 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_periodicity() {
        let r = [[0.123, 0.456, 0.789]];
        let f = fourier_features(&r);
        assert_eq!(f[0].len(), 36);
        let shifted = fourier_features(&[[1.123, -0.544, 2.789]]);
        for (a, b) in f[0].iter().zip(&shifted[0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn half_cell_values() {
        let f = fourier_features(&[[0.5, 0.5, 0.5]]);
        // n = 3: sin(4π) = 0, cos(4π) = 1
        for k in 0..3 {
            assert!(f[0][k].abs() < 1e-12);
            assert!((f[0][3 + k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn time_embedding_shape() {
        let e = time_embedding(500, 1000, 8);
        assert_eq!(e.len(), 8);
        assert!((e[0] - 1.0).abs() < 1e-12);
    }
}
