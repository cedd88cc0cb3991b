//! Toy datasets of perturbed cubic structures built from two elements.
//!
//! Four prototypes are used: simple cubic and face-centered cubic elemental
//! cells, the CsCl cell and the conventional rock-salt cell. Each sample
//! jitters the cell lengths and angles, displaces atoms slightly, applies a
//! random global translation and shuffles atom order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{wrap_frac, CrystalStructure, Frac, Lattice, LatticeParams};

pub const SODIUM: u8 = 11;
pub const CHLORINE: u8 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prototype {
    SimpleCubic,
    CesiumChloride,
    FaceCentered,
    RockSalt,
}

impl Prototype {
    pub const ALL: [Prototype; 4] = [Self::SimpleCubic, Self::CesiumChloride, Self::FaceCentered, Self::RockSalt];

    /// Ideal lattice constant (Å).
    pub fn lattice_constant(self) -> f64 {
        match self {
            Self::SimpleCubic => 3.0,
            Self::CesiumChloride => 3.6,
            Self::FaceCentered => 4.4,
            Self::RockSalt => 5.6,
        }
    }

    /// Ideal fractional sites and atomic numbers.
    pub fn sites(self) -> (Vec<Frac>, Vec<u8>) {
        let fcc = vec![[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        match self {
            Self::SimpleCubic => (vec![[0.0; 3]], vec![SODIUM]),
            Self::CesiumChloride => (vec![[0.0; 3], [0.5; 3]], vec![SODIUM, CHLORINE]),
            Self::FaceCentered => (fcc, vec![CHLORINE; 4]),
            Self::RockSalt => {
                let mut f = fcc.clone();
                f.extend(fcc.iter().map(|p| wrap_frac(&[p[0] + 0.5, p[1], p[2]])));
                let mut z = vec![SODIUM; 4];
                z.extend([CHLORINE; 4]);
                (f, z)
            }
        }
    }

    pub fn ideal(self) -> Result<CrystalStructure> {
        let (f, z) = self.sites();
        CrystalStructure::new(Lattice::cubic(self.lattice_constant())?, f, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    /// Relative half-width of the uniform length jitter.
    pub length_jitter: f64,
    /// Half-width of the uniform angle jitter (degrees).
    pub angle_jitter: f64,
    /// Standard deviation of fractional site displacements.
    pub site_noise: f64,
    pub random_translation: bool,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self { length_jitter: 0.05, angle_jitter: 2.0, site_noise: 0.005, random_translation: true }
    }
}

/// One perturbed sample of `proto`.
pub fn perturbed<R: Rng + ?Sized>(proto: Prototype, p: &Perturbation, rng: &mut R) -> Result<CrystalStructure> {
    let a0 = proto.lattice_constant();
    let mut jitter = |w: f64| if w > 0.0 { rng.random_range(-w..w) } else { 0.0 };
    let len: [f64; 3] = std::array::from_fn(|_| a0 * (1.0 + jitter(p.length_jitter)));
    let ang: [f64; 3] = std::array::from_fn(|_| 90.0 + jitter(p.angle_jitter));
    let lattice = Lattice::from_params(LatticeParams::new(len[0], len[1], len[2], ang[0], ang[1], ang[2]))?;

    let (sites, numbers) = proto.sites();
    let noise = Normal::new(0.0, p.site_noise.max(0.0)).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let shift: Frac = if p.random_translation { std::array::from_fn(|_| rng.random()) } else { [0.0; 3] };
    let mut atoms: Vec<(Frac, u8)> = sites
        .iter()
        .zip(numbers)
        .map(|(f, z)| (wrap_frac(&std::array::from_fn(|k| f[k] + shift[k] + noise.sample(rng))), z))
        .collect();
    atoms.shuffle(rng);
    let (f, z) = atoms.into_iter().unzip();
    CrystalStructure::new(lattice, f, z)
}

/// `count` samples cycling through the prototypes in order.
pub fn dataset(count: usize, p: &Perturbation, seed: u64) -> Result<Vec<CrystalStructure>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| perturbed(Prototype::ALL[i % 4], p, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototypes_are_valid() {
        for p in Prototype::ALL {
            let s = p.ideal().unwrap();
            assert!(s.num_atoms() <= 8);
        }
        let rs = Prototype::RockSalt.ideal().unwrap();
        assert_eq!(rs.composition().get(&SODIUM), Some(&4));
    }

    #[test]
    fn dataset_is_seeded() {
        let a = dataset(12, &Perturbation::default(), 5).unwrap();
        let b = dataset(12, &Perturbation::default(), 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[3].num_atoms(), 8);
    }
}
