use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::elements;
use crate::error::Result;
use crate::lattice::{CrystalStructure, MinImageFrame};

/// Minimum allowed interatomic distance (Å).
pub const MIN_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargeBalance {
    Neutral,
    Charged,
    /// Some element has no tabulated oxidation states.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validity {
    pub structural: bool,
    pub compositional: ChargeBalance,
}

impl Validity {
    pub fn comp_valid(&self) -> bool {
        self.compositional == ChargeBalance::Neutral
    }
}

/// Smallest distance between any two sites, including an atom and its own
/// periodic images.
pub fn min_pair_distance(structure: &CrystalStructure) -> Result<f64> {
    let frame = MinImageFrame::new(structure.lattice())?;
    let f = structure.frac_coords();
    let mut best = frame.shortest_lattice_vector();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            best = best.min(frame.distance(&f[i], &f[j]));
        }
    }
    Ok(best)
}

pub fn structure_valid(structure: &CrystalStructure) -> Result<bool> {
    Ok(min_pair_distance(structure)? > MIN_DISTANCE)
}

/// Whether one oxidation state per element can make the cell neutral.
/// Single-element structures count as neutral.
pub fn charge_balance(structure: &CrystalStructure) -> ChargeBalance {
    let comp = structure.composition();
    if comp.len() == 1 {
        return ChargeBalance::Neutral;
    }
    let mut sums: BTreeSet<i64> = BTreeSet::from([0]);
    for (&z, &count) in &comp {
        let Some(states) = elements::element(z).and_then(|e| e.oxidation_states) else {
            return ChargeBalance::Unknown;
        };
        sums = sums
            .iter()
            .flat_map(|s| states.iter().map(move |&q| s + q as i64 * count as i64))
            .collect();
        if sums.is_empty() {
            return ChargeBalance::Charged;
        }
    }
    if sums.contains(&0) {
        ChargeBalance::Neutral
    } else {
        ChargeBalance::Charged
    }
}

pub fn validity(structure: &CrystalStructure) -> Result<Validity> {
    Ok(Validity { structural: structure_valid(structure)?, compositional: charge_balance(structure) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    #[test]
    fn close_pair_is_invalid() {
        let l = Lattice::cubic(5.0).unwrap();
        let s = CrystalStructure::new(l, vec![[0.0, 0.0, 0.0], [0.08, 0.0, 0.0]], vec![11, 17]).unwrap();
        assert!(!structure_valid(&s).unwrap());
        let s = CrystalStructure::new(l, vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]], vec![11, 17]).unwrap();
        assert!(structure_valid(&s).unwrap());
    }

    #[test]
    fn small_cell_self_images() {
        let s = CrystalStructure::new(Lattice::cubic(0.45).unwrap(), vec![[0.0; 3]], vec![6]).unwrap();
        assert!(!structure_valid(&s).unwrap());
    }

    #[test]
    fn charge_cases() {
        let l = Lattice::cubic(5.64).unwrap();
        let nacl = CrystalStructure::new(l, vec![[0.0; 3], [0.5, 0.5, 0.5]], vec![11, 17]).unwrap();
        assert_eq!(charge_balance(&nacl), ChargeBalance::Neutral);
        let carbon = CrystalStructure::new(l, vec![[0.0; 3]], vec![6]).unwrap();
        assert_eq!(charge_balance(&carbon), ChargeBalance::Neutral);
        let na2cl = CrystalStructure::new(l, vec![[0.0; 3], [0.5, 0.5, 0.5], [0.5, 0.0, 0.0]], vec![11, 11, 17]).unwrap();
        // Na is +1 only and every Cl state is odd, so 2 + odd is never 0
        assert_eq!(charge_balance(&na2cl), ChargeBalance::Charged);
        let mt = CrystalStructure::new(l, vec![[0.0; 3], [0.5, 0.5, 0.5]], vec![109, 8]).unwrap();
        assert_eq!(charge_balance(&mt), ChargeBalance::Unknown);
    }
}
