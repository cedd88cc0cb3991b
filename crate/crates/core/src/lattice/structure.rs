use std::collections::BTreeMap;

use nalgebra::Vector3;

use super::{wrap_frac, Frac, Lattice};
use crate::error::{Error, Result};

/// Periodic crystal: a cell, fractional coordinates in `[0, 1)` and atomic
/// numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalStructure {
    lattice: Lattice,
    frac_coords: Vec<Frac>,
    atomic_numbers: Vec<u8>,
}

impl CrystalStructure {
    pub fn new(lattice: Lattice, frac_coords: Vec<Frac>, atomic_numbers: Vec<u8>) -> Result<Self> {
        if frac_coords.is_empty() {
            return Err(Error::InvalidInput("structure has no atoms".into()));
        }
        if frac_coords.len() != atomic_numbers.len() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates but {} atomic numbers",
                frac_coords.len(),
                atomic_numbers.len()
            )));
        }
        for (i, f) in frac_coords.iter().enumerate() {
            if f.iter().any(|x| !(x.is_finite() && (0.0..1.0).contains(x))) {
                return Err(Error::InvalidInput(format!(
                    "atom {i}: fractional coordinate {f:?} outside [0, 1)"
                )));
            }
        }
        if let Some(z) = atomic_numbers.iter().find(|z| !(1..=118).contains(*z)) {
            return Err(Error::InvalidInput(format!("atomic number {z} outside 1..=118")));
        }
        Ok(Self { lattice, frac_coords, atomic_numbers })
    }

    /// Like [`CrystalStructure::new`] but wraps coordinates first.
    pub fn wrapped(lattice: Lattice, frac_coords: Vec<Frac>, atomic_numbers: Vec<u8>) -> Result<Self> {
        if frac_coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite fractional coordinate".into()));
        }
        Self::new(lattice, frac_coords.iter().map(wrap_frac).collect(), atomic_numbers)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn frac_coords(&self) -> &[Frac] {
        &self.frac_coords
    }

    pub fn atomic_numbers(&self) -> &[u8] {
        &self.atomic_numbers
    }

    pub fn num_atoms(&self) -> usize {
        self.frac_coords.len()
    }

    pub fn cartesian(&self) -> Vec<Vector3<f64>> {
        self.frac_coords.iter().map(|f| self.lattice.to_cartesian(f)).collect()
    }

    /// Element counts keyed by atomic number.
    pub fn composition(&self) -> BTreeMap<u8, usize> {
        let mut counts = BTreeMap::new();
        for &z in &self.atomic_numbers {
            *counts.entry(z).or_insert(0) += 1;
        }
        counts
    }

    pub fn with_lattice(&self, lattice: Lattice) -> Self {
        Self { lattice, ..self.clone() }
    }

    /// Uniform fractional shift of every atom, wrapped back into the cell.
    pub fn translated(&self, shift: Frac) -> Self {
        let frac_coords = self
            .frac_coords
            .iter()
            .map(|f| wrap_frac(&[f[0] + shift[0], f[1] + shift[1], f[2] + shift[2]]))
            .collect();
        Self { frac_coords, ..self.clone() }
    }

    /// Reorders atoms so that new atom `i` is old atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            lattice: self.lattice,
            frac_coords: order.iter().map(|&i| self.frac_coords[i]).collect(),
            atomic_numbers: order.iter().map(|&i| self.atomic_numbers[i]).collect(),
        }
    }

    /// Diagonal supercell `na × nb × nc`.
    pub fn supercell(&self, reps: [usize; 3]) -> Result<Self> {
        let rows = self.lattice.rows();
        let mut scaled = rows;
        for (k, row) in scaled.iter_mut().enumerate() {
            for x in row.iter_mut() {
                *x *= reps[k] as f64;
            }
        }
        let lattice = Lattice::from_matrix(scaled)?;
        let mut frac = Vec::new();
        let mut numbers = Vec::new();
        for i in 0..reps[0] {
            for j in 0..reps[1] {
                for k in 0..reps[2] {
                    for (f, &z) in self.frac_coords.iter().zip(&self.atomic_numbers) {
                        frac.push([
                            (f[0] + i as f64) / reps[0] as f64,
                            (f[1] + j as f64) / reps[1] as f64,
                            (f[2] + k as f64) / reps[2] as f64,
                        ]);
                        numbers.push(z);
                    }
                }
            }
        }
        Self::wrapped(lattice, frac, numbers)
    }
}
