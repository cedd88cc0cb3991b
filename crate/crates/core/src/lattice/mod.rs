//! Crystal geometry kernel.
//!
//! Lattice matrices store the three cell vectors as rows, so a fractional row
//! vector `f` maps to Cartesian coordinates as `f · L`. Every type in this
//! module is immutable after construction.

mod graph;
mod niggli;
mod structure;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graph::{build_periodic_graph, Edge, PeriodicGraph};
pub(crate) use graph::build_graph_from_parts;
pub use niggli::{niggli_reduce, niggli_reduce_with_transform, NiggliReduction, NIGGLI_MAX_ITER, NIGGLI_TOL};
pub use structure::CrystalStructure;

/// Angles closer than this (degrees) to 0 or 180 are rejected.
pub const DEGENERATE_ANGLE_TOL: f64 = 1e-6;

pub type Frac = [f64; 3];

/// Periodic cell, rows of `matrix` are the lattice vectors in Å.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct Lattice {
    matrix: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

/// Lengths (Å) and angles (degrees) of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LatticeParams {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { a, b, c, alpha, beta, gamma }
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.alpha, self.beta, self.gamma]
    }
}

impl Lattice {
    /// Wraps an explicit row-vector matrix. The matrix is kept as given; it
    /// must be right-handed and non-degenerate.
    pub fn from_matrix(rows: [[f64; 3]; 3]) -> Result<Self> {
        let matrix = Matrix3::from_row_slice(&rows.concat());
        Self::from_nalgebra(matrix)
    }

    pub(crate) fn from_nalgebra(matrix: Matrix3<f64>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("lattice matrix has non-finite entries".into()));
        }
        let det = matrix.determinant();
        if !(det > 0.0) {
            return Err(Error::Geometry(format!(
                "lattice determinant {det} is not positive (singular or left-handed cell)"
            )));
        }
        let lattice = Self {
            matrix,
            inverse: matrix.try_inverse().ok_or_else(|| Error::Geometry("singular lattice".into()))?,
        };
        for angle in lattice.params().angles() {
            check_angle(angle)?;
        }
        Ok(lattice)
    }

    /// Canonical orientation: `a` along x, `b` in the xy-plane, right-handed.
    pub fn from_params(p: LatticeParams) -> Result<Self> {
        let LatticeParams { a, b, c, alpha, beta, gamma } = p;
        for len in [a, b, c] {
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::Geometry(format!("lattice length {len} must be positive")));
            }
        }
        for angle in [alpha, beta, gamma] {
            if !angle.is_finite() {
                return Err(Error::Geometry("non-finite lattice angle".into()));
            }
            check_angle(angle)?;
        }
        let (ca, cb, cg) = (alpha.to_radians().cos(), beta.to_radians().cos(), gamma.to_radians().cos());
        let sg = gamma.to_radians().sin();
        let cx = c * cb;
        let cy = c * (ca - cb * cg) / sg;
        let cz2 = c * c - cx * cx - cy * cy;
        // the Gram determinant, relative to c², measures realizability
        if !(cz2 > 1e-12 * c * c) {
            return Err(Error::Geometry(format!(
                "angles ({alpha}, {beta}, {gamma}) are not realizable as a cell"
            )));
        }
        let matrix = Matrix3::new(a, 0.0, 0.0, b * cg, b * sg, 0.0, cx, cy, cz2.sqrt());
        Self::from_nalgebra(matrix)
    }

    pub fn cubic(a: f64) -> Result<Self> {
        Self::from_params(LatticeParams::new(a, a, a, 90.0, 90.0, 90.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.inverse
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.matrix;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn vector(&self, i: usize) -> Vector3<f64> {
        self.matrix.row(i).transpose()
    }

    pub fn volume(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn params(&self) -> LatticeParams {
        let (va, vb, vc) = (self.vector(0), self.vector(1), self.vector(2));
        let angle = |u: &Vector3<f64>, v: &Vector3<f64>| {
            (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos().to_degrees()
        };
        LatticeParams {
            a: va.norm(),
            b: vb.norm(),
            c: vc.norm(),
            alpha: angle(&vb, &vc),
            beta: angle(&va, &vc),
            gamma: angle(&va, &vb),
        }
    }

    pub fn to_cartesian(&self, f: &Frac) -> Vector3<f64> {
        self.matrix.transpose() * Vector3::from(*f)
    }

    pub fn to_fractional(&self, r: &Vector3<f64>) -> Frac {
        let f = self.inverse.transpose() * r;
        [f.x, f.y, f.z]
    }

    /// Same cell expressed in the canonical orientation.
    pub fn canonical(&self) -> Result<Self> {
        Self::from_params(self.params())
    }

    /// Applies a Cartesian rotation (or any proper orthogonal map) to the cell.
    pub fn rotated(&self, rotation: &Matrix3<f64>) -> Result<Self> {
        Self::from_nalgebra(self.matrix * rotation.transpose())
    }
}

impl TryFrom<[[f64; 3]; 3]> for Lattice {
    type Error = Error;

    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_matrix(rows)
    }
}

impl From<Lattice> for [[f64; 3]; 3] {
    fn from(l: Lattice) -> Self {
        l.rows()
    }
}

fn check_angle(angle: f64) -> Result<()> {
    if angle <= DEGENERATE_ANGLE_TOL || angle >= 180.0 - DEGENERATE_ANGLE_TOL {
        return Err(Error::Geometry(format!("degenerate lattice angle {angle}")));
    }
    Ok(())
}

pub fn lattice_from_params(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Lattice> {
    Lattice::from_params(LatticeParams::new(a, b, c, alpha, beta, gamma))
}

pub fn params_from_matrix(lattice: &Lattice) -> LatticeParams {
    lattice.params()
}

/// Periodic wrap `r - floor(r)` of a single coordinate into `[0, 1)`.
#[inline]
pub fn wrap_scalar(x: f64) -> f64 {
    let w = x - x.floor();
    // tiny negative inputs round to exactly 1.0
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

#[inline]
pub fn wrap_frac(f: &Frac) -> Frac {
    [wrap_scalar(f[0]), wrap_scalar(f[1]), wrap_scalar(f[2])]
}

/// Imposes the periodic boundary on every row.
pub fn wrap_pi(r: &[Frac]) -> Result<Vec<Frac>> {
    if r.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("wrap_pi: non-finite coordinate".into()));
    }
    Ok(r.iter().map(wrap_frac).collect())
}

/// Shortest periodic displacement `b -> a` (Cartesian), searching image
/// translations in `[-1, 1]^3` around the wrapped fractional difference.
///
/// The window is exact only for reduced cells; callers holding an arbitrary
/// cell should go through [`MinImageFrame`].
pub fn min_image_vector(lattice: &Lattice, a: &Frac, b: &Frac) -> Vector3<f64> {
    let mut d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    for x in &mut d {
        *x -= x.round();
    }
    let base = lattice.to_cartesian(&d);
    let rows = [lattice.vector(0), lattice.vector(1), lattice.vector(2)];
    let mut best = base;
    let mut best_norm = base.norm_squared();
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let v = base + rows[0] * i as f64 + rows[1] * j as f64 + rows[2] * k as f64;
                let n = v.norm_squared();
                if n < best_norm {
                    best_norm = n;
                    best = v;
                }
            }
        }
    }
    best
}

/// Minimum-image distance in Å. See [`min_image_vector`] for the reduced-cell
/// precondition.
pub fn min_image_distance(lattice: &Lattice, a: &Frac, b: &Frac) -> f64 {
    min_image_vector(lattice, a, b).norm()
}

/// Minimum-image queries on an arbitrary cell via its Niggli-reduced basis.
#[derive(Debug, Clone)]
pub struct MinImageFrame {
    reduced: Lattice,
    to_reduced: Matrix3<f64>,
}

impl MinImageFrame {
    pub fn new(lattice: &Lattice) -> Result<Self> {
        let red = niggli_reduce_with_transform(lattice)?;
        Ok(Self {
            reduced: red.lattice,
            to_reduced: red.frac_map(),
        })
    }

    pub fn reduced(&self) -> &Lattice {
        &self.reduced
    }

    /// Fractional coordinates with respect to the reduced basis.
    pub fn to_reduced(&self, f: &Frac) -> Frac {
        let v = self.to_reduced.transpose() * Vector3::from(*f);
        [v.x, v.y, v.z]
    }

    pub fn distance(&self, a: &Frac, b: &Frac) -> f64 {
        self.vector(a, b).norm()
    }

    pub fn vector(&self, a: &Frac, b: &Frac) -> Vector3<f64> {
        min_image_vector(&self.reduced, &self.to_reduced(a), &self.to_reduced(b))
    }

    /// Length of the shortest non-zero lattice vector.
    pub fn shortest_lattice_vector(&self) -> f64 {
        (0..3).map(|i| self.reduced.vector(i).norm()).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_examples() {
        let w = wrap_pi(&[[1.25, -0.30, 0.0], [0.5, 0.5, 0.5], [-1e-9, 0.0, 0.0]]).unwrap();
        assert_relative_eq!(w[0][0], 0.25);
        assert_relative_eq!(w[0][1], 0.70, epsilon = 1e-15);
        assert_eq!(w[0][2], 0.0);
        assert_eq!(w[1], [0.5, 0.5, 0.5]);
        assert_eq!(w[2][0], 1.0 - 1e-9);
        assert!(wrap_pi(&[[f64::NAN, 0.0, 0.0]]).is_err());
        assert_eq!(wrap_scalar(-1e-20), 0.0);
    }

    #[test]
    fn cubic_and_hexagonal_params() {
        let l = lattice_from_params(2.0, 2.0, 2.0, 90.0, 90.0, 90.0).unwrap();
        let m = l.rows();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 2.0 } else { 0.0 };
                assert!((m[i][j] - expect).abs() < 1e-15);
            }
        }
        assert_relative_eq!(l.volume(), 8.0, epsilon = 1e-12);
        let hex = lattice_from_params(1.0, 1.0, 2.0, 90.0, 90.0, 120.0).unwrap();
        assert_relative_eq!(hex.volume(), 3f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn params_round_trip() {
        let p = LatticeParams::new(3.1, 4.2, 5.3, 80.0, 95.0, 100.0);
        let back = params_from_matrix(&Lattice::from_params(p).unwrap());
        for (x, y) in p.as_array().iter().zip(back.as_array()) {
            assert_relative_eq!(*x, y, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(lattice_from_params(1.0, 1.0, 1.0, 10.0, 10.0, 170.0).is_err());
        assert!(lattice_from_params(1.0, 1.0, 1.0, 90.0, 90.0, 180.0).is_err());
        assert!(lattice_from_params(-1.0, 1.0, 1.0, 90.0, 90.0, 90.0).is_err());
        assert!(Lattice::from_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]).is_err());
        assert!(Lattice::from_matrix([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn min_image_examples() {
        let l = Lattice::cubic(1.0).unwrap();
        assert_relative_eq!(min_image_distance(&l, &[0.1, 0.0, 0.0], &[0.9, 0.0, 0.0]), 0.2, epsilon = 1e-12);
        assert_eq!(min_image_distance(&l, &[0.3, 0.2, 0.7], &[0.3, 0.2, 0.7]), 0.0);

        let sheared = Lattice::from_matrix([[1.0, 0.0, 0.0], [0.9, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let (a, b) = ([0.0, 0.0, 0.0], [0.5, 0.5, 0.0]);
        let mut brute = f64::INFINITY;
        for i in -3..=3 {
            for j in -3..=3 {
                for k in -3..=3 {
                    let f = [b[0] - a[0] + i as f64, b[1] - a[1] + j as f64, b[2] - a[2] + k as f64];
                    brute = brute.min(sheared.to_cartesian(&f).norm());
                }
            }
        }
        assert_relative_eq!(min_image_distance(&sheared, &a, &b), brute, epsilon = 1e-12);
        let frame = MinImageFrame::new(&sheared).unwrap();
        assert_relative_eq!(frame.distance(&a, &b), brute, epsilon = 1e-12);
    }
}
