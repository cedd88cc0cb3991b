//! Krivy–Gruber Niggli reduction with an explicit integer change of basis.

use nalgebra::Matrix3;

use super::Lattice;
use crate::error::{Error, Result};

/// Relative tolerance; scaled by `V^(1/3)` like the usual implementations.
pub const NIGGLI_TOL: f64 = 1e-5;
pub const NIGGLI_MAX_ITER: usize = 100;

type IMat = [[i64; 3]; 3];

const IDENTITY: IMat = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

/// Result of a reduction. `transform` acts on the row-vector matrix:
/// `reduced = transform · original`.
#[derive(Debug, Clone, PartialEq)]
pub struct NiggliReduction {
    pub lattice: Lattice,
    pub transform: [[i64; 3]; 3],
}

impl NiggliReduction {
    /// Matrix `M` with `f_reduced = f_original · M` for fractional row vectors.
    pub fn frac_map(&self) -> Matrix3<f64> {
        to_f64(&self.transform).try_inverse().expect("unimodular transform")
    }
}

pub fn niggli_reduce(lattice: &Lattice) -> Result<Lattice> {
    Ok(niggli_reduce_with_transform(lattice)?.lattice)
}

pub fn niggli_reduce_with_transform(lattice: &Lattice) -> Result<NiggliReduction> {
    let original = *lattice.matrix();
    let eps = NIGGLI_TOL * lattice.volume().cbrt();

    let mut t = size_reduce(&original);
    let mut converged = false;
    for _ in 0..NIGGLI_MAX_ITER {
        let (a, b, _, xi, eta, _) = gram(&t, &original);
        // A1
        if a > b + eps || ((a - b).abs() <= eps && xi.abs() > eta.abs() + eps) {
            apply(&mut t, [[0, -1, 0], [-1, 0, 0], [0, 0, -1]]);
        }
        let (_, b, c, _, eta, zeta) = gram(&t, &original);
        // A2
        if b > c + eps || ((b - c).abs() <= eps && eta.abs() > zeta.abs() + eps) {
            apply(&mut t, [[-1, 0, 0], [0, 0, -1], [0, -1, 0]]);
            continue;
        }

        let (_, _, _, xi, eta, zeta) = gram(&t, &original);
        let sgn = |x: f64| -> i64 {
            if x.abs() <= eps {
                0
            } else if x > 0.0 {
                1
            } else {
                -1
            }
        };
        let (l, m, n) = (sgn(xi), sgn(eta), sgn(zeta));
        if l * m * n == 1 {
            // A3
            let f = |s: i64| if s == -1 { -1 } else { 1 };
            apply(&mut t, diag(f(l), f(m), f(n)));
        } else {
            // A4
            let f = |s: i64| if s == 1 { -1 } else { 1 };
            let (mut i, mut j, mut k) = (f(l), f(m), f(n));
            if i * j * k == -1 {
                if n == 0 {
                    k = -1;
                } else if m == 0 {
                    j = -1;
                } else if l == 0 {
                    i = -1;
                }
            }
            if i * j * k == 1 {
                apply(&mut t, diag(i, j, k));
            }
        }

        let (a, b, _, xi, eta, zeta) = gram(&t, &original);
        // A5
        if xi.abs() > b + eps || ((xi - b).abs() <= eps && 2.0 * eta < zeta - eps) || ((xi + b).abs() <= eps && zeta < -eps)
        {
            let s = if xi > 0.0 { 1 } else { -1 };
            apply(&mut t, [[1, 0, 0], [0, 1, -s], [0, 0, 1]]);
            continue;
        }
        // A6
        if eta.abs() > a + eps || ((eta - a).abs() <= eps && 2.0 * xi < zeta - eps) || ((eta + a).abs() <= eps && zeta < -eps)
        {
            let s = if eta > 0.0 { 1 } else { -1 };
            apply(&mut t, [[1, 0, -s], [0, 1, 0], [0, 0, 1]]);
            continue;
        }
        // A7
        if zeta.abs() > a + eps || ((zeta - a).abs() <= eps && 2.0 * xi < eta - eps) || ((zeta + a).abs() <= eps && eta < -eps)
        {
            let s = if zeta > 0.0 { 1 } else { -1 };
            apply(&mut t, [[1, -s, 0], [0, 1, 0], [0, 0, 1]]);
            continue;
        }
        // A8
        let sum = xi + eta + zeta + a + b;
        if sum < -eps || (sum.abs() <= eps && 2.0 * (a + eta) + zeta > eps) {
            apply(&mut t, [[1, 0, 1], [0, 1, 1], [0, 0, 1]]);
            continue;
        }
        converged = true;
        break;
    }
    if !converged {
        return Err(Error::Reduction(NIGGLI_MAX_ITER));
    }
    // t is the column-convention change of basis; rows transform with its transpose
    let transform = transpose(&t);
    let lattice = Lattice::from_nalgebra(to_f64(&transform) * original)?;
    Ok(NiggliReduction { lattice, transform })
}

/// Greedy pairwise size reduction so the Krivy–Gruber loop starts from a
/// short basis; returns the column-convention transform.
fn size_reduce(original: &Matrix3<f64>) -> IMat {
    let mut t = IDENTITY;
    for _ in 0..1000 {
        let mut changed = false;
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let m = to_f64(&transpose(&t)) * original;
                let (vi, vj) = (m.row(i), m.row(j));
                let q = (vi.dot(&vj) / vj.norm_squared()).round();
                if q != 0.0 && (vi - vj * q).norm_squared() < vi.norm_squared() * (1.0 - 1e-12) {
                    // column i of t -= q * column j
                    let q = q as i64;
                    for row in &mut t {
                        row[i] -= q * row[j];
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    t
}

fn gram(t: &IMat, original: &Matrix3<f64>) -> (f64, f64, f64, f64, f64, f64) {
    let m = to_f64(&transpose(t)) * original;
    let g = m * m.transpose();
    (g[(0, 0)], g[(1, 1)], g[(2, 2)], 2.0 * g[(1, 2)], 2.0 * g[(0, 2)], 2.0 * g[(0, 1)])
}

fn apply(t: &mut IMat, m: IMat) {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| t[i][k] * m[k][j]).sum();
        }
    }
    *t = out;
}

fn diag(i: i64, j: i64, k: i64) -> IMat {
    [[i, 0, 0], [0, j, 0], [0, 0, k]]
}

fn transpose(m: &IMat) -> IMat {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

fn to_f64(m: &IMat) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j] as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::lattice_from_params;
    use approx::assert_relative_eq;

    fn det(m: &IMat) -> i64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn cubic_is_already_reduced() {
        let l = lattice_from_params(2.0, 2.0, 2.0, 90.0, 90.0, 90.0).unwrap();
        let r = niggli_reduce(&l).unwrap().params();
        for x in r.lengths() {
            assert_relative_eq!(x, 2.0, max_relative = 1e-12);
        }
        for x in r.angles() {
            assert_relative_eq!(x, 90.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn sheared_square_basis() {
        let l = Lattice::from_matrix([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let red = niggli_reduce_with_transform(&l).unwrap();
        let p = red.lattice.params();
        for x in p.lengths() {
            assert_relative_eq!(x, 1.0, max_relative = 1e-12);
        }
        for x in p.angles() {
            assert_relative_eq!(x, 90.0, max_relative = 1e-10);
        }
        assert_eq!(det(&red.transform), 1);
    }

    #[test]
    fn brute_force_unimodular_search_agrees() {
        // shortest basis reachable with entries in [-2, 2]
        let l = Lattice::from_matrix([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let m = l.matrix();
        let mut best = f64::INFINITY;
        let range = -2i64..=2;
        let mut vecs = Vec::new();
        for i in range.clone() {
            for j in range.clone() {
                for k in range.clone() {
                    if (i, j, k) != (0, 0, 0) {
                        vecs.push([i, j, k]);
                    }
                }
            }
        }
        for a in &vecs {
            for b in &vecs {
                for c in &vecs {
                    let u = [*a, *b, *c];
                    if det(&u).abs() != 1 {
                        continue;
                    }
                    let rows = to_f64(&u) * m;
                    let s: f64 = (0..3).map(|r| rows.row(r).norm()).sum();
                    best = best.min(s);
                }
            }
        }
        let red = niggli_reduce(&l).unwrap().params();
        assert_relative_eq!(red.a + red.b + red.c, best, max_relative = 1e-12);
    }

    #[test]
    fn badly_skewed_cell_converges() {
        let l = Lattice::from_matrix([[1.0, 0.0, 0.0], [37.0, 1.1, 0.0], [-12.0, 25.3, 0.9]]).unwrap();
        let red = niggli_reduce_with_transform(&l).unwrap();
        assert_relative_eq!(red.lattice.volume(), l.volume(), max_relative = 1e-9);
        assert_eq!(det(&red.transform), 1);
        let p = red.lattice.params();
        assert!(p.a <= p.b + 1e-9 && p.b <= p.c + 1e-9);
    }
}
