//! Periodic neighbor graphs over translated images.

use std::cmp::Ordering;
use std::collections::HashSet;

use super::{CrystalStructure, Frac, Lattice};
use crate::error::{Error, Result};

/// Pairs closer than this (Å) are treated as overlapping atoms.
const OVERLAP_TOL: f64 = 1e-8;

/// Directed edge `n -> m` through image `image`; `vector = r_m - r_n + image·L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Receiving atom `m`.
    pub dst: usize,
    /// Neighbor atom `n`.
    pub src: usize,
    pub image: [i32; 3],
    pub vector: [f64; 3],
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGraph {
    pub num_nodes: usize,
    pub cutoff: f64,
    pub edges: Vec<Edge>,
}

impl PeriodicGraph {
    pub fn dst_indices(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.dst).collect()
    }

    pub fn src_indices(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.src).collect()
    }
}

/// All image pairs within `cutoff`, truncated to the `max_neighbors` nearest
/// per receiving atom (ties by distance, then image, then neighbor index) and
/// symmetrized by union.
pub fn build_periodic_graph(structure: &CrystalStructure, cutoff: f64, max_neighbors: usize) -> Result<PeriodicGraph> {
    build_graph_from_parts(structure.lattice(), structure.frac_coords(), cutoff, max_neighbors)
}

pub(crate) fn build_graph_from_parts(
    lattice: &Lattice,
    frac: &[Frac],
    cutoff: f64,
    max_neighbors: usize,
) -> Result<PeriodicGraph> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} must be positive")));
    }
    let n = frac.len();
    let inv = lattice.inverse();
    // max |fractional component k| of any vector with length <= cutoff
    let reach: Vec<f64> = (0..3).map(|k| cutoff * inv.column(k).norm()).collect();
    let rows = lattice.rows();

    let mut per_node: Vec<Vec<Edge>> = vec![Vec::new(); n];
    for m in 0..n {
        for j in 0..n {
            let d = [frac[m][0] - frac[j][0], frac[m][1] - frac[j][1], frac[m][2] - frac[j][2]];
            let lo: Vec<i32> = (0..3).map(|k| (-d[k] - reach[k]).ceil() as i32).collect();
            let hi: Vec<i32> = (0..3).map(|k| (-d[k] + reach[k]).floor() as i32).collect();
            for a in lo[0]..=hi[0] {
                for b in lo[1]..=hi[1] {
                    for c in lo[2]..=hi[2] {
                        if m == j && a == 0 && b == 0 && c == 0 {
                            continue;
                        }
                        let f = [d[0] + a as f64, d[1] + b as f64, d[2] + c as f64];
                        let v = [
                            f[0] * rows[0][0] + f[1] * rows[1][0] + f[2] * rows[2][0],
                            f[0] * rows[0][1] + f[1] * rows[1][1] + f[2] * rows[2][1],
                            f[0] * rows[0][2] + f[1] * rows[1][2] + f[2] * rows[2][2],
                        ];
                        let dist = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                        if dist < OVERLAP_TOL {
                            return Err(Error::DegenerateStructure(m.min(j), m.max(j)));
                        }
                        if dist <= cutoff {
                            per_node[m].push(Edge { dst: m, src: j, image: [a, b, c], vector: v, distance: dist });
                        }
                    }
                }
            }
        }
    }

    let mut keep: HashSet<(usize, usize, [i32; 3])> = HashSet::new();
    for edges in &mut per_node {
        edges.sort_by(edge_order);
        for e in edges.iter().take(max_neighbors) {
            keep.insert((e.dst, e.src, e.image));
            keep.insert((e.src, e.dst, [-e.image[0], -e.image[1], -e.image[2]]));
        }
    }
    let mut edges: Vec<Edge> = per_node
        .into_iter()
        .flatten()
        .filter(|e| keep.contains(&(e.dst, e.src, e.image)))
        .collect();
    edges.sort_by(|a, b| a.dst.cmp(&b.dst).then_with(|| edge_order(a, b)));
    Ok(PeriodicGraph { num_nodes: n, cutoff, edges })
}

fn edge_order(a: &Edge, b: &Edge) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.image.cmp(&b.image))
        .then_with(|| a.src.cmp(&b.src))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cubic(a: f64, frac: Vec<Frac>, z: Vec<u8>) -> CrystalStructure {
        CrystalStructure::new(Lattice::cubic(a).unwrap(), frac, z).unwrap()
    }

    #[test]
    fn simple_cubic_face_neighbors() {
        let s = cubic(3.0, vec![[0.0; 3]], vec![6]);
        let g = build_periodic_graph(&s, 3.1, 12).unwrap();
        assert_eq!(g.edges.len(), 6);
        for e in &g.edges {
            assert_eq!((e.dst, e.src), (0, 0));
            assert_relative_eq!(e.distance, 3.0, epsilon = 1e-12);
            assert_eq!(e.image.iter().map(|x| x.abs()).sum::<i32>(), 1);
        }
    }

    #[test]
    fn distant_pair_has_no_edge() {
        // 5 Å apart along z in a 10 x 10 x 20 box; nearest images are further
        let l = Lattice::from_params(crate::lattice::LatticeParams::new(10.0, 10.0, 20.0, 90.0, 90.0, 90.0)).unwrap();
        let s = CrystalStructure::new(l, vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.25]], vec![6, 6]).unwrap();
        let g = build_periodic_graph(&s, 4.0, 12).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn short_cutoff_gives_empty_graph() {
        let s = cubic(1.0, vec![[0.0; 3], [0.5, 0.0, 0.0]], vec![6, 8]);
        let g = build_periodic_graph(&s, 0.4, 12).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn overlapping_atoms_are_rejected() {
        let s = cubic(4.0, vec![[0.1; 3], [0.1; 3]], vec![6, 6]);
        assert!(matches!(build_periodic_graph(&s, 3.0, 12), Err(Error::DegenerateStructure(0, 1))));
    }

    #[test]
    fn truncation_keeps_symmetry() {
        let s = cubic(
            4.1,
            vec![[0.0; 3], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.13, 0.77, 0.31]],
            vec![29, 29, 29, 29, 8],
        );
        let g = build_periodic_graph(&s, 6.0, 5).unwrap();
        let set: HashSet<_> = g.edges.iter().map(|e| (e.dst, e.src, e.image)).collect();
        for e in &g.edges {
            assert!(set.contains(&(e.src, e.dst, [-e.image[0], -e.image[1], -e.image[2]])));
            assert!(e.distance > 0.0 && e.distance <= 6.0);
        }
    }
}
