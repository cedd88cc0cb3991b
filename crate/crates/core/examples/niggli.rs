//! Niggli reduction of a deliberately sheared cell, and remapping its atoms
//! onto the reduced basis.

use dpcdvae::lattice::{niggli_reduce_with_transform, CrystalStructure};
use dpcdvae::model::preprocess;
use dpcdvae::Lattice;

fn main() -> dpcdvae::Result<()> {
    // a simple cubic 3 Å cell written with a = a0 + 2 b0 + c0 and b = b0 - c0
    let skewed = Lattice::from_matrix([[3.0, 6.0, 3.0], [0.0, 3.0, -3.0], [0.0, 0.0, 3.0]])?;
    let red = niggli_reduce_with_transform(&skewed)?;
    println!("input   {:?}", skewed.params().as_array());
    println!("reduced {:?}", red.lattice.params().as_array());
    println!("transform {:?}", red.transform);
    println!("volume {:.6} -> {:.6}", skewed.volume(), red.lattice.volume());

    let s = CrystalStructure::new(skewed, vec![[0.0, 0.0, 0.0], [0.5, 0.25, 0.75]], vec![11, 17])?;
    let p = preprocess(&s)?;
    println!("remapped sites:");
    for (f, z) in p.frac_coords().iter().zip(p.atomic_numbers()) {
        println!("  Z={z:2} {f:?}");
    }
    Ok(())
}
