//! Periodic wrapping and minimum-image distances on a skewed cell.

use dpcdvae::lattice::{min_image_distance, wrap_pi, MinImageFrame};
use dpcdvae::{Lattice, LatticeParams};

fn main() -> dpcdvae::Result<()> {
    let raw = vec![[1.25, -0.1, 3.0], [-2.5, 0.999_999, -1e-17]];
    for (r, w) in raw.iter().zip(wrap_pi(&raw)?) {
        println!("{r:?} -> {w:?}");
    }

    let lattice = Lattice::from_params(LatticeParams::new(4.0, 5.0, 6.0, 75.0, 100.0, 115.0))?;
    let (a, b) = ([0.02, 0.03, 0.97], [0.96, 0.99, 0.05]);
    let direct = (lattice.to_cartesian(&a) - lattice.to_cartesian(&b)).norm();

    // min_image_distance assumes a reduced cell; the frame reduces first
    let frame = MinImageFrame::new(&lattice)?;
    println!("in-cell separation   {direct:.4} Å");
    println!("minimum image        {:.4} Å", frame.distance(&a, &b));
    println!("reduced cell lengths {:?}", frame.reduced().params().lengths());
    println!("shortest lattice vec {:.4} Å", frame.shortest_lattice_vector());

    let cubic = Lattice::cubic(3.0)?;
    println!("cubic 3 Å, 0.1 vs 0.9 along a: {:.4} Å", min_image_distance(&cubic, &[0.1, 0.0, 0.0], &[0.9, 0.0, 0.0]));
    Ok(())
}
