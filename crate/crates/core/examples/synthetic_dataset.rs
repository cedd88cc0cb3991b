//! Writes a toy dataset of perturbed cubic Na/Cl structures as JSONL.
//!
//!     cargo run --release --example synthetic_dataset -- data.jsonl 500 7

use std::path::PathBuf;

use dpcdvae::io::write_structures;
use dpcdvae::synthetic::{dataset, Perturbation};

fn main() -> dpcdvae::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map_or("synthetic.jsonl", String::as_str));
    let count: usize = args.get(1).map_or(Ok(500), |s| s.parse()).expect("count must be an integer");
    let seed: u64 = args.get(2).map_or(Ok(7), |s| s.parse()).expect("seed must be an integer");

    let structures = dataset(count, &Perturbation::default(), seed)?;
    write_structures(&out, &structures)?;
    let atoms: usize = structures.iter().map(|s| s.num_atoms()).sum();
    println!("wrote {} structures ({atoms} atoms) to {}", structures.len(), out.display());
    Ok(())
}
