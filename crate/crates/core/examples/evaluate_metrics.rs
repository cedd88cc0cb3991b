//! Metrics on hand-made structure sets: matching, validity, coverage,
//! property statistics and the ground-state comparison. Also prints the
//! fingerprint distances between and within prototypes that the default
//! coverage thresholds were chosen from.

use dpcdvae::metrics::coverage::{composition_distance, structure_distance};
use dpcdvae::metrics::{
    fingerprint, generation_report, ground_state_compare, reconstruction_report, structure_match, CoverageThresholds,
    MatchCriteria,
};
use dpcdvae::synthetic::{dataset, perturbed, Perturbation, Prototype};
use dpcdvae::CrystalStructure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dpcdvae::Result<()> {
    let criteria = MatchCriteria::default();
    let reference = dataset(40, &Perturbation::default(), 11)?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);

    // a re-drawn sample of each reference's prototype should match it
    let redrawn: Vec<CrystalStructure> = (0..reference.len())
        .map(|i| perturbed(Prototype::ALL[i % 4], &Perturbation::default(), &mut rng))
        .collect::<dpcdvae::Result<_>>()?;
    let recon = reconstruction_report(&redrawn, &reference, &criteria)?;
    println!("re-drawn vs reference: {}", serde_json::to_string(&recon).expect("json"));

    let shifted = Prototype::RockSalt.ideal()?.translated([0.13, 0.4, 0.77]);
    println!(
        "ideal rock salt vs shifted copy: δ = {:?}",
        structure_match(&Prototype::RockSalt.ideal()?, &shifted, &criteria)?
    );
    println!(
        "simple cubic vs CsCl: {:?}",
        structure_match(&Prototype::SimpleCubic.ideal()?, &Prototype::CesiumChloride.ideal()?, &criteria)?
    );

    // only two of the four prototypes: recall drops, precision stays
    let partial: Vec<CrystalStructure> = redrawn.iter().step_by(2).cloned().collect();
    let gen = generation_report(&partial, &reference, &CoverageThresholds::default())?;
    println!("generation (half the prototypes): {}", serde_json::to_string(&gen).expect("json"));

    let energies_ref: Vec<f64> = (0..reference.len()).map(|i| -3.0 - 0.01 * i as f64).collect();
    let energies_gen: Vec<f64> = energies_ref.iter().map(|e| e + 0.02).collect();
    let gs = ground_state_compare(&redrawn, &reference, &energies_gen, &energies_ref, &criteria)?;
    println!("ground state: {}", serde_json::to_string(&gs).expect("json"));

    println!("fingerprint distances (min / max) by prototype pair:");
    let fps: Vec<_> = reference.iter().map(fingerprint).collect();
    for a in 0..4 {
        for b in a..4 {
            let (mut s_lo, mut s_hi, mut c_hi) = (f64::INFINITY, 0.0f64, 0.0f64);
            let mut c_lo = f64::INFINITY;
            for i in (a..fps.len()).step_by(4) {
                for j in (b..fps.len()).step_by(4) {
                    if i == j {
                        continue;
                    }
                    let s = structure_distance(&fps[i], &fps[j]);
                    let c = composition_distance(&fps[i], &fps[j]);
                    (s_lo, s_hi) = (s_lo.min(s), s_hi.max(s));
                    (c_lo, c_hi) = (c_lo.min(c), c_hi.max(c));
                }
            }
            println!(
                "  {:?} / {:?}: structure {s_lo:.3}..{s_hi:.3}  composition {c_lo:.3}..{c_hi:.3}",
                Prototype::ALL[a],
                Prototype::ALL[b]
            );
        }
    }
    Ok(())
}
