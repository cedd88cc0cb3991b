use dpcdvae::model::{reparameterize, train, DpCdvae, ModelConfig, TrainConfig};
use dpcdvae::io::{checkpoint, RunConfig};
use dpcdvae::schedule::ScheduleConfig;
use dpcdvae::synthetic::{dataset, Perturbation, Prototype};
use dpcdvae::{CrystalStructure, Lattice, LatticeParams};
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn model_for(data: &[CrystalStructure], seed: u64) -> DpCdvae {
    let mut config = ModelConfig { hidden_dim: 24, latent_dim: 8, num_layers: 2, encode_num_atoms: true, ..Default::default() };
    config.fit_to(data);
    DpCdvae::new(config, seed).unwrap()
}

fn triclinic_sample() -> CrystalStructure {
    let lattice = Lattice::from_params(LatticeParams::new(4.1, 4.7, 5.3, 82.0, 97.0, 104.0)).unwrap();
    // generic positions: neighbor truncation has no distance ties
    let frac = vec![[0.0513, 0.1172, 0.2049], [0.5631, 0.3917, 0.6178], [0.2874, 0.8106, 0.4433], [0.8219, 0.2641, 0.9092]];
    CrystalStructure::new(lattice, frac, vec![11, 17, 11, 17]).unwrap()
}

fn rotation() -> Matrix3<f64> {
    Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(0.3, -0.5, 0.8)), 1.1).into_inner()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn encoder_ignores_atom_order() {
    let s = triclinic_sample();
    let model = model_for(std::slice::from_ref(&s), 3);
    let (mu, lv) = model.encode(&s).unwrap();
    let (mu_p, lv_p) = model.encode(&s.permuted(&[2, 0, 3, 1])).unwrap();
    assert!(max_abs_diff(&mu, &mu_p) < 1e-12);
    assert!(max_abs_diff(&lv, &lv_p) < 1e-12);
}

#[test]
fn encoder_ignores_rotation() {
    let s = triclinic_sample();
    let model = model_for(std::slice::from_ref(&s), 4);
    let rotated = s.with_lattice(s.lattice().rotated(&rotation()).unwrap());
    let (mu, lv) = model.encode(&s).unwrap();
    let (mu_r, lv_r) = model.encode(&rotated).unwrap();
    assert!(max_abs_diff(&mu, &mu_r) < 1e-10);
    assert!(max_abs_diff(&lv, &lv_r) < 1e-10);
}

#[test]
fn denoiser_cartesian_output_rotates_with_the_cell() {
    let s = triclinic_sample();
    let model = model_for(std::slice::from_ref(&s), 5);
    let z: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.3).collect();
    let types = vec![0, 1, 0, 1];
    let r = rotation();
    let rotated = s.lattice().rotated(&r).unwrap();
    let cart = model.denoise_cartesian(s.lattice(), s.frac_coords(), &types, &z, 300, 1000).unwrap();
    let cart_r = model.denoise_cartesian(&rotated, s.frac_coords(), &types, &z, 300, 1000).unwrap();
    assert!(cart.iter().flatten().any(|x| x.abs() > 1e-6));
    for (a, b) in cart.iter().zip(&cart_r) {
        let expect = r * Vector3::from(*a);
        for k in 0..3 {
            assert!((expect[k] - b[k]).abs() < 1e-10, "{expect:?} vs {b:?}");
        }
    }
    // the fractional estimate is rotation invariant
    let (eps, logits) = model.denoise(s.lattice(), s.frac_coords(), &types, &z, 300, 1000).unwrap();
    let (eps_r, logits_r) = model.denoise(&rotated, s.frac_coords(), &types, &z, 300, 1000).unwrap();
    assert!(max_abs_diff(&eps.concat(), &eps_r.concat()) < 1e-10);
    assert!(max_abs_diff(&logits.concat(), &logits_r.concat()) < 1e-10);
}

#[test]
fn denoiser_ignores_lattice_translations() {
    let s = triclinic_sample();
    let model = model_for(std::slice::from_ref(&s), 6);
    let graph = dpcdvae::lattice::build_periodic_graph(&s, 7.0, usize::MAX).unwrap();
    for m in 0..s.num_atoms() {
        let mut d: Vec<f64> = graph.edges.iter().filter(|e| e.dst == m && e.src != m).map(|e| e.distance).collect();
        d.sort_by(f64::total_cmp);
        assert!(d.windows(2).all(|w| w[1] - w[0] > 1e-9));
    }
    let z = vec![0.2; 8];
    let types = vec![0, 1, 1, 0];
    let shifts = [[1.0, 0.0, -2.0], [0.0, 3.0, 1.0], [-1.0, -1.0, 0.0], [2.0, 0.0, 0.0]];
    let moved: Vec<[f64; 3]> = s.frac_coords().iter().zip(&shifts).map(|(f, d)| std::array::from_fn(|k| f[k] + d[k])).collect();
    let (eps, logits) = model.denoise(s.lattice(), s.frac_coords(), &types, &z, 10, 1000).unwrap();
    let (eps_m, logits_m) = model.denoise(s.lattice(), &moved, &types, &z, 10, 1000).unwrap();
    let d = max_abs_diff(&eps.concat(), &eps_m.concat());
    assert!(d < 1e-9, "{d}");
    assert!(max_abs_diff(&logits.concat(), &logits_m.concat()) < 1e-9);
}

#[test]
fn denoiser_without_edges_predicts_zero_noise() {
    // a 40 Å cell holds no neighbor within the default 7 Å cutoff
    let s = CrystalStructure::new(Lattice::cubic(40.0).unwrap(), vec![[0.0; 3], [0.5, 0.5, 0.5]], vec![11, 17]).unwrap();
    let model = model_for(std::slice::from_ref(&s), 7);
    let (eps, logits) = model.denoise(s.lattice(), s.frac_coords(), &[0, 1], &[0.0; 8], 500, 1000).unwrap();
    assert!(eps.iter().flatten().all(|&x| x == 0.0));
    assert!(logits.iter().flatten().all(|x| x.is_finite()));
}

#[test]
fn reparameterized_latents_have_the_expected_spread() {
    let mu = [0.5, -1.0, 0.0];
    let logvar = [-0.7, 0.0, 0.4];
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    for _ in 0..n {
        let eps: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
        let z = reparameterize(&mu, &logvar, &eps).unwrap();
        for k in 0..3 {
            sum[k] += z[k];
            sq[k] += z[k] * z[k];
        }
    }
    for k in 0..3 {
        let mean = sum[k] / n as f64;
        let var = sq[k] / n as f64 - mean * mean;
        let expect_var = (2.0 * logvar[k]).exp();
        assert!((mean - mu[k]).abs() < 4.0 * (expect_var / n as f64).sqrt(), "mean {mean}");
        // standard error of a normal sample variance is var·√(2/n)
        assert!((var - expect_var).abs() < 4.0 * expect_var * (2.0 / n as f64).sqrt(), "var {var} vs {expect_var}");
    }
}

#[test]
fn training_reduces_loss_and_is_reproducible() {
    let data = dataset(24, &Perturbation::default(), 2).unwrap();
    let schedule = ScheduleConfig::default().build().unwrap();
    let cfg = TrainConfig { epochs: 30, batch_size: 8, learning_rate: 3e-3, seed: 4, ..Default::default() };
    let run = || {
        let mut m = model_for(&data, 1);
        let h = train(&mut m, &data, &schedule, &cfg, |_, _| Ok(())).unwrap();
        (m, h)
    };
    let (a, ha) = run();
    let (b, hb) = run();
    assert_eq!(ha, hb);
    let run_cfg = RunConfig { model: a.config().clone(), ..Default::default() };
    assert_eq!(checkpoint::encode(&run_cfg, a.params()).unwrap(), checkpoint::encode(&run_cfg, b.params()).unwrap());
    let first = ha.epochs.first().unwrap().loss.total;
    let last = ha.epochs.last().unwrap().loss.total;
    assert!(last < 0.7 * first, "{first} -> {last}");
}

#[test]
fn decoded_heads_respect_ranges() {
    let data = vec![Prototype::RockSalt.ideal().unwrap(), Prototype::SimpleCubic.ideal().unwrap()];
    let model = model_for(&data, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let z: Vec<f64> = (0..8).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let d = model.decode_heads(&z).unwrap();
        let p = d.lattice.params();
        assert!(p.lengths().iter().all(|&x| x > 0.0));
        assert!(p.angles().iter().all(|&x| (30.0..=150.0).contains(&x)));
        assert!((1..=8).contains(&d.num_atoms));
        assert!((d.composition.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
