use dpcdvae::diffusion::{
    forward_perturb, perturb_types, reverse_step_periodic, sample_trajectory, standard_normal_rows, type_probabilities,
    NoisePredictor, ReverseVariant, SamplerOptions,
};
use dpcdvae::lattice::{build_periodic_graph, wrap_frac, Frac};
use dpcdvae::schedule::{NoiseSchedule, ScheduleConfig};
use dpcdvae::synthetic::{dataset, Perturbation};
use dpcdvae::{Lattice, LatticeParams, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn schedule() -> NoiseSchedule {
    ScheduleConfig::default().build().unwrap()
}

/// Returns exactly the noise that maps a fixed target onto the current
/// wrapped coordinates, and logits favouring the target types.
struct Oracle<'a> {
    target: &'a [Frac],
    types: &'a [usize],
    schedule: &'a NoiseSchedule,
}

impl NoisePredictor for Oracle<'_> {
    fn predict(&self, _: &Lattice, frac: &[Frac], _: &[usize], t: usize) -> Result<(Vec<Frac>, Vec<Vec<f64>>)> {
        let ab = self.schedule.alpha_bar(t);
        let eps = frac
            .iter()
            .zip(self.target)
            .map(|(f, x)| std::array::from_fn(|k| (f[k] - ab.sqrt() * x[k]) / (1.0 - ab).sqrt()))
            .collect();
        let logits = self.types.iter().map(|&i| if i == 0 { vec![2.0, 0.0] } else { vec![0.0, 2.0] }).collect();
        Ok((eps, logits))
    }
}

#[test]
fn oracle_trajectory_lands_on_the_target() {
    let s = schedule();
    let target = vec![[0.1, 0.2, 0.3], [0.6, 0.95, 0.0], [0.33, 0.5, 0.75]];
    let types = vec![1, 0, 1];
    let oracle = Oracle { target: &target, types: &types, schedule: &s };
    let lattice = Lattice::cubic(5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let options = SamplerOptions { variant: ReverseVariant::Periodic, langevin_noise: false };
    let out = sample_trajectory(&oracle, &lattice, vec![0, 0, 0], &[11, 17], &s, &mut rng, options).unwrap();
    for (a, b) in out.frac_coords().iter().zip(&target) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-10, "{a:?} vs {b:?}");
        }
    }
    assert_eq!(out.atomic_numbers(), &[17, 11, 17]);
}

#[test]
fn sampled_coordinates_stay_in_the_cell() {
    let s = schedule();
    let target = vec![[0.5; 3]; 4];
    let types = vec![0; 4];
    let oracle = Oracle { target: &target, types: &types, schedule: &s };
    let lattice = Lattice::cubic(4.0).unwrap();
    for variant in [ReverseVariant::Periodic, ReverseVariant::Standard] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let options = SamplerOptions { variant, langevin_noise: true };
        let out = sample_trajectory(&oracle, &lattice, vec![0; 4], &[11, 17], &s, &mut rng, options).unwrap();
        assert!(out.frac_coords().iter().flatten().all(|x| (0.0..1.0).contains(x)));
    }
}

#[test]
fn periodic_step_commutes_with_shifts() {
    let s = schedule();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let zeros = vec![[0.0; 3]; 16];
    for t in [1, 37, 250, 500, 999] {
        let ab = s.alpha_bar(t);
        let r_f: Vec<Frac> = (0..16).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let eps = standard_normal_rows(16, &mut rng);
        let shift: Frac = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let shifted_in: Vec<Frac> = r_f.iter().map(|f| wrap_frac(&std::array::from_fn(|k| f[k] + shift[k]))).collect();
        let (base, _) = reverse_step_periodic(&r_f, &eps, t, &s, &zeros).unwrap();
        let (_, got) = reverse_step_periodic(&shifted_in, &eps, t, &s, &zeros).unwrap();
        for i in 0..16 {
            // wrapping the shifted input adds an integer k, which the step scales by 1/√ᾱ
            let k_wrap: Frac = std::array::from_fn(|k| (shifted_in[i][k] - r_f[i][k] - shift[k]).round());
            let expect = wrap_frac(&std::array::from_fn(|k| base[i][k] + (shift[k] + k_wrap[k]) / ab.sqrt()));
            for k in 0..3 {
                let d = (got[i][k] - expect[k]).abs();
                assert!(d.min(1.0 - d) < 1e-10, "t={t}: {got:?} vs {expect:?}");
                if k_wrap[k] == 0.0 {
                    let plain = wrap_frac(&std::array::from_fn(|j| base[i][j] + shift[j] / ab.sqrt()))[k];
                    let d = (got[i][k] - plain).abs();
                    assert!(d.min(1.0 - d) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn unperturbed_type_probability() {
    // σ′ = 0 leaves softmax(1, 0)
    let p = type_probabilities(&[1.0, 0.0], &[0.3, 0.7], 0.0);
    let e = std::f64::consts::E;
    assert!((p[0] - e / (e + 1.0)).abs() < 1e-15);

    // a uniform A_z shifts every logit equally, so the empirical rate matches
    let s = schedule();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = vec![vec![1.0, 0.0]; 100_000];
    let z = perturb_types(&a, &[0.5, 0.5], 1000, &s, &mut rng).unwrap();
    let rate = z.iter().filter(|&&i| i == 0).count() as f64 / z.len() as f64;
    let p0 = e / (e + 1.0);
    assert!((rate - p0).abs() < 4.0 * (p0 * (1.0 - p0) / 1e5).sqrt(), "{rate}");
}

#[test]
fn perturb_types_is_seeded() {
    let s = schedule();
    let a = vec![vec![0.0, 1.0, 0.0]; 50];
    let draw = |seed| perturb_types(&a, &[0.2, 0.3, 0.5], 600, &s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    assert_eq!(draw(1), draw(1));
    assert!(perturb_types(&a, &[0.5, 0.5], 600, &s, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
}

#[test]
fn forward_process_is_exact_for_given_noise() {
    let s = schedule();
    let r0 = vec![[0.9, 0.1, 0.5]];
    let eps = vec![[1.5, -2.0, 0.25]];
    let st = forward_perturb(&r0, 400, &s, &eps).unwrap();
    let ab = s.alpha_bar(400);
    for k in 0..3 {
        let expect = ab.sqrt() * r0[0][k] + (1.0 - ab).sqrt() * eps[0][k];
        assert_eq!(st.r[0][k], expect);
        assert_eq!(st.r_f[0][k], expect - expect.floor());
    }
    assert!(forward_perturb(&r0, 0, &s, &eps).is_err());
    assert!(forward_perturb(&r0, 1001, &s, &eps).is_err());
}

#[test]
fn graph_edges_match_recomputed_geometry() {
    let mut data = dataset(12, &Perturbation::default(), 6).unwrap();
    let skew = Lattice::from_params(LatticeParams::new(3.9, 4.6, 5.2, 70.0, 105.0, 118.0)).unwrap();
    data.push(data[3].with_lattice(skew));
    for s in &data {
        let g = build_periodic_graph(s, 6.0, 12).unwrap();
        let rows = s.lattice().rows();
        let f = s.frac_coords();
        for e in &g.edges {
            let d: Frac = std::array::from_fn(|k| f[e.dst][k] - f[e.src][k] + e.image[k] as f64);
            let v: Frac = std::array::from_fn(|c| (0..3).map(|r| d[r] * rows[r][c]).sum());
            let dist = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            for k in 0..3 {
                assert!((v[k] - e.vector[k]).abs() < 1e-12);
            }
            assert!((dist - e.distance).abs() < 1e-12);
            assert!(e.distance <= 6.0);
        }
        // every edge has its reverse
        for e in &g.edges {
            let back = [-e.image[0], -e.image[1], -e.image[2]];
            assert!(g.edges.iter().any(|b| b.dst == e.src && b.src == e.dst && b.image == back));
        }
    }
}
