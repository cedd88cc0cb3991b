//! Trains briefly, then reconstructs held-out structures with both reverse
//! updates and compares match rates.
//!
//!     cargo run --release --example reconstruct -- 80 200

use dpcdvae::diffusion::ReverseVariant;
use dpcdvae::io::{RunConfig, SamplerConfig};
use dpcdvae::metrics::reconstruction_report;
use dpcdvae::model::{train, DpCdvae};
use dpcdvae::pipeline::reconstruct_all;
use dpcdvae::synthetic::{dataset, Perturbation};

fn main() -> dpcdvae::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let epochs: usize = args.first().map_or(Ok(80), |s| s.parse()).expect("epochs must be an integer");
    let count: usize = args.get(1).map_or(Ok(200), |s| s.parse()).expect("count must be an integer");

    let data = dataset(count, &Perturbation::default(), 7)?;
    let split = count * 9 / 10;
    let (train_set, test_set) = data.split_at(split);

    let mut cfg = RunConfig::default();
    cfg.model.hidden_dim = 64;
    cfg.model.latent_dim = 32;
    cfg.model.num_layers = 2;
    cfg.model.encode_num_atoms = true;
    cfg.model.fit_to(&data);
    cfg.train.epochs = epochs;
    cfg.train.learning_rate = 2e-3;
    cfg.train.final_learning_rate = 1e-4;
    let schedule = cfg.schedule.build()?;

    let mut model = DpCdvae::new(cfg.model.clone(), 1)?;
    train(&mut model, train_set, &schedule, &cfg.train, |r, _| {
        if r.epoch % 20 == 0 {
            println!("epoch {:4}  loss {:.4}", r.epoch, r.loss.total);
        }
        Ok(())
    })?;

    for variant in [ReverseVariant::Periodic, ReverseVariant::Standard] {
        let sampler = SamplerConfig { variant, ..Default::default() };
        let rec = reconstruct_all(&model, test_set, &schedule, &sampler, 3)?;
        let report = reconstruction_report(&rec, test_set, &cfg.matcher)?;
        println!(
            "{variant:?}: match rate {:.1}%  ⟨δ_rms⟩ {}",
            report.match_rate.unwrap_or(0.0),
            report.mean_delta_rms.map_or("n/a".into(), |d| format!("{d:.4}"))
        );
    }
    Ok(())
}
