//! Trains a small model on a toy dataset and writes a checkpoint plus the
//! loss history.
//!
//!     cargo run --release --example train_tiny -- 40 out_dir

use std::path::PathBuf;

use dpcdvae::io::{checkpoint, RunConfig};
use dpcdvae::model::{train, DpCdvae};
use dpcdvae::synthetic::{dataset, Perturbation};

fn main() -> dpcdvae::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let epochs: usize = args.first().map_or(Ok(40), |s| s.parse()).expect("epochs must be an integer");
    let out = PathBuf::from(args.get(1).map_or("train_tiny_out", String::as_str));

    let data = dataset(64, &Perturbation::default(), 1)?;
    let mut cfg = RunConfig::default();
    cfg.model.hidden_dim = 32;
    cfg.model.latent_dim = 16;
    cfg.model.num_layers = 2;
    cfg.model.encode_num_atoms = true;
    cfg.model.fit_to(&data);
    cfg.train.epochs = epochs;
    cfg.train.learning_rate = 2e-3;
    cfg.train.final_learning_rate = 2e-4;
    cfg.train.seed = cfg.seed;

    let schedule = cfg.schedule.build()?;
    let mut model = DpCdvae::new(cfg.model.clone(), cfg.seed)?;
    println!("{} parameters", model.params().num_scalars());
    let history = train(&mut model, &data, &schedule, &cfg.train, |r, _| {
        if r.epoch == 1 || r.epoch % 10 == 0 {
            println!(
                "epoch {:3}  total {:.4}  simple {:.4}  ce {:.4}  latt {:.4}  |g| {:.3}",
                r.epoch, r.loss.total, r.loss.simple, r.loss.type_ce, r.loss.lattice, r.grad_norm
            );
        }
        Ok(())
    })?;

    std::fs::create_dir_all(&out)?;
    checkpoint::save(&out.join("model.dpcv"), &cfg, model.params())?;
    std::fs::write(out.join("loss.csv"), history.to_csv())?;
    println!("wrote {}", out.display());
    Ok(())
}
