//! Saves a model checkpoint, loads it back and checks that the restored
//! model makes identical predictions.

use dpcdvae::io::{checkpoint, load_model, RunConfig};
use dpcdvae::model::DpCdvae;
use dpcdvae::synthetic::Prototype;

fn main() -> dpcdvae::Result<()> {
    let s = Prototype::RockSalt.ideal()?;
    let mut cfg = RunConfig { seed: 21, ..Default::default() };
    cfg.model.hidden_dim = 32;
    cfg.model.fit_to(std::slice::from_ref(&s));
    let model = DpCdvae::new(cfg.model.clone(), cfg.seed)?;

    let dir = std::env::temp_dir().join(format!("dpcv_ckpt_{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.dpcv");
    checkpoint::save(&path, &cfg, model.params())?;
    let bytes = std::fs::metadata(&path)?.len();

    let (cfg2, restored) = load_model(&path)?;
    let (mu_a, _) = model.encode(&s)?;
    let (mu_b, _) = restored.encode(&s)?;
    println!("{} tensors, {} scalars, {bytes} bytes on disk", model.params().len(), model.params().num_scalars());
    println!("config restored: {}", cfg2 == cfg);
    println!("latent means identical: {}", mu_a == mu_b);

    // a corrupted header is rejected
    let mut raw = std::fs::read(&path)?;
    raw[4] ^= 0xff;
    match checkpoint::decode(&raw) {
        Ok(_) => println!("corrupted checkpoint unexpectedly decoded"),
        Err(e) => println!("corrupted checkpoint rejected: {e}"),
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
