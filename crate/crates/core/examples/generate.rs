//! Samples structures from the prior of a checkpoint and prints them.
//!
//!     cargo run --release --example train_tiny -- 40 out
//!     cargo run --release --example generate -- out/model.dpcv 5

use std::path::PathBuf;

use dpcdvae::elements::symbol;
use dpcdvae::io::load_model;
use dpcdvae::metrics::validity;
use dpcdvae::pipeline::generate_all;

fn main() -> dpcdvae::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ckpt = PathBuf::from(args.first().map_or("train_tiny_out/model.dpcv", String::as_str));
    let count: usize = args.get(1).map_or(Ok(5), |s| s.parse()).expect("count must be an integer");

    let (cfg, model) = load_model(&ckpt)?;
    let schedule = cfg.schedule.build()?;
    for (i, s) in generate_all(&model, count, &schedule, &cfg.sampler, cfg.seed)?.iter().enumerate() {
        let formula: String = s
            .composition()
            .iter()
            .map(|(&z, &n)| format!("{}{}", symbol(z).unwrap_or("?"), n))
            .collect();
        let p = s.lattice().params();
        let v = validity(s)?;
        println!(
            "#{i}: {formula:8} a,b,c = {:.2} {:.2} {:.2}  α,β,γ = {:.1} {:.1} {:.1}  valid {}/{:?}",
            p.a, p.b, p.c, p.alpha, p.beta, p.gamma, v.structural, v.compositional
        );
    }
    Ok(())
}
