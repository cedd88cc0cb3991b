//! `dpcv` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical divergence. Diagnostics go to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::diffusion::ReverseVariant;
use crate::error::{Error, Result};
use crate::io::{self, checkpoint, RunConfig};
use crate::metrics::{generation_report, ground_state_compare, reconstruction_report, MetricsReport};
use crate::model::{train, DpCdvae};
use crate::pipeline::{generate_all, reconstruct_all};
use crate::schedule::make_sigmoid_schedule;

#[derive(Debug, Parser)]
#[command(name = "dpcv", version, about = "Periodic diffusion crystal VAE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Standard,
    Periodic,
}

impl From<Variant> for ReverseVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Standard => ReverseVariant::Standard,
            Variant::Periodic => ReverseVariant::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Recon,
    Gen,
    GroundState,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write checkpoints plus a loss CSV.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode and re-sample every structure of a dataset.
    Reconstruct {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the reverse update stored in the checkpoint config.
        #[arg(long, value_enum)]
        variant: Option<Variant>,
    },
    /// Sample new structures from the prior.
    Generate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
    },
    /// Compute metrics and print (or write) a JSON report.
    Evaluate {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Supplies matcher criteria and coverage thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the noise schedule as CSV rows `t,alpha,alpha_bar,sigma,sigma_prime`.
    ScheduleDump {
        #[arg(long = "T", default_value_t = crate::schedule::DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = crate::schedule::DEFAULT_GAMMA_MIN, allow_hyphen_values = true)]
        gamma_min: f64,
        #[arg(long, default_value_t = crate::schedule::DEFAULT_GAMMA_MAX, allow_hyphen_values = true)]
        gamma_max: f64,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 1,
        e if e.is_divergence() => 3,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(report: &MetricsReport, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match out {
        Some(p) => std::fs::write(p, json)?,
        None => std::io::stdout().write_all(json.as_bytes())?,
    }
    Ok(())
}

fn energies(path: &Path) -> Result<Vec<f64>> {
    io::read_jsonl(path)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.energy_per_atom.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "energy_per_atom is required for ground-state evaluation".into(),
            })
        })
        .collect()
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Train { config, data, out } => {
            let mut cfg = load_config(config.as_deref())?;
            let structures = io::read_structures(&data)?;
            cfg.model.fit_to(&structures);
            cfg.train.seed = cfg.seed;
            let schedule = cfg.schedule.build()?;
            std::fs::create_dir_all(&out)?;
            let mut model = DpCdvae::new(cfg.model.clone(), cfg.seed)?;
            eprintln!(
                "training on {} structures, {} parameters, species {:?}",
                structures.len(),
                model.params().num_scalars(),
                cfg.model.species
            );
            let save_every = cfg.train.save_every;
            let history = train(&mut model, &structures, &schedule, &cfg.train, |r, m| {
                eprintln!(
                    "epoch {:4}  total {:.5}  simple {:.5}  ce {:.5}  kld {:.4}  latt {:.5}  comp {:.5}  n_a {:.5}",
                    r.epoch, r.loss.total, r.loss.simple, r.loss.type_ce, r.loss.kld, r.loss.lattice, r.loss.composition, r.loss.num_atoms
                );
                if save_every > 0 && r.epoch % save_every == 0 {
                    checkpoint::save(&out.join(format!("epoch_{:04}.dpcv", r.epoch)), &cfg, m.params())?;
                }
                Ok(())
            })?;
            checkpoint::save(&out.join("model.dpcv"), &cfg, model.params())?;
            std::fs::write(out.join("loss.csv"), history.to_csv())?;
            Ok(())
        }
        Command::Reconstruct { ckpt, data, out, variant } => {
            let (mut cfg, model) = io::load_model(&ckpt)?;
            cfg.apply_env()?;
            if let Some(v) = variant {
                cfg.sampler.variant = v.into();
            }
            let structures = io::read_structures(&data)?;
            let schedule = cfg.schedule.build()?;
            let result = reconstruct_all(&model, &structures, &schedule, &cfg.sampler, cfg.seed)?;
            io::write_structures(&out, &result)
        }
        Command::Generate { ckpt, count, out, variant } => {
            let (mut cfg, model) = io::load_model(&ckpt)?;
            cfg.apply_env()?;
            if let Some(v) = variant {
                cfg.sampler.variant = v.into();
            }
            let schedule = cfg.schedule.build()?;
            let result = generate_all(&model, count, &schedule, &cfg.sampler, cfg.seed)?;
            io::write_structures(&out, &result)
        }
        Command::Evaluate { mode, generated, reference, config, out } => {
            let cfg = load_config(config.as_deref())?;
            let gen = io::read_structures(&generated)?;
            let reference_s = io::read_structures(&reference)?;
            let report = match mode {
                Mode::Recon => reconstruction_report(&gen, &reference_s, &cfg.matcher)?,
                Mode::Gen => generation_report(&gen, &reference_s, &cfg.coverage)?,
                Mode::GroundState => {
                    ground_state_compare(&gen, &reference_s, &energies(&generated)?, &energies(&reference)?, &cfg.matcher)?
                }
            };
            write_report(&report, out.as_deref())
        }
        Command::ScheduleDump { steps, gamma_min, gamma_max } => {
            let schedule = make_sigmoid_schedule(steps, gamma_min, gamma_max).map_err(|e| Error::Config(e.to_string()))?;
            let mut text = String::from("t,alpha,alpha_bar,sigma,sigma_prime\n");
            for (t, a, ab, s, sp) in schedule.rows() {
                text.push_str(&format!("{t},{a},{ab},{s},{sp}\n"));
            }
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
