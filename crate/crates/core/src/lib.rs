//! Periodic diffusion-probabilistic crystal VAE.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: cells, periodic wrapping, minimum-image distances, Niggli
//!   reduction and periodic neighbor graphs.
//! - [`schedule`]: sigmoid `ᾱ_t` schedule and the type-perturbation scale.
//! - [`diffusion`]: forward perturbation, the standard and periodic reverse
//!   updates, atom-type perturbation and full sampling trajectories.
//! - [`model`]: a small reverse-mode autodiff engine, the encoder / decoder
//!   heads / equivariant denoiser, losses and the training loop.
//! - [`metrics`]: structure matching, reconstruction, generation and
//!   ground-state metrics.
//! - [`pipeline`]: reconstruction and generation from a trained model.
//! - [`synthetic`]: perturbed cubic and rock-salt toy datasets.
//! - [`io`]: JSONL datasets, P1 CIF files, checkpoints and run configuration.
//! - [`cli`]: the `dpcv` command-line driver.
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory.

pub mod cli;
pub mod diffusion;
pub mod elements;
pub mod error;
pub mod io;
pub mod lattice;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod schedule;
pub mod synthetic;

pub use error::{Error, Result};
pub use lattice::{CrystalStructure, Lattice, LatticeParams};
pub use schedule::NoiseSchedule;
