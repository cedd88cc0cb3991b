//! Noise schedules for coordinate diffusion and atom-type perturbation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_GAMMA_MIN: f64 = -10.0;
pub const DEFAULT_GAMMA_MAX: f64 = 10.0;
/// Range of the type-perturbation scale σ′.
pub const SIGMA_PRIME_MIN: f64 = 0.01;
pub const SIGMA_PRIME_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub steps: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, gamma_min: DEFAULT_GAMMA_MIN, gamma_max: DEFAULT_GAMMA_MAX }
    }
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<NoiseSchedule> {
        make_sigmoid_schedule(self.steps, self.gamma_min, self.gamma_max)
    }
}

/// Per-step coefficients. Index `t` runs over `1..=steps`; `alpha_bar` also
/// has the `t = 0` entry fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    steps: usize,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
    sigma: Vec<f64>,
    sigma_prime: Vec<f64>,
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `alpha_bar[t] = logistic(-γ(t))` with γ linear in `t/T` from `gamma_min`
/// to `gamma_max`.
pub fn make_sigmoid_schedule(steps: usize, gamma_min: f64, gamma_max: f64) -> Result<NoiseSchedule> {
    if steps == 0 {
        return Err(Error::Schedule("need at least one diffusion step".into()));
    }
    if !(gamma_min.is_finite() && gamma_max.is_finite() && gamma_min < gamma_max) {
        return Err(Error::Schedule(format!("invalid gamma range [{gamma_min}, {gamma_max}]")));
    }
    let mut alpha_bar = Vec::with_capacity(steps + 1);
    alpha_bar.push(1.0);
    for t in 1..=steps {
        let gamma = gamma_min + (gamma_max - gamma_min) * t as f64 / steps as f64;
        let ab = logistic(-gamma);
        if !(ab > 0.0 && ab <= 1.0) || ab >= alpha_bar[t - 1] {
            return Err(Error::Schedule(format!("alpha_bar[{t}] = {ab} leaves (0, 1] or is not decreasing")));
        }
        alpha_bar.push(ab);
    }
    let mut alpha = vec![1.0; steps + 1];
    let mut sigma = vec![0.0; steps + 1];
    let mut sigma_prime = vec![0.0; steps + 1];
    for t in 1..=steps {
        alpha[t] = alpha_bar[t] / alpha_bar[t - 1];
        let var = (1.0 - alpha_bar[t - 1]) * (1.0 - alpha[t]) / (1.0 - alpha_bar[t]);
        sigma[t] = var.max(0.0).sqrt();
        sigma_prime[t] = geometric_sigma_prime(t, steps);
    }
    Ok(NoiseSchedule { steps, alpha, alpha_bar, sigma, sigma_prime })
}

fn geometric_sigma_prime(t: usize, steps: usize) -> f64 {
    if steps == 1 {
        return SIGMA_PRIME_MIN;
    }
    let frac = (t - 1) as f64 / (steps - 1) as f64;
    SIGMA_PRIME_MIN * (SIGMA_PRIME_MAX / SIGMA_PRIME_MIN).powf(frac)
}

impl NoiseSchedule {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps {
            return Err(Error::StepOutOfRange { t, max: self.steps });
        }
        Ok(())
    }

    // Accessors below panic outside their index range; callers validate with
    // `check_step` first.

    pub fn alpha(&self, t: usize) -> f64 {
        assert!(t >= 1, "alpha is defined for t >= 1");
        self.alpha[t]
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t]
    }

    pub fn sigma(&self, t: usize) -> f64 {
        assert!(t >= 1, "sigma is defined for t >= 1");
        self.sigma[t]
    }

    pub fn sigma_prime(&self, t: usize) -> f64 {
        assert!(t >= 1, "sigma_prime is defined for t >= 1");
        self.sigma_prime[t]
    }

    pub fn sigma_prime_at(&self, t: usize) -> Result<f64> {
        self.check_step(t)?;
        Ok(self.sigma_prime[t])
    }

    /// Rows `(t, α_t, ᾱ_t, σ_t, σ′_t)` for `t = 1..=T`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64, f64, f64)> + '_ {
        (1..=self.steps).map(|t| (t, self.alpha[t], self.alpha_bar[t], self.sigma[t], self.sigma_prime[t]))
    }
}
