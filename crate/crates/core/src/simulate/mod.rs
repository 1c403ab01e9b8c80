//! Monte Carlo for `Z`, the time-changed process `X` and its hitting times.
//!
//! `Z` is sampled exactly on a grid for the Brownian, compound Poisson and
//! stable families; the stable-tail and tempered families drop jumps below
//! `eps_jump` and add a Gaussian with their variance. Crossings of a barrier
//! inside a step are found by Brownian-bridge bisection when the continuous
//! part is Gaussian, and by linear interpolation otherwise.
//!
//! Every replica draws from its own ChaCha stream keyed by `(seed, replica)`
//! and results are reduced in replica order, so output does not depend on the
//! number of worker threads. "Starting from infinity" is always a finite
//! starting point whose adequacy is checked with a ladder.

mod hit;
mod levy;
mod path;

use serde::{Deserialize, Serialize};

use crate::boundary::LadderPoint;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

pub use hit::{
    from_infinity_ladder, occupation_mc, richardson_hit, sample_hit, sample_hit_draws, LadderReport, Richardson,
};
pub use levy::Increments;
pub use path::{
    sample_levy_path, sample_path_to, speed_report, time_change_path, CsbpPath, ExcursionQuantile, LevyPath, Passage,
    RatioBand, SpeedOptions, SpeedReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    /// Step of `Z` at the barrier (or everywhere for uniform paths).
    pub dt: f64,
    /// Jumps below this size are replaced by a Gaussian.
    pub eps_jump: f64,
    /// Largest `Z`-time before a replica is abandoned.
    pub horizon: f64,
    /// Step reduction factor near the barrier.
    pub barrier_refine: u32,
    pub seed: u64,
    /// Index of the first replica; replica `r` of a run uses stream `replica + r`.
    pub replica: u64,
    /// Steps at level `z` are `dt (z / b)^kappa`.
    pub kappa: f64,
    pub max_steps: u64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            eps_jump: 1e-2,
            horizon: 1e9,
            barrier_refine: 10,
            seed: 0,
            replica: 0,
            kappa: 1.0,
            max_steps: 50_000_000,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.eps_jump > 0.0) {
            return bad(format!("eps_jump must be positive, got {}", self.eps_jump));
        }
        if !(self.horizon > self.dt) {
            return bad(format!("horizon {} must exceed dt {}", self.horizon, self.dt));
        }
        if self.barrier_refine < 1 {
            return bad("barrier_refine must be at least 1".into());
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be finite and >= 0, got {}", self.kappa));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        Ok(())
    }
}

/// Empirical `E e^(-lambda T)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub lambda: f64,
    pub value: f64,
    pub se: f64,
}

/// Summary of Monte Carlo draws of a positive functional `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n_reps: usize,
    /// Replicas that finished; the statistics use these only.
    pub n_used: usize,
    pub horizon_exceeded: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / n_used)`.
    pub se: f64,
    /// Standard error of `variance`, from the fourth central moment.
    pub variance_se: f64,
    pub laplace: Vec<LaplaceEstimate>,
    pub ladder: Vec<LadderPoint>,
}

impl McSummary {
    /// Summarise per-replica draws, `None` marking replicas that exceeded
    /// the horizon.
    pub fn from_draws(draws: &[Option<f64>], lambdas: &[f64]) -> Self {
        let xs: Vec<f64> = draws.iter().flatten().copied().collect();
        let n = xs.len();
        let nan = f64::NAN;
        let (mean, variance) = if n > 0 { hit::mean_var(&xs) } else { (nan, nan) };
        let m4 = if n > 0 { pairwise_sum(&xs.iter().map(|x| (x - mean).powi(4)).collect::<Vec<_>>()) / n as f64 } else { nan };
        let laplace = lambdas
            .iter()
            .map(|&l| {
                let e: Vec<f64> = xs.iter().map(|x| (-l * x).exp()).collect();
                let (v, s2) = if n > 0 { hit::mean_var(&e) } else { (nan, nan) };
                LaplaceEstimate { lambda: l, value: v, se: (s2 / n as f64).sqrt() }
            })
            .collect();
        Self {
            n_reps: draws.len(),
            n_used: n,
            horizon_exceeded: draws.len() - n,
            mean,
            variance,
            se: (variance / n as f64).sqrt(),
            variance_se: ((m4 - variance * variance).max(0.0) / n as f64).sqrt(),
            laplace,
            ladder: Vec::new(),
        }
    }
}
