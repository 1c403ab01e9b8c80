//! Run configuration: three TOML sections `[mechanism]`, `[rate]`, `[run]`.
//!
//! ```toml
//! [mechanism]
//! psi = { stable = { c = 1.0, alpha = 1.5 } }
//! # or: psi = { gamma = 1.0, sigma2 = 2.0, measure = { family = "compound_poisson_exp", rate = 1.0, mean_jump = 0.5 } }
//!
//! [rate]
//! family = "power"
//! theta = 3.0
//!
//! [run]
//! seed = 7
//! b = 2.0
//! ```
//!
//! [`parse_config`] fills every default, so the echoed config is complete and
//! parses back to the same value.

use std::path::{Path, PathBuf};

use cdi_core::hitting::WnOptions;
use cdi_core::mechanism::{LevyMeasure, StableShortcut};
use cdi_core::rates::{PChoice, RateFunction, ValleyBound};
use cdi_core::scale::ScaleOptions;
use cdi_core::simulate::PathConfig;
use cdi_core::Mechanism;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    Scale,
    Hitting,
    Limitlaw,
    Simulate,
    Speed,
    Hypotheses,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classify => "classify",
            Self::Scale => "scale",
            Self::Hitting => "hitting",
            Self::Limitlaw => "limitlaw",
            Self::Simulate => "simulate",
            Self::Speed => "speed",
            Self::Hypotheses => "hypotheses",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mechanism: MechanismSection,
    pub rate: RateFunction,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSection {
    pub psi: PsiSpec,
}

/// Either `stable = {c, alpha}` or the general triplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<StableShortcut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<LevyMeasure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Master seed; copied into `path.seed`.
    pub seed: u64,
    /// Output directory; falls back to `CDI_OUT_DIR`, then the working directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub entrance_tol: f64,
    /// Barrier for `hitting`, `limitlaw` and `simulate`.
    pub b: f64,
    /// Start level for `hitting` Laplace values; `inf` means from infinity.
    pub x: f64,
    pub b_grid: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Start level and replica count for `simulate`.
    pub x0: f64,
    pub reps: usize,
    pub scale: ScaleOptions,
    /// Series table settings; `x_min` defaults to the smallest barrier used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wn: Option<WnOptions>,
    pub path: PathConfig,
    pub speed: SpeedSection,
    pub hypotheses: HypothesesSection,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: None,
            entrance_tol: 0.05,
            b: 1.0,
            x: f64::INFINITY,
            b_grid: vec![1.0, 2.0, 5.0, 10.0],
            lambdas: vec![0.5, 1.0, 2.0],
            x_grid: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
            s_grid: vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0],
            x0: 100.0,
            reps: 1000,
            scale: ScaleOptions::default(),
            wn: None,
            path: PathConfig::default(),
            speed: SpeedSection::default(),
            hypotheses: HypothesesSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedSection {
    pub x0: f64,
    pub b_stop: f64,
    pub n_paths: usize,
    pub t_grid: Vec<f64>,
    pub excursion_lower: Vec<f64>,
}

impl Default for SpeedSection {
    fn default() -> Self {
        Self {
            x0: 1e6,
            b_stop: 1.0,
            n_paths: 200,
            t_grid: vec![1e-3, 2e-3, 5e-3, 1e-2],
            excursion_lower: vec![1e-4, 1e-5, 1e-6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesesSection {
    /// Window for H4; when absent it is chosen from the mechanism
    /// (`cramer_log_log` if a Cramer root exists, else `inv_sqrt`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<PChoice>,
    pub c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valley: Option<ValleyBound>,
}

impl Default for HypothesesSection {
    fn default() -> Self {
        Self { p: None, c: 2.0, valley: None }
    }
}

impl PsiSpec {
    pub fn mechanism(&self) -> Result<Mechanism> {
        let m = match (self.stable, self.gamma) {
            (Some(s), None) if self.sigma2.is_none() && self.measure.is_none() => Mechanism::stable(s.c, s.alpha)?,
            (Some(_), _) => return Err(CliError::Validation("psi.stable cannot be combined with gamma, sigma2 or measure".into())),
            (None, Some(g)) => Mechanism::new(g, self.sigma2.unwrap_or(0.0), self.measure.unwrap_or(LevyMeasure::None))?,
            (None, None) => return Err(CliError::Validation("psi needs either `stable` or `gamma`".into())),
        };
        Ok(m)
    }

    fn filled(&self) -> Self {
        match self.stable {
            Some(_) => self.clone(),
            None => Self {
                stable: None,
                gamma: self.gamma,
                sigma2: Some(self.sigma2.unwrap_or(0.0)),
                measure: Some(self.measure.unwrap_or(LevyMeasure::None)),
            },
        }
    }
}

impl RunConfig {
    pub fn mechanism(&self) -> Result<Mechanism> {
        self.mechanism.psi.mechanism()
    }

    pub fn wn(&self) -> WnOptions {
        self.run.wn.expect("filled by parse_config")
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }
}

fn check_grid(name: &str, v: &[f64], positive: bool) -> Result<()> {
    if v.is_empty() {
        return Err(CliError::Validation(format!("{name} is empty")));
    }
    if v.iter().any(|x| x.is_nan() || (positive && !(*x > 0.0))) {
        return Err(CliError::Validation(format!("{name} needs positive entries")));
    }
    Ok(())
}

/// Parse, validate for `cmd`, and fill defaults.
pub fn parse_config(text: &str, path: &Path, cmd: Command) -> Result<RunConfig> {
    let mut cfg: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let mech = cfg.mechanism()?;
    cfg.mechanism.psi = cfg.mechanism.psi.filled();
    cfg.rate.validate()?;
    if let RateFunction::Power { theta, .. } | RateFunction::PowerLog { theta, .. } = cfg.rate {
        if !(theta > 0.0) {
            return Err(CliError::Validation(format!("rate exponent theta must be > 0, got {theta}")));
        }
    }
    if cmd == Command::Speed && mech.drift() < 0.0 {
        return Err(CliError::Validation(
            "supercritical has no entrance: the boundary infinity is not an entrance boundary when gamma < 0".into(),
        ));
    }

    let run = &mut cfg.run;
    run.path.seed = run.seed;
    run.path.validate()?;
    if !(run.b > 0.0) {
        return Err(CliError::Validation(format!("b must be > 0, got {}", run.b)));
    }
    if !(run.x >= run.b) {
        return Err(CliError::Validation(format!("x must be >= b, got x = {}, b = {}", run.x, run.b)));
    }
    check_grid("b_grid", &run.b_grid, true)?;
    check_grid("x_grid", &run.x_grid, true)?;
    check_grid("s_grid", &run.s_grid, false)?;
    check_grid("speed.t_grid", &run.speed.t_grid, true)?;
    if run.lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(CliError::Validation("lambdas must be >= 0".into()));
    }
    if run.reps == 0 || run.speed.n_paths == 0 {
        return Err(CliError::Validation("reps and speed.n_paths must be positive".into()));
    }
    let b_min = run.b_grid.iter().copied().fold(run.b, f64::min);
    run.wn.get_or_insert(WnOptions::starting_at(b_min));
    if run.hypotheses.p.is_none() && mech.drift() > 0.0 {
        run.hypotheses.p = Some(match mech.cramer_root() {
            Some(nu) => PChoice::CramerLogLog { nu },
            None => PChoice::InvSqrt,
        });
    }
    Ok(cfg)
}
