//! Branching mechanisms.
//!
//! A mechanism is the Laplace exponent of a spectrally positive Levy process,
//!
//! ```text
//! Psi(l) = gamma l + (sigma2 / 2) l^2 + int_0^inf (exp(-l z) - 1 + l z) pi(dz),
//! ```
//!
//! or the pure stable shortcut `Psi(l) = c l^alpha`. The sign of `gamma`
//! (equivalently `Psi'(0+)`) classifies the process.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::{gamma as gamma_fn, roots};

/// Levy measures with closed-form compensated Laplace integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyMeasure {
    None,
    /// Density `c_pi z^(-1-alpha)` on `(0, inf)`, `alpha` in `(1, 2)`.
    StableTail { alpha: f64, c_pi: f64 },
    /// Jumps at `rate` with exponential sizes of mean `mean_jump`.
    CompoundPoissonExp { rate: f64, mean_jump: f64 },
    /// Density `c_pi z^(-1-alpha) exp(-beta z)`, `alpha` in `(1, 2)`.
    TemperedStable { alpha: f64, c_pi: f64, beta: f64 },
}

/// The pure stable mechanism `c l^alpha` with `alpha` in `(1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableShortcut {
    pub c: f64,
    pub alpha: f64,
}

/// Classification by the sign of `Psi'(0+) = gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    Critical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    pub gamma: f64,
    /// Brownian variance; `Psi` contains `sigma2 / 2 * l^2`.
    pub sigma2: f64,
    pub measure: LevyMeasure,
    /// When set, overrides the other fields.
    pub stable: Option<StableShortcut>,
}

impl Mechanism {
    pub fn new(gamma: f64, sigma2: f64, measure: LevyMeasure) -> Result<Self> {
        if !gamma.is_finite() {
            return domain("gamma must be finite");
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return domain(format!("sigma2 must be finite and >= 0, got {sigma2}"));
        }
        match measure {
            LevyMeasure::None => {}
            LevyMeasure::StableTail { alpha, c_pi } => {
                check_index(alpha)?;
                check_pos("c_pi", c_pi)?;
            }
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => {
                check_pos("rate", rate)?;
                check_pos("mean_jump", mean_jump)?;
            }
            LevyMeasure::TemperedStable { alpha, c_pi, beta } => {
                check_index(alpha)?;
                check_pos("c_pi", c_pi)?;
                check_pos("beta", beta)?;
            }
        }
        if gamma == 0.0 && sigma2 == 0.0 && measure == LevyMeasure::None {
            return domain("Psi is identically zero");
        }
        Ok(Self { gamma, sigma2, measure, stable: None })
    }

    pub fn stable(c: f64, alpha: f64) -> Result<Self> {
        check_pos("c", c)?;
        if !(alpha > 1.0 && alpha <= 2.0) {
            return domain(format!("stable index must lie in (1, 2], got {alpha}"));
        }
        Ok(Self { gamma: 0.0, sigma2: 0.0, measure: LevyMeasure::None, stable: Some(StableShortcut { c, alpha }) })
    }

    pub fn pure_drift(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0, LevyMeasure::None)
    }

    pub fn brownian(gamma: f64, sigma2: f64) -> Result<Self> {
        Self::new(gamma, sigma2, LevyMeasure::None)
    }

    /// Re-run the constructor checks, e.g. after deserialization.
    pub fn validated(self) -> Result<Self> {
        match self.stable {
            Some(s) => Self::stable(s.c, s.alpha),
            None => Self::new(self.gamma, self.sigma2, self.measure),
        }
    }

    /// Drift coefficient `Psi'(0+)`.
    pub fn drift(&self) -> f64 {
        if self.stable.is_some() { 0.0 } else { self.gamma }
    }

    pub fn classify(&self) -> Criticality {
        let g = self.drift();
        if g < 0.0 {
            Criticality::Supercritical
        } else if g == 0.0 {
            Criticality::Critical
        } else {
            Criticality::Subcritical
        }
    }

    /// `Psi(l)` for real `l >= 0`.
    pub fn psi(&self, l: f64) -> f64 {
        if l == 0.0 {
            return 0.0;
        }
        if let Some(s) = self.stable {
            return s.c * l.powf(s.alpha);
        }
        self.gamma * l + 0.5 * self.sigma2 * l * l + self.jump_part(l)
    }

    fn jump_part(&self, l: f64) -> f64 {
        match self.measure {
            LevyMeasure::None => 0.0,
            LevyMeasure::StableTail { alpha, c_pi } => c_pi * gamma_fn(-alpha) * l.powf(alpha),
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => {
                let ml = mean_jump * l;
                rate * mean_jump * ml * l / (1.0 + ml)
            }
            LevyMeasure::TemperedStable { alpha, c_pi, beta } => {
                c_pi * gamma_fn(-alpha) * tempered_bracket(alpha, beta, Complex64::new(l, 0.0)).re
            }
        }
    }

    /// `ln Psi(l)` for `l > 0`, finite where `Psi(l)` itself underflows.
    pub fn ln_psi(&self, l: f64) -> f64 {
        self.ln_psi_log(l.ln())
    }

    /// `ln Psi(e^v)`, usable for `v` far below the range of `exp`.
    ///
    /// Below `l = 1e-150` the leading small-`l` term is used; the neglected
    /// corrections are relatively smaller than `1e-75`.
    pub fn ln_psi_log(&self, v: f64) -> f64 {
        if let Some(s) = self.stable {
            return s.c.ln() + s.alpha * v;
        }
        if v > -345.0 || self.gamma < 0.0 {
            return self.psi(v.exp()).ln();
        }
        match self.small_lambda_leading() {
            Some((c, a)) => c.ln() + a * v,
            None => f64::NAN,
        }
    }

    /// `(C, a)` with `Psi(l) ~ C l^a` as `l -> 0+`; `None` when supercritical.
    pub fn small_lambda_leading(&self) -> Option<(f64, f64)> {
        if let Some(s) = self.stable {
            return Some((s.c, s.alpha));
        }
        if self.gamma > 0.0 {
            return Some((self.gamma, 1.0));
        }
        if self.gamma < 0.0 {
            return None;
        }
        Some(match self.measure {
            LevyMeasure::StableTail { alpha, c_pi } => (c_pi * gamma_fn(-alpha), alpha),
            LevyMeasure::None => (0.5 * self.sigma2, 2.0),
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => (0.5 * self.sigma2 + rate * mean_jump * mean_jump, 2.0),
            LevyMeasure::TemperedStable { alpha, c_pi, beta } => {
                let second = c_pi * gamma_fn(2.0 - alpha) * beta.powf(alpha - 2.0);
                (0.5 * (self.sigma2 + second), 2.0)
            }
        })
    }

    /// Analytic continuation of `Psi` to `Re s > 0` (principal branches).
    pub fn psi_complex(&self, s: Complex64) -> Complex64 {
        if let Some(st) = self.stable {
            return st.c * s.powf(st.alpha);
        }
        let mut out = self.gamma * s + 0.5 * self.sigma2 * s * s;
        out += match self.measure {
            LevyMeasure::None => Complex64::new(0.0, 0.0),
            LevyMeasure::StableTail { alpha, c_pi } => c_pi * gamma_fn(-alpha) * s.powf(alpha),
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => {
                let ms = mean_jump * s;
                rate * mean_jump * ms * s / (1.0 + ms)
            }
            LevyMeasure::TemperedStable { alpha, c_pi, beta } => {
                c_pi * gamma_fn(-alpha) * tempered_bracket(alpha, beta, s)
            }
        };
        out
    }

    /// `Psi(-nu)` where the exponential moment of the Levy measure exists.
    pub fn psi_negative(&self, nu: f64) -> Option<f64> {
        if self.stable.is_some() {
            return None;
        }
        let base = -self.gamma * nu + 0.5 * self.sigma2 * nu * nu;
        let jump = match self.measure {
            LevyMeasure::None => 0.0,
            LevyMeasure::StableTail { .. } => return None,
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => {
                if mean_jump * nu >= 1.0 {
                    return None;
                }
                let mn = mean_jump * nu;
                rate * mean_jump * mn * nu / (1.0 - mn)
            }
            LevyMeasure::TemperedStable { alpha, c_pi, beta } => {
                if nu > beta {
                    return None;
                }
                c_pi * gamma_fn(-alpha) * tempered_bracket(alpha, beta, Complex64::new(-nu, 0.0)).re
            }
        };
        Some(base + jump)
    }

    /// Cramer root `nu > 0` with `Psi(-nu) = 0`, when it exists.
    ///
    /// Requires `gamma > 0`. Stable families have no exponential moments and
    /// return `None`.
    pub fn cramer_root(&self) -> Option<f64> {
        if self.classify() != Criticality::Subcritical {
            return None;
        }
        let upper = match self.measure {
            LevyMeasure::None => {
                if self.sigma2 > 0.0 {
                    return Some(2.0 * self.gamma / self.sigma2);
                }
                return None;
            }
            LevyMeasure::StableTail { .. } => return None,
            LevyMeasure::CompoundPoissonExp { mean_jump, .. } => (1.0 / mean_jump) * (1.0 - 1e-15),
            LevyMeasure::TemperedStable { beta, .. } => beta,
        };
        let f = |nu: f64| self.psi_negative(nu).unwrap_or(f64::INFINITY);
        if f(upper) < 0.0 {
            return None;
        }
        // Psi(-nu) < 0 just right of zero since Psi'(0+) = gamma > 0.
        let lo = upper * 1e-12;
        roots::bisect(f, lo, upper, 0.0, 1e-15).ok()
    }

    /// Right inverse `Phi(q)`: the largest root of `Psi(l) = q`, `q >= 0`.
    pub fn phi_big(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return domain(format!("Phi(q) needs q >= 0, got {q}"));
        }
        if q == 0.0 && self.classify() != Criticality::Supercritical {
            return Ok(0.0);
        }
        let f = |l: f64| self.psi(l) - q;
        let (lo, hi) = roots::bracket_positive(&f, 0.5, 1.0)?;
        roots::bisect(f, lo, hi, 0.0, 1e-14)
    }

    /// `W(0) = lim_{q -> inf} q / Psi(q)`: positive only for bounded variation.
    pub fn w_at_zero(&self) -> f64 {
        if self.stable.is_some() || self.sigma2 > 0.0 {
            return 0.0;
        }
        match self.measure {
            LevyMeasure::None => 1.0 / self.gamma,
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => 1.0 / (self.gamma + rate * mean_jump),
            LevyMeasure::StableTail { .. } | LevyMeasure::TemperedStable { .. } => 0.0,
        }
    }

    /// Exponent `a` with `Psi(l) ~ C l^a` as `l -> 0+`.
    pub fn small_lambda_index(&self) -> f64 {
        self.small_lambda_leading().map_or(1.0, |(_, a)| a)
    }

    /// Total Brownian variance, counting the shortcut `c l^2` as `sigma2 = 2 c`.
    pub fn gaussian_variance(&self) -> f64 {
        match self.stable {
            Some(s) if s.alpha == 2.0 => 2.0 * s.c,
            Some(_) => 0.0,
            None => self.sigma2,
        }
    }
}

/// `(beta + s)^alpha - beta^alpha - alpha beta^(alpha-1) s`, with a binomial
/// series for small `|s| / beta` where the direct form cancels.
fn tempered_bracket(alpha: f64, beta: f64, s: Complex64) -> Complex64 {
    let t = s / beta;
    if t.norm() >= 0.1 {
        return (beta + s).powf(alpha) - beta.powf(alpha) - alpha * beta.powf(alpha - 1.0) * s;
    }
    // sum_{k >= 2} binom(alpha, k) t^k
    let mut coef = alpha * (alpha - 1.0) / 2.0;
    let mut pow = t * t;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 2..60 {
        let term = coef * pow;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
        coef *= (alpha - k as f64) / (k as f64 + 1.0);
        pow *= t;
    }
    beta.powf(alpha) * sum
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite and > 0, got {v}"))
    }
}

fn check_index(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        domain(format!("stable index must lie in (1, 2), got {alpha}"))
    }
}
