//! Is infinity an instantaneous entrance boundary?
//!
//! The analytic test asks whether
//!
//! ```text
//! int_A^inf dx / (x Psi(1/x) R(x)) < inf.
//! ```
//!
//! Supercritical mechanisms never qualify. For subcritical ones
//! `x Psi(1/x) -> gamma`, so the test reduces to integrability of `1/R` and is
//! decided from the rate family. The critical case needs the full integral.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mechanism::{Criticality, Mechanism};
use crate::numeric::quad::{integrate_to_infinity, Tol};
use crate::rates::RateFunction;

/// Lower end of the integral; only the neighbourhood of infinity matters.
const LOWER: f64 = 1.0;
/// Decades over which the integrand's tail slope is fitted.
const SLOPE_FROM: f64 = 1e6;
const SLOPE_TO: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntranceCriterion {
    FullIntegral,
    SubcriticalShortcut,
    SupercriticalRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntranceVerdict {
    pub is_entrance: bool,
    /// `int_1^inf dx / (x Psi(1/x) R(x))`, infinite when the test fails.
    pub integral_value: f64,
    pub criterion_used: EntranceCriterion,
    /// Fitted log-log slope of the integrand over `[1e6, 1e8]`, critical case only.
    pub tail_slope: Option<f64>,
    pub note: String,
}

/// `1 / (x Psi(1/x) R(x))`, evaluated in logs so fast rates do not overflow.
pub fn cdi_integrand(mech: &Mechanism, rate: &RateFunction, x: f64) -> f64 {
    (-(x.ln() + mech.ln_psi(1.0 / x) + rate.ln_eval(x))).exp()
}

/// Decide whether infinity is an entrance boundary for `(mech, rate)`.
///
/// `tol` is the band around slope `-1` in which the fitted tail slope is too
/// close to call. Inside it the verdict falls back to the exact small-`l`
/// index of `Psi` and the power index of `R`; when the rate family has no such
/// index the result is [`Error::InconclusiveTail`].
pub fn entrance_test(mech: &Mechanism, rate: &RateFunction, tol: f64) -> Result<EntranceVerdict> {
    if !(tol > 0.0 && tol < 1.0) {
        return domain(format!("slope tolerance must lie in (0, 1), got {tol}"));
    }
    rate.validate()?;
    match mech.classify() {
        Criticality::Supercritical => Ok(EntranceVerdict {
            is_entrance: false,
            integral_value: f64::INFINITY,
            criterion_used: EntranceCriterion::SupercriticalRule,
            tail_slope: None,
            note: "gamma < 0: the process explodes with positive probability".into(),
        }),
        Criticality::Subcritical => {
            let is_entrance = rate.tail_integrable();
            let integral_value = if is_entrance { full_integral(mech, rate)? } else { f64::INFINITY };
            Ok(EntranceVerdict {
                is_entrance,
                integral_value,
                criterion_used: EntranceCriterion::SubcriticalShortcut,
                tail_slope: None,
                note: format!("gamma > 0: decided by integrability of 1/R ({})", if is_entrance { "finite" } else { "infinite" }),
            })
        }
        Criticality::Critical => critical(mech, rate, tol),
    }
}

fn critical(mech: &Mechanism, rate: &RateFunction, tol: f64) -> Result<EntranceVerdict> {
    let f1 = cdi_integrand(mech, rate, SLOPE_FROM);
    let f2 = cdi_integrand(mech, rate, SLOPE_TO);
    let slope = if f1 > 0.0 && f2 > 0.0 {
        (f2 / f1).ln() / (SLOPE_TO / SLOPE_FROM).ln()
    } else {
        // Underflow of the integrand means a super-polynomial decay.
        f64::NEG_INFINITY
    };
    let verdict = |is_entrance: bool, value: f64, note: String| EntranceVerdict {
        is_entrance,
        integral_value: value,
        criterion_used: EntranceCriterion::FullIntegral,
        tail_slope: Some(slope),
        note,
    };
    if slope < -1.0 - tol {
        let value = full_integral(mech, rate)?;
        return Ok(verdict(true, value, format!("tail slope {slope:.4} < -1")));
    }
    if slope > -1.0 + tol {
        return Ok(verdict(false, f64::INFINITY, format!("tail slope {slope:.4} >= -1")));
    }
    // Near the critical slope: compare the exact indices.
    let a = mech.small_lambda_index();
    let (theta, log_power) = rate_index(rate).ok_or(Error::InconclusiveTail { slope })?;
    // Integrand ~ x^(a - 1 - theta) (ln x)^-log_power.
    let excess = theta - a;
    let is_entrance = if excess.abs() > 1e-12 { excess > 0.0 } else { log_power > 1.0 };
    let value = if is_entrance { full_integral(mech, rate)? } else { f64::INFINITY };
    Ok(verdict(
        is_entrance,
        value,
        format!("tail slope {slope:.4} near -1; decided by indices Psi ~ l^{a}, R ~ x^{theta} (ln x)^{log_power}"),
    ))
}

// Power and logarithmic tail indices of R, when the family fixes them.
fn rate_index(rate: &RateFunction) -> Option<(f64, f64)> {
    match rate {
        RateFunction::Power { theta, .. } => Some((*theta, 0.0)),
        RateFunction::PowerLog { theta, p } => Some((*theta, *p)),
        RateFunction::OscillatingValley { theta, .. } => Some((*theta, 0.0)),
        RateFunction::Tabulated { tail_exponent, .. } => Some((*tail_exponent, 0.0)),
        RateFunction::ExpRate { .. } => None,
    }
}

// The integral in u = ln x, where power tails become exponential and
// logarithmic corrections become powers; both suit doubling panels.
fn full_integral(mech: &Mechanism, rate: &RateFunction) -> Result<f64> {
    let g = |u: f64| (-(mech.ln_psi_log(-u) + rate.ln_eval_log(u))).exp();
    let breaks: Vec<f64> = rate.breakpoints().into_iter().filter(|&b| b > LOWER).map(f64::ln).collect();
    let q = integrate_to_infinity(&g, LOWER.ln(), 1.0, &breaks, Tol::new(0.0, 1e-9))?;
    Ok(q.value)
}

/// One rung of a Monte Carlo ladder of `E_x[T_b]` estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub x0: f64,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEntranceReport {
    /// Whether the last two rungs agree, so `sup_x E_x[T_b]` looks finite.
    pub plateau: bool,
    pub plateau_value: f64,
    pub plateau_se: f64,
    /// `(plateau - m(b)) / se` when `m(b)` is supplied.
    pub z_score: Option<f64>,
    /// `|z_score| <= 3`.
    pub matches_m: Option<bool>,
}

/// Two rungs agree when their means differ by less than `max(2 SE, 1%)`.
pub fn rungs_agree(a: &LadderPoint, b: &LadderPoint) -> bool {
    let se = (a.se * a.se + b.se * b.se).sqrt();
    (b.mean - a.mean).abs() < (2.0 * se).max(0.01 * a.mean.abs().max(b.mean.abs()))
}

/// Plateau diagnostic for a ladder sorted by increasing `x0`, compared with
/// the analytic `m(b)` when available. Ladders shorter than two never plateau.
pub fn entrance_test_empirical(ladder: &[LadderPoint], m_b: Option<f64>) -> EmpiricalEntranceReport {
    let n = ladder.len();
    let last = ladder.last().copied().unwrap_or(LadderPoint { x0: f64::NAN, mean: f64::NAN, se: f64::NAN });
    let plateau = n >= 2 && rungs_agree(&ladder[n - 2], &ladder[n - 1]);
    let z_score = m_b.map(|m| if last.se > 0.0 { (last.mean - m) / last.se } else if last.mean == m { 0.0 } else { f64::INFINITY });
    EmpiricalEntranceReport {
        plateau,
        plateau_value: last.mean,
        plateau_se: last.se,
        z_score,
        matches_m: z_score.map(|z| plateau && z.abs() <= 3.0),
    }
}
