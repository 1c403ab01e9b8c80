//! Limiting laws of `T_b / m(b)` as `b -> inf` for the process started at
//! infinity.
//!
//! Two families are covered. For a critical mechanism with `Psi(l) ~ c l^alpha`
//! at zero and a rate regularly varying with index `theta > alpha`, the limit
//! is the law `S_{alpha,theta}` with Laplace transform
//! `1 / sum_n (s Gamma(theta) / Gamma(theta - alpha))^n a_n`. For
//! `R(x) = e^(theta2 x)` the limit is
//! `1 / (1 + sum_n Psi(theta2)^n l^n / prod_{j<=n} Psi(j theta2))`.
//!
//! Both series are summed in log space, since the Gamma products and the
//! products of `Psi` overflow long before the terms become negligible.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mechanism::{Criticality, Mechanism};
use crate::numeric::ln_gamma;

/// Stop once a term falls below this multiple of the partial sum.
const SERIES_REL: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;
const CACHE_LEN: usize = 256;

/// The law `S_{alpha,theta}` with its cached `ln a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableThetaLaw {
    alpha: f64,
    theta: f64,
    #[serde(skip)]
    ln_a: Vec<f64>,
}

impl StableThetaLaw {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return domain(format!("alpha must lie in (1, 2], got {alpha}"));
        }
        if !(theta > alpha && theta.is_finite()) {
            return domain(format!("need theta > alpha, got theta = {theta}, alpha = {alpha}"));
        }
        let mut ln_a = Vec::with_capacity(CACHE_LEN + 1);
        ln_a.push(0.0);
        for i in 1..=CACHE_LEN {
            ln_a.push(ln_a[i - 1] + ln_factor(alpha, theta, i));
        }
        Ok(Self { alpha, theta, ln_a })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `ln a_n`.
    pub fn ln_coeff_a(&self, n: usize) -> f64 {
        if let Some(&v) = self.ln_a.get(n) {
            return v;
        }
        let start = self.ln_a.len().saturating_sub(1);
        let mut acc = if self.ln_a.is_empty() { 0.0 } else { self.ln_a[start] };
        for i in start + 1..=n {
            acc += ln_factor(self.alpha, self.theta, i);
        }
        acc
    }

    /// `Gamma(theta) / Gamma(theta - alpha)`, the factor that makes the mean one.
    pub fn mean_scale(&self) -> f64 {
        (ln_gamma(self.theta) - ln_gamma(self.theta - self.alpha)).exp()
    }
}

// ln [Gamma(i theta - i alpha) / Gamma(i theta - (i - 1) alpha)]
fn ln_factor(alpha: f64, theta: f64, i: usize) -> f64 {
    let i = i as f64;
    ln_gamma(i * (theta - alpha)) - ln_gamma(i * theta - (i - 1.0) * alpha)
}

/// `a_n = prod_{i=1}^n Gamma(i theta - i alpha) / Gamma(i theta - (i-1) alpha)`.
pub fn coeff_a(law: &StableThetaLaw, n: usize) -> f64 {
    law.ln_coeff_a(n).exp()
}

/// `E[e^(-s S)]` for `S ~ S_{alpha,theta}`.
pub fn laplace_s(law: &StableThetaLaw, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return domain(format!("s must be finite and >= 0, got {s}"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let ln_x = s.ln() + law.mean_scale().ln();
    let mut ln_a = 0.0;
    let terms = (1..=MAX_TERMS).map(|n| {
        ln_a += if n < law.ln_a.len() { law.ln_a[n] - law.ln_a[n - 1] } else { ln_factor(law.alpha, law.theta, n) };
        n as f64 * ln_x + ln_a
    });
    Ok((-ln_series(terms)).exp())
}

/// The limit law of `T_b / m(b)` for `R = g e^(theta2 x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpRateLimitLaw {
    pub mech: Mechanism,
    pub theta2: f64,
}

impl ExpRateLimitLaw {
    pub fn new(mech: Mechanism, theta2: f64) -> Result<Self> {
        if mech.classify() == Criticality::Supercritical {
            return domain("exponential-rate limit needs gamma >= 0");
        }
        if !(theta2 > 0.0 && theta2.is_finite()) {
            return domain(format!("theta2 must be positive, got {theta2}"));
        }
        Ok(Self { mech, theta2 })
    }
}

/// `1 / (1 + sum_n Psi(theta2)^n l^n / prod_{j<=n} Psi(j theta2))`.
pub fn laplace_exp_limit(law: &ExpRateLimitLaw, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let ln_x = lambda.ln() + law.mech.ln_psi(law.theta2);
    let mut ln_prod = 0.0;
    let terms = (1..=MAX_TERMS).map(|n| {
        ln_prod += law.mech.ln_psi(n as f64 * law.theta2);
        n as f64 * ln_x - ln_prod
    });
    Ok((-ln_series(terms)).exp())
}

/// `ln(1 + sum_n e^(t_n))`, stopping once the terms are decreasing and below
/// [`SERIES_REL`] times the partial sum.
fn ln_series(terms: impl Iterator<Item = f64>) -> f64 {
    // Running sum kept as `e^shift * acc`.
    let mut shift = 0.0f64;
    let mut acc = 1.0f64;
    let mut prev = 0.0f64;
    for t in terms {
        if t > shift {
            acc = acc * (shift - t).exp() + 1.0;
            shift = t;
        } else {
            acc += (t - shift).exp();
        }
        if t < prev && t - shift - acc.ln() < SERIES_REL.ln() {
            break;
        }
        prev = t;
    }
    shift + acc.ln()
}
