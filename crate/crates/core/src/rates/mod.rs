//! Rate functions `R`, the integral `phi(b) = (1/gamma) int_b^inf dx / R(x)`,
//! the deterministic flow it generates, and the regularity checks used by
//! the speed-of-descent results.

mod hypotheses;
mod valley;

pub use hypotheses::{
    check_h4, check_hypothesis, H4Report, Hypothesis, HypothesisReport, LadderRow, PChoice, ValleyBound, Verdict,
    H_LADDER, X_LADDER, Z_LADDER,
};
pub use valley::valley_v;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::quad::{integrate, integrate_pieces, integrate_to_infinity, Tol};
use crate::numeric::roots;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Positive rate functions on `(0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateFunction {
    /// `k x^theta`.
    Power {
        theta: f64,
        #[serde(default = "unit")]
        k: f64,
    },
    /// `x^theta ln(e + x)^p`.
    PowerLog { theta: f64, p: f64 },
    /// `g(x) exp(theta2 x)` with `g` a power or power-log rate.
    ExpRate { theta2: f64, g: Box<RateFunction> },
    /// `x^theta (2 + cos(x) x^-v)` for `x >= x0`, frozen at `R(x0)` below.
    OscillatingValley { theta: f64, v: f64, x0: f64 },
    /// Log-log linear interpolation of `(x, r)` with a power tail beyond the
    /// last node and constant continuation below the first.
    Tabulated { x: Vec<f64>, r: Vec<f64>, tail_exponent: f64 },
}

fn unit() -> f64 {
    1.0
}

impl RateFunction {
    pub fn power(theta: f64) -> Self {
        Self::Power { theta, k: 1.0 }
    }

    /// `exp(theta2 x)`.
    pub fn exp_rate(theta2: f64) -> Self {
        Self::ExpRate { theta2, g: Box::new(Self::Power { theta: 0.0, k: 1.0 }) }
    }

    pub fn validate(&self) -> Result<()> {
        let fin = |name: &str, v: f64| if v.is_finite() { Ok(()) } else { domain(format!("{name} must be finite")) };
        match self {
            Self::Power { theta, k } => {
                fin("theta", *theta)?;
                if !(*k > 0.0) {
                    return domain("power rate needs k > 0");
                }
            }
            Self::PowerLog { theta, p } => {
                fin("theta", *theta)?;
                fin("p", *p)?;
            }
            Self::ExpRate { theta2, g } => {
                if !(*theta2 > 0.0) {
                    return domain("exponential rate needs theta2 > 0");
                }
                match g.as_ref() {
                    Self::Power { .. } | Self::PowerLog { .. } => g.validate()?,
                    _ => return domain("exponential rate prefactor must be a power or power-log rate"),
                }
            }
            Self::OscillatingValley { theta, v, x0 } => {
                if !(*theta > 0.0 && *v > 0.0 && *x0 > 0.0) {
                    return domain("oscillating rate needs theta, v, x0 > 0");
                }
                if x0.powf(-v) >= 2.0 {
                    return domain("oscillating rate must stay positive: need x0^-v < 2");
                }
            }
            Self::Tabulated { x, r, tail_exponent } => {
                if x.len() < 2 || x.len() != r.len() {
                    return domain("tabulated rate needs matching x and r with at least two nodes");
                }
                if !(x[0] > 0.0) || x.windows(2).any(|w| !(w[1] > w[0])) {
                    return domain("tabulated x must be positive and strictly increasing");
                }
                if r.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    return domain("tabulated r must be positive and finite");
                }
                fin("tail_exponent", *tail_exponent)?;
            }
        }
        Ok(())
    }

    /// `R(x)` for `x > 0`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Power { theta, k } => k * x.powf(*theta),
            Self::PowerLog { theta, p } => x.powf(*theta) * (std::f64::consts::E + x).ln().powf(*p),
            Self::ExpRate { .. } | Self::Tabulated { .. } => self.ln_eval(x).exp(),
            Self::OscillatingValley { theta, v, x0 } => {
                let y = x.max(*x0);
                y.powf(*theta) * (2.0 + y.cos() * y.powf(-v))
            }
        }
    }

    /// `ln R(x)`, safe where `R` itself overflows.
    pub fn ln_eval(&self, x: f64) -> f64 {
        match self {
            Self::Power { theta, k } => k.ln() + theta * x.ln(),
            Self::PowerLog { theta, p } => theta * x.ln() + p * (std::f64::consts::E + x).ln().ln(),
            Self::ExpRate { theta2, g } => g.ln_eval(x) + theta2 * x,
            Self::OscillatingValley { .. } => self.eval(x).ln(),
            Self::Tabulated { x: xs, r, tail_exponent } => {
                let n = xs.len();
                if x <= xs[0] {
                    return r[0].ln();
                }
                if x >= xs[n - 1] {
                    return r[n - 1].ln() + tail_exponent * (x / xs[n - 1]).ln();
                }
                let i = xs.partition_point(|&v| v <= x) - 1;
                let s = (r[i + 1] / r[i]).ln() / (xs[i + 1] / xs[i]).ln();
                r[i].ln() + s * (x / xs[i]).ln()
            }
        }
    }

    /// `ln R(e^u)`, finite for `u` beyond the range of `exp`.
    pub fn ln_eval_log(&self, u: f64) -> f64 {
        if u < 700.0 {
            return self.ln_eval(u.exp());
        }
        match self {
            Self::Power { theta, k } => k.ln() + theta * u,
            Self::PowerLog { theta, p } => theta * u + p * ln_e_plus_exp(u).ln(),
            Self::ExpRate { .. } => f64::INFINITY,
            // The oscillation amplitude x^-v is below 1e-300 relative here.
            Self::OscillatingValley { theta, .. } => theta * u + std::f64::consts::LN_2,
            Self::Tabulated { x: xs, r, tail_exponent } => {
                let n = xs.len();
                r[n - 1].ln() + tail_exponent * (u - xs[n - 1].ln())
            }
        }
    }

    /// Whether `R` is non-decreasing on `(0, inf)`, which forces `V = 0`.
    pub fn is_non_decreasing(&self) -> bool {
        match self {
            Self::Power { theta, .. } => *theta >= 0.0,
            Self::PowerLog { theta, p } => *theta >= 0.0 && *p >= 0.0,
            Self::ExpRate { g, .. } => g.is_non_decreasing(),
            Self::OscillatingValley { .. } => false,
            Self::Tabulated { r, tail_exponent, .. } => *tail_exponent >= 0.0 && r.windows(2).all(|w| w[1] >= w[0]),
        }
    }

    /// Whether `int^inf dx / R(x)` is finite, decided from the family's tail.
    pub fn tail_integrable(&self) -> bool {
        match self {
            Self::Power { theta, .. } => *theta > 1.0,
            Self::PowerLog { theta, p } => *theta > 1.0 || (*theta == 1.0 && *p > 1.0),
            Self::ExpRate { .. } => true,
            Self::OscillatingValley { theta, .. } => *theta > 1.0,
            Self::Tabulated { tail_exponent, .. } => *tail_exponent > 1.0,
        }
    }

    /// Points where `R` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::OscillatingValley { x0, .. } => vec![*x0],
            Self::Tabulated { x, .. } => x.clone(),
            _ => Vec::new(),
        }
    }

    /// Integral of `1/R` over `[a, b]`, `0 < a <= b < inf`.
    pub fn inverse_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Self::Power { theta, k } => {
                if (theta - 1.0).abs() < 1e-14 {
                    (b / a).ln() / k
                } else {
                    let e = 1.0 - theta;
                    // a^e ((b/a)^e - 1) / e keeps precision for b close to a.
                    a.powf(e) * (e * (b / a).ln()).exp_m1() / (e * k)
                }
            }
            Self::Tabulated { .. } => tabulated_integral(self, a, b),
            Self::OscillatingValley { .. } => {
                let f = |x: f64| 1.0 / self.eval(x);
                let periods = (b - a) / TWO_PI;
                let mut breaks = self.breakpoints();
                if periods > 1.0 {
                    let k0 = (a / TWO_PI).ceil() as i64;
                    let k1 = (b / TWO_PI).floor() as i64;
                    breaks.extend((k0..=k1).map(|k| k as f64 * TWO_PI));
                }
                integrate_pieces(&f, a, b, &breaks, Tol::new(0.0, 1e-13)).value
            }
            _ => {
                let f = |x: f64| (-self.ln_eval(x)).exp();
                integrate_pieces(&f, a, b, &self.breakpoints(), Tol::new(0.0, 1e-13)).value
            }
        }
    }
}

fn tabulated_integral(rate: &RateFunction, a: f64, b: f64) -> f64 {
    let RateFunction::Tabulated { x: xs, r, tail_exponent } = rate else { unreachable!() };
    let n = xs.len();
    // 1/R on each log-log segment is c x^-s; integrate exactly.
    let seg = |lo: f64, hi: f64, x_ref: f64, r_ref: f64, s: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let c = x_ref.powf(s) / r_ref;
        if (s - 1.0).abs() < 1e-14 {
            c * (hi / lo).ln()
        } else {
            c * (hi.powf(1.0 - s) - lo.powf(1.0 - s)) / (1.0 - s)
        }
    };
    let mut total = 0.0;
    // Constant part below the first node.
    total += (b.min(xs[0]) - a).max(0.0) / r[0];
    for i in 0..n - 1 {
        let lo = a.max(xs[i]);
        let hi = b.min(xs[i + 1]);
        let s = (r[i + 1] / r[i]).ln() / (xs[i + 1] / xs[i]).ln();
        total += seg(lo, hi, xs[i], r[i], s);
    }
    total += seg(a.max(xs[n - 1]), b, xs[n - 1], r[n - 1], *tail_exponent);
    total
}

/// `phi(b) = (1/gamma) int_b^inf dx / R(x)` for a subcritical mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFunction {
    rate: RateFunction,
    gamma: f64,
}

impl PhiFunction {
    /// Fails with [`Error::NotIntegrable`] when `1/R` has a non-integrable tail.
    pub fn new(rate: RateFunction, gamma: f64) -> Result<Self> {
        rate.validate()?;
        if !(gamma > 0.0) {
            return domain(format!("phi needs gamma > 0, got {gamma}"));
        }
        if !rate.tail_integrable() {
            return Err(Error::NotIntegrable(format!("{rate:?}")));
        }
        Ok(Self { rate, gamma })
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phi(&self, b: f64) -> f64 {
        self.ln_phi(b).exp()
    }

    /// `ln phi(b)`, finite even where `phi` underflows.
    pub fn ln_phi(&self, b: f64) -> f64 {
        assert!(b > 0.0, "phi is defined on (0, inf)");
        let ln_g = self.gamma.ln();
        match &self.rate {
            RateFunction::Power { theta, k } => (1.0 - theta) * b.ln() - (k * (theta - 1.0)).ln() - ln_g,
            RateFunction::PowerLog { theta, p } => {
                // In u = ln x the integrand is exp((1 - theta) u) ln(e + e^u)^-p,
                // a power law in u when theta = 1.
                let (theta, p) = (*theta, *p);
                let f = |u: f64| ((1.0 - theta) * u - p * ln_e_plus_exp(u).ln()).exp();
                let u0 = b.ln();
                let w = 1.0f64.max(u0.abs());
                let q = integrate_to_infinity(&f, u0, w, &[], Tol::new(0.0, 1e-13)).expect("tail checked integrable");
                q.value.ln() - ln_g
            }
            RateFunction::ExpRate { theta2, g } => {
                let t2 = *theta2;
                let lead = -t2 * b - ln_g;
                match g.as_ref() {
                    RateFunction::Power { theta: t1, k } if *t1 == 0.0 => lead - (k * t2).ln(),
                    _ => {
                        let f = |u: f64| (-t2 * u - g.ln_eval(b + u)).exp();
                        let q = integrate_to_infinity(&f, 0.0, 1.0 / t2, &[], Tol::new(0.0, 1e-13))
                            .expect("exponential tail is integrable");
                        lead + q.value.ln()
                    }
                }
            }
            RateFunction::OscillatingValley { theta, v, x0 } => {
                let (theta, v, x0) = (*theta, *v, *x0);
                let mut total = 0.0;
                let start = b.max(x0);
                if b < x0 {
                    total += (x0 - b) / self.rate.eval(x0);
                }
                // Exact integration over whole periods, then the period average
                // 1/(x^theta sqrt(4 - x^-2v)) starting at a multiple of 2 pi,
                // where the oscillating remainder integrates to O(x^-theta-1).
                let cut = TWO_PI * ((start + 32.0 * TWO_PI) / TWO_PI).ceil();
                total += self.rate.inverse_integral(start, cut);
                let avg = |x: f64| x.powf(-theta) / (4.0 - x.powf(-2.0 * v)).sqrt();
                let q = integrate_to_infinity(&avg, cut, cut, &[], Tol::new(0.0, 1e-13)).expect("theta > 1");
                total += q.value;
                total.ln() - ln_g
            }
            RateFunction::Tabulated { x: xs, r, tail_exponent } => {
                let n = xs.len();
                let last = xs[n - 1];
                let head = if b < last { tabulated_integral(&self.rate, b, last) } else { 0.0 };
                let from = b.max(last);
                let tail = last.powf(*tail_exponent) / r[n - 1] * from.powf(1.0 - tail_exponent) / (tail_exponent - 1.0);
                (head + tail).ln() - ln_g
            }
        }
    }

    /// `phi(a) - phi(b)` for `a <= b`, computed without cancellation.
    pub fn phi_diff(&self, a: f64, b: f64) -> f64 {
        self.rate.inverse_integral(a, b) / self.gamma
    }

    /// `phi^{-1}(t)` for `t > 0`.
    pub fn phi_inverse(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("phi^-1 needs t > 0, got {t}"));
        }
        match &self.rate {
            RateFunction::Power { theta, k } => {
                return Ok((self.gamma * k * (theta - 1.0) * t).powf(1.0 / (1.0 - theta)));
            }
            RateFunction::ExpRate { theta2, g } => {
                if let RateFunction::Power { theta: t1, k } = g.as_ref() {
                    if *t1 == 0.0 {
                        let b = -(self.gamma * k * theta2 * t).ln() / theta2;
                        if !(b > 0.0) {
                            return Err(Error::OutOfRange(format!("t = {t} exceeds phi(0+)")));
                        }
                        return Ok(b);
                    }
                }
            }
            _ => {}
        }
        let target = t.ln();
        // phi is decreasing, so ln phi(e^u) - ln t changes sign from + to -.
        let f = |u: f64| self.ln_phi(u.exp()) - target;
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut n = 0;
        while f(lo) < 0.0 {
            lo = 2.0 * lo - 1.0;
            n += 1;
            if n > 200 || lo < -700.0 {
                return Err(Error::OutOfRange(format!("t = {t} exceeds phi(0+)")));
            }
        }
        while f(hi) > 0.0 {
            hi = 2.0 * hi + 1.0;
            n += 1;
            if n > 200 || hi > 700.0 {
                return Err(Error::Convergence { routine: "phi_inverse", detail: format!("no bracket for t = {t}") });
            }
        }
        Ok(roots::bisect(f, lo, hi, 1e-14, 0.0)?.exp())
    }

    /// Deterministic flow `x_t = phi^{-1}(phi(x0) + t)`; `x0 = inf` allowed.
    pub fn flow(&self, x0: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(x0);
        }
        if x0.is_infinite() {
            return self.phi_inverse(t);
        }
        self.phi_inverse(self.phi(x0) + t)
    }
}

/// Integral of `1/R` over `[b, inf)` by quadrature, for tests and diagnostics.
pub fn inverse_tail_by_quadrature(rate: &RateFunction, b: f64) -> Result<f64> {
    let f = |x: f64| (-rate.ln_eval(x)).exp();
    let q = integrate_to_infinity(&f, b, b.max(1.0), &rate.breakpoints(), Tol::new(0.0, 1e-12))?;
    Ok(q.value)
}

/// Plain finite integral of `1/R`, for tests.
pub fn inverse_integral_plain(rate: &RateFunction, a: f64, b: f64) -> f64 {
    let f = |x: f64| 1.0 / rate.eval(x);
    integrate(&f, a, b, Tol::new(0.0, 1e-13)).value
}

// ln(e + e^u) without overflow for large u.
fn ln_e_plus_exp(u: f64) -> f64 {
    if u > 1.0 {
        u + (std::f64::consts::E * (-u).exp()).ln_1p()
    } else {
        (std::f64::consts::E + u.exp()).ln()
    }
}
