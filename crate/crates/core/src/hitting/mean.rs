//! Direct quadrature of the mean hitting time and its relatives.

use serde::{Deserialize, Serialize};

use crate::boundary::entrance_test;
use crate::error::{domain, Error, Result};
use crate::mechanism::Criticality;
use crate::numeric::quad::{integrate_pieces, integrate_to_infinity, Tol};
use crate::numeric::{gamma, roots};
use crate::rates::{check_hypothesis, Hypothesis, PhiFunction, RateFunction, Verdict};
use crate::scale::ScaleFunction;

const REL: f64 = 1e-12;

fn inv_rate(rate: &RateFunction, y: f64) -> f64 {
    (-rate.ln_eval(y)).exp()
}

fn breaks_above(rate: &RateFunction, a: f64) -> Vec<f64> {
    rate.breakpoints().into_iter().filter(|&v| v > a).collect()
}

fn tail_width(b: f64) -> f64 {
    b.max(1e-3)
}

/// `m(b) = int_b^inf W(y - b) / R(y) dy` without the entrance check.
pub(crate) fn mean_from_infinity(sf: &ScaleFunction, rate: &RateFunction, b: f64) -> Result<f64> {
    let f = |y: f64| sf.w_eval(y - b) * inv_rate(rate, y);
    let q = integrate_to_infinity(&f, b, tail_width(b), &breaks_above(rate, b), Tol::new(0.0, REL))?;
    Ok(q.value)
}

/// `E_x[T_b] = int_b^inf [W(y - b) - W(y - x)] / R(y) dy` for finite `x > b`.
pub(crate) fn mean_from_x(sf: &ScaleFunction, rate: &RateFunction, b: f64, x: f64) -> Result<f64> {
    let head_f = |y: f64| sf.w_eval(y - b) * inv_rate(rate, y);
    let head = integrate_pieces(&head_f, b, x, &breaks_above(rate, b), Tol::new(0.0, REL));
    if !head.value.is_finite() {
        return Err(Error::Divergent(format!("E_x[T_b] head on [{b}, {x}]")));
    }
    Ok(head.value + beyond_x(sf, rate, b, x)?)
}

// int_x^inf [W(y - b) - W(y - x)] / R(y) dy
fn beyond_x(sf: &ScaleFunction, rate: &RateFunction, b: f64, x: f64) -> Result<f64> {
    let f = |y: f64| (sf.w_eval(y - b) - sf.w_eval(y - x)) * inv_rate(rate, y);
    Ok(integrate_to_infinity(&f, x, tail_width(x), &breaks_above(rate, x), Tol::new(0.0, REL))?.value)
}

/// `E_x[T_b]`, with `x = inf` giving `m(b)`.
///
/// At `x = inf` infinity must be an entrance boundary, else
/// [`Error::NotEntrance`].
pub fn mean_hit(sf: &ScaleFunction, rate: &RateFunction, b: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) {
        return domain(format!("b must be > 0, got {b}"));
    }
    if !(x >= b) {
        return domain(format!("need x >= b, got x = {x}, b = {b}"));
    }
    if x == b {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        let v = entrance_test(sf.mechanism(), rate, 0.05)?;
        if !v.is_entrance {
            return Err(Error::NotEntrance(v.note));
        }
        return mean_from_infinity(sf, rate, b);
    }
    mean_from_x(sf, rate, b, x)
}

/// `Var_inf(T_b)` as the nested integral
/// `2 int_b^inf W(x-b)/R(x) int_x^inf [W(y-b) - W(y-x)]/R(y) dy dx`,
/// an independent check on `W_1(b)^2 - 2 W_2(b)`.
pub fn variance_double_integral(sf: &ScaleFunction, rate: &RateFunction, b: f64) -> Result<f64> {
    let v = entrance_test(sf.mechanism(), rate, 0.05)?;
    if !v.is_entrance {
        return Err(Error::NotEntrance(v.note));
    }
    let outer = |x: f64| {
        if x <= b {
            return 0.0;
        }
        let w = sf.w_eval(x - b) * inv_rate(rate, x);
        if w == 0.0 {
            return 0.0;
        }
        w * beyond_x(sf, rate, b, x).unwrap_or(f64::NAN)
    };
    let q = integrate_to_infinity(&outer, b, tail_width(b), &breaks_above(rate, b), Tol::new(0.0, 1e-10))?;
    Ok(2.0 * q.value)
}

/// The `b` with `m(b) = t`, by bisection in `ln b`.
pub fn m_inverse(sf: &ScaleFunction, rate: &RateFunction, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange(format!("m^-1 needs t > 0, got {t}")));
    }
    let v = entrance_test(sf.mechanism(), rate, 0.05)?;
    if !v.is_entrance {
        return Err(Error::NotEntrance(v.note));
    }
    let g = |lb: f64| mean_from_infinity(sf, rate, lb.exp()).map(|m| m.ln() - t.ln()).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    // m is decreasing: g(lo) > 0 > g(hi).
    while !(g(lo) > 0.0) {
        lo -= 10f64.ln();
        if lo < -30.0 * 10f64.ln() {
            return Err(Error::OutOfRange(format!("t = {t} exceeds m(0+)")));
        }
    }
    while !(g(hi) < 0.0) {
        hi += 10f64.ln();
        if hi > 30.0 * 10f64.ln() {
            return Err(Error::OutOfRange(format!("t = {t} below m(1e30)")));
        }
    }
    if g(lo) == 0.0 {
        return Ok(lo.exp());
    }
    Ok(roots::bisect(g, lo, hi, 1e-15, 0.0)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanRegime {
    /// `R = g e^(theta2 x)`: `m(b) ~ 1 / (Psi(theta2) R(b))`.
    ExponentialRate,
    /// `Psi ~ C l^alpha`, `R = x^theta l(x)`: `m(b) ~ Gamma(theta-alpha) / (C Gamma(theta) b^(theta-alpha) l(b))`.
    CriticalStableLike,
    /// `gamma > 0` with H1: `m(b) ~ phi(b)`.
    SubcriticalH1,
}

/// Leading-order behaviour of `m(b)` for large `b` in the regime that applies.
pub fn asymptotic_mean(sf: &ScaleFunction, rate: &RateFunction, b: f64) -> Result<(f64, MeanRegime)> {
    let mech = sf.mechanism();
    if let RateFunction::ExpRate { theta2, .. } = rate {
        if mech.classify() == Criticality::Supercritical {
            return Err(Error::NoRegime("supercritical mechanism".into()));
        }
        return Ok((1.0 / (mech.psi(*theta2) * rate.eval(b)), MeanRegime::ExponentialRate));
    }
    match mech.classify() {
        Criticality::Critical => {
            let (c, alpha) = mech.small_lambda_leading().ok_or_else(|| Error::NoRegime("no small-l index".into()))?;
            let (theta, ln_slow) = match rate {
                RateFunction::Power { theta, k } => (*theta, k.ln()),
                RateFunction::PowerLog { theta, p } => (*theta, p * (std::f64::consts::E + b).ln().ln()),
                _ => return Err(Error::NoRegime("critical case needs a power or power-log rate".into())),
            };
            if !(theta > alpha) {
                return Err(Error::NoRegime(format!("theta = {theta} <= alpha = {alpha}")));
            }
            let v = gamma(theta - alpha) / (c * gamma(theta)) * (-(theta - alpha) * b.ln() - ln_slow).exp();
            Ok((v, MeanRegime::CriticalStableLike))
        }
        Criticality::Subcritical => {
            let rep = check_hypothesis(rate, mech.gamma, Hypothesis::H1)?;
            if rep.verdict != Verdict::Holds {
                return Err(Error::NoRegime(format!("H1 not established: {}", rep.reason)));
            }
            Ok((PhiFunction::new(rate.clone(), mech.gamma)?.phi(b), MeanRegime::SubcriticalH1))
        }
        Criticality::Supercritical => Err(Error::NoRegime("supercritical mechanism".into())),
    }
}

/// `W_n(x) = e^(-n theta x) / prod_{j<=n} Psi(j theta)` for `R = e^(theta x)`.
pub fn exp_rate_wn(psi: impl Fn(f64) -> f64, theta: f64, n: usize, x: f64) -> f64 {
    let ln_prod: f64 = (1..=n).map(|j| psi(j as f64 * theta).ln()).sum();
    (-(n as f64) * theta * x - ln_prod).exp()
}

/// `m(b)` for `Psi = c l^alpha` and `R = x^theta`:
/// `Gamma(theta - alpha) / (c Gamma(theta)) b^(alpha - theta)`.
pub fn stable_power_mean(c: f64, alpha: f64, theta: f64, b: f64) -> f64 {
    gamma(theta - alpha) / (c * gamma(theta)) * b.powf(alpha - theta)
}
