//! Numerical verdicts for the regularity hypotheses on `phi` and `R`.
//!
//! Limits are estimated along fixed ladders. An estimate counts only when the
//! last two ladder points agree within 5% and the last three move
//! monotonically; otherwise the verdict is `Inconclusive`.

use serde::{Deserialize, Serialize};

use super::{valley_v, PhiFunction, RateFunction};
use crate::error::{domain, Error, Result};
use crate::numeric::geomspace;
use crate::scale::ScaleFunction;

pub const H_LADDER: [f64; 5] = [1.5, 1.2, 1.1, 1.05, 1.01];
pub const X_LADDER: [f64; 5] = [1e3, 1e4, 1e5, 1e6, 1e7];
pub const Z_LADDER: [f64; 7] = [1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];
pub const RHO_LADDER: [f64; 5] = [0.5, 0.2, 0.1, 0.05, 0.01];

const AGREE: f64 = 0.05;
// Distance from the target value below which a limit counts as attained.
const TARGET_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `limsup_{h -> 1+} liminf_{x -> inf} phi(hx) / phi(x) = 1`.
    H1,
    /// `liminf_{x -> inf} phi(x) / phi(hx) > 1` for every `h > 1`.
    H2,
    /// `limsup_{rho -> 0+} lim_{z -> inf} V(z, rho) = 0`.
    H3,
}

/// One ladder: the outer parameter and the inner sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub label: String,
    pub param: f64,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub estimate: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub hypothesis: Hypothesis,
    pub verdict: Verdict,
    pub estimate: f64,
    pub reason: String,
    pub rows: Vec<LadderRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Limit {
    value: f64,
    stable: bool,
    increasing: bool,
}

fn agree(a: f64, b: f64, floor: f64) -> bool {
    let d = (a - b).abs();
    d <= AGREE * a.abs().max(b.abs()) || d <= floor
}

fn inner_limit(values: &[f64], floor: f64) -> Limit {
    let n = values.len();
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let slack = floor * 1e-3;
    let up = b >= a - slack && c >= b - slack;
    let down = b <= a + slack && c <= b + slack;
    let stable = c.is_finite() && agree(b, c, floor) && (up || down);
    Limit { value: c, stable, increasing: up && !stable && (c > b || c == f64::INFINITY) }
}

/// Check H1, H2 or H3 for `rate` (and `gamma` where `phi` is needed).
pub fn check_hypothesis(rate: &RateFunction, gamma: f64, which: Hypothesis) -> Result<HypothesisReport> {
    match which {
        Hypothesis::H1 => check_h1(&PhiFunction::new(rate.clone(), gamma)?),
        Hypothesis::H2 => check_h2(&PhiFunction::new(rate.clone(), gamma)?),
        Hypothesis::H3 => check_h3(rate),
    }
}

fn ratio_rows(pf: &PhiFunction, label: &str, f: impl Fn(f64) -> f64) -> Vec<LadderRow> {
    H_LADDER
        .iter()
        .map(|&h| {
            let values: Vec<f64> = X_LADDER.iter().map(|&x| f(pf.ln_phi(h * x) - pf.ln_phi(x))).collect();
            let lim = inner_limit(&values, 1e-6);
            LadderRow { label: label.into(), param: h, points: X_LADDER.to_vec(), values, estimate: lim.value, stable: lim.stable }
        })
        .collect()
}

// Linear extrapolation to h = 1 from two ladder points.
fn extrapolate(h1: f64, v1: f64, h2: f64, v2: f64) -> f64 {
    v2 + (v2 - v1) * (h2 - 1.0) / (h1 - h2)
}

fn check_h1(pf: &PhiFunction) -> Result<HypothesisReport> {
    // Form A: liminf_x phi(hx)/phi(x); form B: limsup_x (phi(x) - phi(hx))/phi(x).
    let mut rows = ratio_rows(pf, "phi(hx)/phi(x)", f64::exp);
    let rows_b = ratio_rows(pf, "1 - phi(hx)/phi(x)", |l| -l.exp_m1());
    let report = |verdict, estimate, reason: String, rows| HypothesisReport { hypothesis: Hypothesis::H1, verdict, estimate, reason, rows };
    if let Some(r) = rows.iter().chain(rows_b.iter()).find(|r| !r.stable) {
        let reason = format!("inner limit unstable at h = {}", r.param);
        rows.extend(rows_b);
        return Ok(report(Verdict::Inconclusive, f64::NAN, reason, rows));
    }
    let outer = |rs: &[LadderRow]| -> (f64, bool) {
        let l: Vec<f64> = rs.iter().map(|r| r.estimate).collect();
        let h = H_LADDER;
        let e1 = extrapolate(h[2], l[2], h[3], l[3]);
        let e2 = extrapolate(h[3], l[3], h[4], l[4]);
        let mono = l.windows(2).all(|w| w[1] >= w[0] - 1e-12) || l.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        (e2, mono && agree(e1, e2, TARGET_TOL))
    };
    let (est_a, ok_a) = outer(&rows);
    let (est_b, ok_b) = outer(&rows_b);
    rows.extend(rows_b);
    if !(ok_a && ok_b) {
        return Ok(report(Verdict::Inconclusive, est_a, "outer limit in h unstable".into(), rows));
    }
    let va = classify_target(est_a, 1.0);
    let vb = classify_target(est_b, 0.0);
    if va != vb {
        return Ok(report(
            Verdict::Inconclusive,
            est_a,
            format!("dual forms disagree: ratio form {est_a:.4}, difference form {est_b:.4}"),
            rows,
        ));
    }
    let reason = format!("limit estimate {est_a:.4} (target 1), dual form {est_b:.4} (target 0)");
    Ok(report(va, est_a, reason, rows))
}

fn classify_target(est: f64, target: f64) -> Verdict {
    let d = (est - target).abs();
    if d <= TARGET_TOL {
        Verdict::Holds
    } else if d > AGREE {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn check_h2(pf: &PhiFunction) -> Result<HypothesisReport> {
    let mut rows = Vec::new();
    let mut verdict = Verdict::Holds;
    let mut reason = String::from("phi(x)/phi(hx) - 1 bounded away from 0 for every h");
    let mut worst = f64::INFINITY;
    for &h in &H_LADDER {
        // Excess of phi(x)/phi(hx) over one; the question is whether it stays positive.
        let values: Vec<f64> = X_LADDER.iter().map(|&x| (pf.ln_phi(x) - pf.ln_phi(h * x)).exp_m1()).collect();
        let lim = inner_limit(&values, 1e-9);
        worst = worst.min(lim.value);
        if lim.stable && lim.value <= 1e-9 {
            verdict = Verdict::Fails;
            reason = format!("excess vanishes at h = {h}");
        } else if !lim.stable && !lim.increasing && verdict == Verdict::Holds {
            verdict = Verdict::Inconclusive;
            reason = format!("excess not stable at h = {h}");
        }
        rows.push(LadderRow {
            label: "phi(x)/phi(hx) - 1".into(),
            param: h,
            points: X_LADDER.to_vec(),
            values,
            estimate: lim.value,
            stable: lim.stable,
        });
    }
    Ok(HypothesisReport { hypothesis: Hypothesis::H2, verdict, estimate: worst, reason, rows })
}

fn check_h3(rate: &RateFunction) -> Result<HypothesisReport> {
    rate.validate()?;
    let mut rows = Vec::new();
    let mut all_stable = true;
    for &rho in &RHO_LADDER {
        let values: Vec<f64> = X_LADDER.iter().map(|&z| valley_v(rate, z, rho)).collect();
        let lim = inner_limit(&values, 1e-3);
        all_stable &= lim.stable;
        rows.push(LadderRow { label: "V(z, rho)".into(), param: rho, points: X_LADDER.to_vec(), values, estimate: lim.value, stable: lim.stable });
    }
    let n = rows.len();
    let est = rows[n - 1].estimate.max(rows[n - 2].estimate);
    let (verdict, reason) = if !all_stable {
        (Verdict::Inconclusive, "limit in z unstable".to_string())
    } else if est <= 1e-3 {
        (Verdict::Holds, format!("lim_z V(z, rho) -> {est:.3e} as rho -> 0"))
    } else if est > AGREE {
        (Verdict::Fails, format!("valley does not close: {est:.4}"))
    } else {
        (Verdict::Inconclusive, format!("small but non-negligible valley {est:.4}"))
    };
    Ok(HypothesisReport { hypothesis: Hypothesis::H3, verdict, estimate: est, reason, rows })
}

/// Choice of the window `p(z)` in H4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PChoice {
    /// `p(z) = z^-1/2`, for `Delta` with polynomial decay.
    InvSqrt,
    /// `p(z) = 2 ln ln z / (nu z)`, for `Delta` with exponential decay at rate `nu`.
    CramerLogLog { nu: f64 },
    /// Log-log interpolation of user values.
    Table { z: Vec<f64>, p: Vec<f64> },
}

impl PChoice {
    pub fn p(&self, z: f64) -> Result<f64> {
        match self {
            Self::InvSqrt => Ok(z.powf(-0.5)),
            Self::CramerLogLog { nu } => {
                if z <= std::f64::consts::E {
                    return Err(Error::OutOfRange(format!("ln ln z needs z > e, got {z}")));
                }
                Ok(2.0 * z.ln().ln() / (nu * z))
            }
            Self::Table { z: zs, p } => {
                if zs.len() < 2 || zs.len() != p.len() || zs.windows(2).any(|w| !(w[1] > w[0])) || p.iter().any(|&v| !(v > 0.0)) {
                    return domain("p table needs increasing z and positive p");
                }
                if z < zs[0] || z > zs[zs.len() - 1] {
                    return Err(Error::OutOfRange(format!("z = {z} outside the p table")));
                }
                let i = (zs.partition_point(|&v| v <= z) - 1).min(zs.len() - 2);
                let s = (p[i + 1] / p[i]).ln() / (zs[i + 1] / zs[i]).ln();
                Ok(p[i] * (z / zs[i]).powf(s))
            }
        }
    }
}

/// User-supplied decreasing majorant `Vbar(z) = C z^exponent` of `V(z, p(z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValleyBound {
    /// Fit `C` as the maximum of `V(z, p(z)) z^-exponent` over the ladder.
    PowerFit { exponent: f64 },
    Explicit { c: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H4Report {
    pub verdict: Verdict,
    pub gate: Verdict,
    pub cond_i: Verdict,
    pub cond_ii: Verdict,
    pub cond_iii: Verdict,
    pub cond_iii_prime: Option<Verdict>,
    pub fitted_c: Option<f64>,
    pub reasons: Vec<String>,
    pub rows: Vec<LadderRow>,
}

fn bounded_verdict(values: &[f64]) -> Verdict {
    if values.iter().any(|v| !v.is_finite()) {
        return Verdict::Inconclusive;
    }
    let n = values.len();
    let tail = &values[n - 4..];
    if tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + AGREE) + 1e-300) {
        Verdict::Holds
    } else if tail.windows(2).all(|w| w[1] > w[0] * (1.0 + AGREE)) {
        Verdict::Fails
    } else if agree(values[n - 2], values[n - 1], 0.0) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}

/// Decide whether `int^inf f(z) dz` is finite from samples `f(z_k)` on a
/// decade ladder. The first test uses the log-log slope of `f`; near the
/// critical slope `-1` a second test uses the slope of `z f(z)` against
/// `ln z`, which separates `1/(z ln^2 z)` from `1/(z ln z)`.
fn convergence_verdict(zs: &[f64], fs: &[f64]) -> (Verdict, String) {
    if fs.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return (Verdict::Inconclusive, "non-finite integrand".into());
    }
    if fs.iter().rev().take(3).all(|&v| v == 0.0) {
        return (Verdict::Holds, "integrand vanishes".into());
    }
    if fs.iter().rev().take(3).any(|&v| v == 0.0) {
        return (Verdict::Inconclusive, "integrand partially zero".into());
    }
    let n = zs.len();
    let slope = |i: usize, xform: &dyn Fn(f64) -> f64, g: &dyn Fn(usize) -> f64| {
        (g(i + 1).ln() - g(i).ln()) / (xform(zs[i + 1]).ln() - xform(zs[i]).ln())
    };
    let id = |z: f64| z;
    let f = |i: usize| fs[i];
    let (s1, s2) = (slope(n - 3, &id, &f), slope(n - 2, &id, &f));
    let tol = AGREE;
    if agree(s1, s2, 1e-3) {
        if s2 < -1.0 - tol {
            return (Verdict::Holds, format!("tail slope {s2:.4} < -1"));
        }
        if s2 > -1.0 + tol {
            return (Verdict::Fails, format!("tail slope {s2:.4} > -1"));
        }
    }
    let lnz = |z: f64| z.ln();
    let g = |i: usize| zs[i] * fs[i];
    let (t1, t2) = (slope(n - 3, &lnz, &g), slope(n - 2, &lnz, &g));
    if agree(t1, t2, 1e-3) {
        if t2 < -1.0 - tol {
            return (Verdict::Holds, format!("slope {s2:.4} near -1, logarithmic slope {t2:.4} < -1"));
        }
        if t2 > -1.0 + tol {
            return (Verdict::Fails, format!("slope {s2:.4} near -1, logarithmic slope {t2:.4} > -1"));
        }
    }
    (Verdict::Inconclusive, format!("tail slopes {s1:.4}, {s2:.4}; logarithmic {t1:.4}, {t2:.4}"))
}

/// Check H4 with window `p`, comparison constant `c > 1`, and optionally a
/// user majorant for the valley route (iii').
pub fn check_h4(
    sf: &ScaleFunction,
    pf: &PhiFunction,
    p: &PChoice,
    c: f64,
    bound: Option<ValleyBound>,
) -> Result<H4Report> {
    if !(c > 1.0) {
        return domain("H4 needs c > 1");
    }
    let rate = pf.rate();
    let mut reasons = Vec::new();
    let mut rows = Vec::new();

    // Gate: z p(z) non-decreasing and p(z) -> 0.
    let fine = geomspace(Z_LADDER[0], Z_LADDER[Z_LADDER.len() - 1], 241);
    let zp: Vec<f64> = fine.iter().map(|&z| p.p(z).map(|v| v * z)).collect::<Result<_>>()?;
    let p_last = p.p(Z_LADDER[Z_LADDER.len() - 1])?;
    let monotone = zp.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let gate = if !monotone {
        reasons.push("z p(z) is not non-decreasing".into());
        Verdict::Fails
    } else if !(p_last < 0.1 && p_last < p.p(Z_LADDER[0])?) {
        reasons.push("p(z) does not tend to 0".into());
        Verdict::Fails
    } else {
        Verdict::Holds
    };

    let zs = Z_LADDER.to_vec();
    let pz: Vec<f64> = zs.iter().map(|&z| p.p(z)).collect::<Result<_>>()?;
    let deltas: Vec<f64> = zs.iter().zip(&pz).map(|(&z, &pv)| sf.delta(z * pv)).collect::<Result<_>>()?;
    let phi_r = |z: f64| (pf.ln_phi(c * z) + rate.ln_eval(c * z)).exp();

    // (i) (phi(z) - phi(z + z p)) / (phi(z) Delta(z p)) bounded.
    let v_i: Vec<f64> = zs
        .iter()
        .zip(&pz)
        .zip(&deltas)
        .map(|((&z, &pv), &d)| pf.phi_diff(z, z + z * pv) / (pf.phi(z) * d))
        .collect();
    let cond_i = bounded_verdict(&v_i);
    reasons.push(format!("(i) {:?}", cond_i));
    rows.push(row("(i) ratio", &zs, v_i));

    // (ii) int Delta(z p) / (phi(cz) R(cz)) dz finite.
    let f_ii: Vec<f64> = zs.iter().zip(&deltas).map(|(&z, &d)| d / phi_r(z)).collect();
    let (cond_ii, why) = convergence_verdict(&zs, &f_ii);
    reasons.push(format!("(ii) {cond_ii:?}: {why}"));
    rows.push(row("(ii) integrand", &zs, f_ii));

    // (iii) V(z, p) / Delta(z p) bounded.
    let vs: Vec<f64> = zs.iter().zip(&pz).map(|(&z, &pv)| valley_v(rate, z, pv)).collect();
    let v_iii: Vec<f64> = vs.iter().zip(&deltas).map(|(&v, &d)| v / d).collect();
    let cond_iii = bounded_verdict(&v_iii);
    reasons.push(format!("(iii) {cond_iii:?}"));
    rows.push(row("(iii) V/Delta", &zs, v_iii));
    rows.push(row("V(z, p(z))", &zs, vs.clone()));

    // (iii') V <= Vbar decreasing with int Vbar / (phi(cv) R(cv)) finite.
    let mut fitted_c = None;
    let cond_iii_prime = bound.map(|b| {
        let (cc, e, explicit) = match b {
            ValleyBound::PowerFit { exponent } => {
                let cc = zs.iter().zip(&vs).map(|(&z, &v)| v * z.powf(-exponent)).fold(0.0, f64::max);
                (cc, exponent, false)
            }
            ValleyBound::Explicit { c, exponent } => (c, exponent, true),
        };
        fitted_c = Some(cc);
        let scaled: Vec<f64> = zs.iter().zip(&vs).map(|(&z, &v)| v * z.powf(-e)).collect();
        let dominated = !explicit || scaled.iter().all(|&s| s <= cc * (1.0 + 1e-9));
        let bounded = bounded_verdict(&scaled);
        let f: Vec<f64> = zs.iter().map(|&z| cc * z.powf(e) / phi_r(z)).collect();
        let (conv, why) = if cc == 0.0 { (Verdict::Holds, "V vanishes".to_string()) } else { convergence_verdict(&zs, &f) };
        rows.push(row("(iii') V z^-e", &zs, scaled));
        let v = if e > 0.0 || !dominated {
            Verdict::Fails
        } else if bounded == Verdict::Holds && conv == Verdict::Holds {
            Verdict::Holds
        } else if bounded == Verdict::Fails || conv == Verdict::Fails {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        };
        reasons.push(format!("(iii') {v:?}: C = {cc:.4e}, exponent {e}, {why}"));
        v
    });

    let valley_ok = match (cond_iii, cond_iii_prime) {
        (Verdict::Holds, _) | (_, Some(Verdict::Holds)) => Verdict::Holds,
        (Verdict::Fails, None) | (Verdict::Fails, Some(Verdict::Fails)) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    let parts = [cond_i, cond_ii, valley_ok];
    let verdict = if gate == Verdict::Fails || parts.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if parts.iter().all(|&v| v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(H4Report { verdict, gate, cond_i, cond_ii, cond_iii, cond_iii_prime, fitted_c, reasons, rows })
}

fn row(label: &str, zs: &[f64], values: Vec<f64>) -> LadderRow {
    let estimate = *values.last().unwrap_or(&f64::NAN);
    LadderRow { label: label.into(), param: f64::NAN, points: zs.to_vec(), values, estimate, stable: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{LevyMeasure, Mechanism};
    use crate::numeric::gamma;
    use crate::scale::{build_scale, ScaleOptions};

    #[test]
    fn power_rate_satisfies_h1_h2_h3() {
        let r = RateFunction::power(2.0);
        for h in [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3] {
            let rep = check_hypothesis(&r, 1.0, h).unwrap();
            assert_eq!(rep.verdict, Verdict::Holds, "{h:?}: {}", rep.reason);
        }
    }

    #[test]
    fn exponential_rate_fails_h1() {
        let rep = check_hypothesis(&RateFunction::exp_rate(1.0), 1.0, Hypothesis::H1).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails, "{}", rep.reason);
        let rep2 = check_hypothesis(&RateFunction::exp_rate(1.0), 1.0, Hypothesis::H2).unwrap();
        assert_eq!(rep2.verdict, Verdict::Holds, "{}", rep2.reason);
    }

    #[test]
    fn slowly_varying_phi_is_not_declared_h2() {
        // phi ~ 1/ln x: phi(x)/phi(hx) -> 1, so H2 must not hold.
        let rep = check_hypothesis(&RateFunction::PowerLog { theta: 1.0, p: 2.0 }, 1.0, Hypothesis::H2).unwrap();
        assert_ne!(rep.verdict, Verdict::Holds, "{}", rep.reason);
    }

    #[test]
    fn convergence_test_separates_log_corrections() {
        let zs = Z_LADDER.to_vec();
        let f = |g: &dyn Fn(f64) -> f64| zs.iter().map(|&z| g(z)).collect::<Vec<_>>();
        assert_eq!(convergence_verdict(&zs, &f(&|z| z.powf(-1.25))).0, Verdict::Holds);
        assert_eq!(convergence_verdict(&zs, &f(&|z| 1.0 / (z * z.ln().powi(2)))).0, Verdict::Holds);
        assert_eq!(convergence_verdict(&zs, &f(&|z| z.powf(-0.8))).0, Verdict::Fails);
        assert_eq!(convergence_verdict(&zs, &f(&|z| 1.0 / (z * z.ln().sqrt()))).0, Verdict::Fails);
    }

    #[test]
    fn non_monotone_window_fails_gate() {
        let sf = build_scale(&Mechanism::brownian(1.0, 2.0).unwrap(), &ScaleOptions::default()).unwrap();
        let pf = PhiFunction::new(RateFunction::power(2.0), 1.0).unwrap();
        let p = PChoice::Table { z: vec![1e2, 1e4, 1e6, 1e8], p: vec![1e-1, 1e-2, 1e-6, 1e-7] };
        let rep = check_h4(&sf, &pf, &p, 2.0, None).unwrap();
        assert_eq!(rep.gate, Verdict::Fails);
        assert_eq!(rep.verdict, Verdict::Fails);
    }

    #[test]
    fn h4_exponential_case() {
        // Psi = l + l^2 has Cramer root 1.
        let m = Mechanism::brownian(1.0, 2.0).unwrap();
        let sf = build_scale(&m, &ScaleOptions::default()).unwrap();
        let pf = PhiFunction::new(RateFunction::power(2.0), 1.0).unwrap();
        let nu = m.cramer_root().unwrap();
        let rep = check_h4(&sf, &pf, &PChoice::CramerLogLog { nu }, 2.0, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{:?}", rep.reasons);
    }

    #[test]
    fn h4_polynomial_case() {
        let c_pi = 1.0 / gamma(-1.5);
        let m = Mechanism::new(1.0, 0.0, LevyMeasure::StableTail { alpha: 1.5, c_pi }).unwrap();
        let sf = build_scale(&m, &ScaleOptions::default()).unwrap();
        let pf = PhiFunction::new(RateFunction::power(3.0), 1.0).unwrap();
        let rep = check_h4(&sf, &pf, &PChoice::InvSqrt, 2.0, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{:?}", rep.reasons);
    }
}
