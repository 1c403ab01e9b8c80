//! Adaptive Gauss-Kronrod quadrature on finite intervals and on half-lines.
//!
//! Half-line integrals are summed over panels of doubling width. Once the
//! panel contributions fall below tolerance the remainder is closed with a
//! geometric series built from the last two panel ratios, which is exact for
//! power-law tails on a doubling grid.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod abscissae 1, 3, 5, 7, 9.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Absolute and relative error targets. The looser of the two wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub const fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tol {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-10 }
    }
}

/// Result of a finite-interval integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// One application of the 21-point Kronrod rule with its embedded Gauss rule.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

const MAX_INTERVALS: usize = 4000;

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate meets `tol` or the interval budget is spent. Exhausting the budget
/// is reported through `converged = false` rather than an error so callers can
/// decide whether the achieved accuracy is acceptable.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tol) -> Quad {
    if a == b {
        return Quad { value: 0.0, error: 0.0, converged: true };
    }
    let (v, e) = gk21(f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol.target(total) {
        if pieces.len() >= MAX_INTERVALS {
            return Quad { value: total, error: err, converged: false };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, pv, pe) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Interval collapsed to machine resolution; keep what we have.
            pieces.push((lo, hi, pv, 0.0));
            err -= pe;
            continue;
        }
        let (lv, le) = gk21(f, lo, mid);
        let (rv, re) = gk21(f, mid, hi);
        pieces.push((lo, mid, lv, le));
        pieces.push((mid, hi, rv, re));
        total += lv + rv - pv;
        err = (err + le + re - pe).max(0.0);
    }
    Quad { value: total, error: err, converged: true }
}

/// Integrate over `[a, b]` split at the interior `breaks`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: Tol) -> Quad {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let mut out = Quad { value: 0.0, error: 0.0, converged: true };
    for w in edges.windows(2) {
        let q = integrate(f, w[0], w[1], tol);
        out.value += q.value;
        out.error += q.error;
        out.converged &= q.converged;
    }
    out
}

/// Result of a half-line integration.
#[derive(Debug, Clone, PartialEq)]
pub struct TailQuad {
    pub value: f64,
    pub error: f64,
    /// Ratio of the last two panel integrals. A value `r` corresponds to a
    /// local log-log slope of `log2(r) - 1` for the integrand.
    pub last_ratio: f64,
    /// Contribution added by the geometric completion.
    pub completion: f64,
    pub panels: usize,
}

impl TailQuad {
    /// Log-log slope of the integrand implied by the final panel ratio.
    pub fn tail_slope(&self) -> f64 {
        if self.last_ratio > 0.0 {
            self.last_ratio.log2() - 1.0
        } else {
            f64::NEG_INFINITY
        }
    }
}

const MAX_PANELS: usize = 200;
const MIN_PANELS: usize = 4;

/// Integrate `f` over `[a, inf)` on doubling panels `a + w (2^k - 1)`.
///
/// `breaks` are extra interior cut points (kinks or jumps of the integrand).
/// Fails with [`Error::Divergent`] when the panel ratios stay at or above one.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    first_width: f64,
    breaks: &[f64],
    tol: Tol,
) -> Result<TailQuad> {
    if !(first_width > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("half-line quadrature needs finite a and positive width, got a={a}, w={first_width}")));
    }
    let mut sum: f64 = 0.0;
    let mut err = 0.0;
    let mut prev: Option<f64> = None;
    let mut ratio = 0.0;
    let mut quiet = 0usize;
    let mut lo = a;
    let mut width = first_width;
    for k in 0..MAX_PANELS {
        let hi = lo + width;
        // Panel tolerance tracks the running total so tiny panels stay cheap.
        let panel_tol = Tol::new(tol.abs.max(tol.rel * sum.abs() * 0.1), tol.rel);
        let q = integrate_pieces(f, lo, hi, breaks, panel_tol);
        if !q.value.is_finite() {
            return Err(Error::Divergent(format!("non-finite panel integral on [{lo:.6e}, {hi:.6e}]")));
        }
        sum += q.value;
        err += q.error;
        if let Some(p) = prev {
            ratio = if p != 0.0 { q.value / p } else if q.value == 0.0 { 0.0 } else { f64::INFINITY };
        }
        prev = Some(q.value);
        let small = q.value.abs() <= tol.target(sum);
        quiet = if small { quiet + 1 } else { 0 };
        if k + 1 >= MIN_PANELS && quiet >= 2 {
            let completion = if ratio > 0.0 && ratio < 1.0 { q.value * ratio / (1.0 - ratio) } else { 0.0 };
            return Ok(TailQuad {
                value: sum + completion,
                error: err + completion.abs() * 0.1,
                last_ratio: ratio,
                completion,
                panels: k + 1,
            });
        }
        if k >= 8 && ratio >= 1.0 && quiet == 0 {
            // Non-decreasing panel integrals on a doubling grid: slope >= -1.
            return Err(Error::Divergent(format!("panel ratio {ratio:.4} >= 1 at x = {hi:.3e}")));
        }
        lo = hi;
        width *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    if ratio > 0.0 && ratio < 1.0 {
        let last = prev.unwrap_or(0.0);
        let completion = last * ratio / (1.0 - ratio);
        return Ok(TailQuad { value: sum + completion, error: err + completion.abs(), last_ratio: ratio, completion, panels: MAX_PANELS });
    }
    Err(Error::Divergent(format!("half-line integral did not settle after {MAX_PANELS} panels")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(&|x: f64| x.powi(7) - 3.0 * x * x, 0.0, 2.0, Tol::default());
        assert!((q.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let q = integrate(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, Tol::rel(1e-12));
        assert!((q.value - 2.0).abs() < 1e-10, "{q:?}");
    }

    #[test]
    fn power_tail_completion() {
        // int_1^inf x^-2.5 dx = 1/1.5
        let q = integrate_to_infinity(&|x: f64| x.powf(-2.5), 1.0, 0.5, &[], Tol::rel(1e-12)).unwrap();
        assert!((q.value - 1.0 / 1.5).abs() < 1e-10, "{q:?}");
        assert!((q.tail_slope() + 2.5).abs() < 1e-6);
    }

    #[test]
    fn exponential_tail() {
        let q = integrate_to_infinity(&|x: f64| (-x).exp(), 0.0, 1.0, &[], Tol::rel(1e-12)).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_tail_is_divergent() {
        let r = integrate_to_infinity(&|x: f64| 1.0 / x, 1.0, 1.0, &[], Tol::rel(1e-10));
        assert!(matches!(r, Err(Error::Divergent(_))));
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let f = |x: f64| if x < 0.3 { 1.0 } else { 0.0 };
        let q = integrate_pieces(&f, 0.0, 1.0, &[0.3], Tol::rel(1e-13));
        assert!((q.value - 0.3).abs() < 1e-14);
    }
}
