//! The valley function `V(z, rho) = sup_{x >= z} (R(x) / R(x + rho z) - 1)_+`.
//!
//! It measures how far `R` can drop over a window of relative width `rho`
//! beyond `z`, and vanishes for non-decreasing rates.

use super::RateFunction;
use crate::numeric::geomspace;

const GRID_POINTS: usize = 10_000;
const GRID_SPAN: f64 = 1e6;
const PHASES: usize = 64;

/// `V(z, rho)` over a log grid of `[z, 1e6 z]` plus the family's tail bound.
///
/// For the oscillating family the supremum at each grid point is taken over
/// the phase of `cos x` with the amplitudes frozen, so the result is a tight
/// upper envelope rather than a sample of an aliased grid.
pub fn valley_v(rate: &RateFunction, z: f64, rho: f64) -> f64 {
    assert!(z > 0.0 && rho > 0.0, "valley needs z, rho > 0");
    if rate.is_non_decreasing() {
        return 0.0;
    }
    let xs = geomspace(z, z * GRID_SPAN, GRID_POINTS);
    let shift = rho * z;
    let grid_sup = match rate {
        RateFunction::OscillatingValley { theta, v, x0 } => {
            xs.iter().map(|&x| oscillating_sup(*theta, *v, *x0, x, shift)).fold(0.0, f64::max)
        }
        _ => {
            let ratio = |x: f64| (rate.ln_eval(x) - rate.ln_eval(x + shift)).exp_m1().max(0.0);
            let mut best = xs.iter().map(|&x| ratio(x)).fold(0.0, f64::max);
            // Piecewise rates peak where x or x + shift sits on a node.
            if let RateFunction::Tabulated { x: nodes, .. } = rate {
                for &n in nodes {
                    for c in [n, n - shift] {
                        if c >= z {
                            best = best.max(ratio(c));
                        }
                    }
                }
            }
            best
        }
    };
    grid_sup.max(tail_bound(rate, z * GRID_SPAN))
}

// Upper bound for the supremum over x >= big.
fn tail_bound(rate: &RateFunction, big: f64) -> f64 {
    match rate {
        RateFunction::OscillatingValley { v, .. } => {
            // (2 + a)/(2 - a) - 1 with a = big^-v bounds every ratio beyond big.
            let a = big.powf(-v);
            2.0 * a / (2.0 - a)
        }
        // Power tails and eventually increasing power-log rates have no valleys
        // beyond the grid.
        _ => 0.0,
    }
}

fn oscillating_sup(theta: f64, v: f64, x0: f64, x: f64, shift: f64) -> f64 {
    let y = x + shift;
    if x < x0 {
        // Frozen region: evaluate directly.
        let r = |u: f64| {
            let w = u.max(x0);
            w.powf(theta) * (2.0 + w.cos() * w.powf(-v))
        };
        return (r(x) / r(y) - 1.0).max(0.0);
    }
    let p = (x / y).powf(theta);
    let a = x.powf(-v);
    let b = y.powf(-v);
    let delta = shift.rem_euclid(2.0 * std::f64::consts::PI);
    let g = |u: f64| p * (2.0 + a * u.cos()) / (2.0 + b * (u + delta).cos()) - 1.0;
    let step = 2.0 * std::f64::consts::PI / PHASES as f64;
    let (mut best_u, mut best) = (0.0, f64::NEG_INFINITY);
    for k in 0..PHASES {
        let u = k as f64 * step;
        let val = g(u);
        if val > best {
            best = val;
            best_u = u;
        }
    }
    // Golden-section refinement around the best sampled phase.
    let (mut lo, mut hi) = (best_u - step, best_u + step);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if g(m1) > g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.max(g(0.5 * (lo + hi))).max(0.0)
}
