//! Scale functions.
//!
//! `W` vanishes on `(-inf, 0)` and is characterised on `[0, inf)` by
//! `int_0^inf exp(-q y) W(y) dy = 1 / Psi(q)`. Pure drift, Brownian motion
//! with drift and the stable shortcut have closed forms; every other mechanism
//! is inverted numerically on a fixed Talbot contour and cached on a
//! geometric grid with Hermite interpolation in `ln x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{LevyMeasure, Mechanism};
use crate::numeric::interp::Hermite;
use crate::numeric::quad::{integrate, integrate_to_infinity, Tol};
use crate::numeric::talbot::{euler, fixed_talbot};
use crate::numeric::{gamma, geomspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    PureDrift,
    BrownianDrift,
    Stable,
    NumericInversion,
}

/// Grid and tolerance settings for numerically inverted scale functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Talbot contour nodes.
    pub nodes: usize,
    /// Forward-Laplace residual target for the cached function.
    pub tol: f64,
}

impl Default for ScaleOptions {
    fn default() -> Self {
        Self { x_min: 1e-6, x_max: 1e4, points: 512, nodes: 24, tol: 1e-7 }
    }
}

const DEFAULT_NODES: usize = 24;
// Nodes for the Euler fallback; more terms lose accuracy to cancellation.
const EULER_TERMS: usize = 16;
const RESIDUAL_Q: [f64; 4] = [0.25, 1.0, 4.0, 16.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Inverter {
    Talbot(usize),
    Euler,
}

#[derive(Debug, Clone)]
struct Cache {
    interp: Hermite,
    x_min: f64,
    x_max: f64,
    inverter: Inverter,
}

/// A scale function together with its mechanism.
#[derive(Debug, Clone)]
pub struct ScaleFunction {
    mech: Mechanism,
    method: ScaleMethod,
    w0: f64,
    cache: Option<Cache>,
}

/// Build the scale function of `mech`, choosing a closed form when one exists.
pub fn build_scale(mech: &Mechanism, opts: &ScaleOptions) -> Result<ScaleFunction> {
    let mech = mech.validated()?;
    let method = if mech.stable.is_some() {
        ScaleMethod::Stable
    } else if mech.measure == LevyMeasure::None && mech.sigma2 == 0.0 {
        if mech.gamma <= 0.0 {
            return Err(Error::Domain("pure drift needs gamma > 0".into()));
        }
        ScaleMethod::PureDrift
    } else if mech.measure == LevyMeasure::None {
        ScaleMethod::BrownianDrift
    } else {
        ScaleMethod::NumericInversion
    };
    let mut sf = ScaleFunction { mech, method, w0: mech.w_at_zero(), cache: None };
    if method == ScaleMethod::NumericInversion {
        if !(opts.x_min > 0.0 && opts.x_max > opts.x_min && opts.points >= 8 && opts.nodes >= 8) {
            return Err(Error::Domain(format!("invalid scale options {opts:?}")));
        }
        sf.cache = Some(sf.build_cache(opts, Inverter::Talbot(opts.nodes)));
        let res = sf.max_residual();
        if res > opts.tol {
            sf.cache = Some(sf.build_cache(opts, Inverter::Euler));
            let res_e = sf.max_residual();
            if res_e > 10.0 * opts.tol {
                return Err(Error::Inversion { residual: res.min(res_e), limit: 10.0 * opts.tol });
            }
        }
    }
    Ok(sf)
}

impl ScaleFunction {
    pub fn mechanism(&self) -> &Mechanism {
        &self.mech
    }

    pub fn method(&self) -> ScaleMethod {
        self.method
    }

    /// `W(0)`, positive exactly when the process has bounded variation.
    pub fn w_at_zero(&self) -> f64 {
        self.w0
    }

    /// `W(inf) = 1/gamma` for `gamma > 0`, infinite otherwise.
    pub fn w_limit(&self) -> f64 {
        let g = self.mech.drift();
        if g > 0.0 { 1.0 / g } else { f64::INFINITY }
    }

    /// `W(x)`, zero for negative arguments.
    pub fn w_eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.method {
            ScaleMethod::PureDrift => 1.0 / self.mech.gamma,
            ScaleMethod::BrownianDrift => brownian_w(self.mech.gamma, self.mech.sigma2, x),
            ScaleMethod::Stable => {
                let s = self.mech.stable.expect("stable method implies shortcut");
                x.powf(s.alpha - 1.0) / (s.c * gamma(s.alpha))
            }
            ScaleMethod::NumericInversion => self.cached(x),
        }
    }

    /// `Delta(z) = W(inf) - W(z)`, available for `gamma > 0`.
    pub fn delta(&self, z: f64) -> Result<f64> {
        let g = self.mech.drift();
        if !(g > 0.0) {
            return Err(Error::DeltaUndefined);
        }
        if z < 0.0 {
            return Ok(1.0 / g);
        }
        Ok(match self.method {
            ScaleMethod::PureDrift => 0.0,
            ScaleMethod::BrownianDrift => (-2.0 * g * z / self.mech.sigma2).exp() / g,
            ScaleMethod::Stable => unreachable!("stable shortcut has gamma = 0"),
            ScaleMethod::NumericInversion => {
                if z == 0.0 {
                    return Ok(1.0 / g - self.w0);
                }
                // Invert the transform of Delta itself so small values keep
                // their relative accuracy.
                let m = self.mech;
                let f = move |s: Complex64| 1.0 / (g * s) - 1.0 / m.psi_complex(s);
                self.invert(&f, z).max(0.0)
            }
        })
    }

    /// Numerically inverted `W(x)` without the cache.
    pub fn w_direct(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return self.w0;
        }
        let m = self.mech;
        self.invert(&move |s: Complex64| 1.0 / m.psi_complex(s), x)
    }

    fn invert<F: Fn(Complex64) -> Complex64>(&self, f: &F, x: f64) -> f64 {
        match self.cache.as_ref().map(|c| c.inverter).unwrap_or(Inverter::Talbot(DEFAULT_NODES)) {
            Inverter::Talbot(m) => fixed_talbot(f, x, m),
            Inverter::Euler => euler(f, x, EULER_TERMS),
        }
    }

    fn build_cache(&self, opts: &ScaleOptions, inverter: Inverter) -> Cache {
        let xs = geomspace(opts.x_min, opts.x_max, opts.points);
        let m = self.mech;
        let w0 = self.w0;
        let f = move |s: Complex64| 1.0 / m.psi_complex(s);
        // Transform of W' is q / Psi(q) - W(0).
        let df = move |s: Complex64| s / m.psi_complex(s) - w0;
        let run = |g: &dyn Fn(Complex64) -> Complex64, x: f64| match inverter {
            Inverter::Talbot(n) => fixed_talbot(&g, x, n),
            Inverter::Euler => euler(&g, x, EULER_TERMS),
        };
        let ys: Vec<f64> = xs.iter().map(|&x| run(&f, x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| x * run(&df, x)).collect();
        let h = (opts.x_max / opts.x_min).ln() / (opts.points - 1) as f64;
        Cache { interp: Hermite::with_slopes(opts.x_min.ln(), h, ys, ds), x_min: opts.x_min, x_max: opts.x_max, inverter }
    }

    fn cached(&self, x: f64) -> f64 {
        let c = self.cache.as_ref().expect("numeric method carries a cache");
        if x >= c.x_min && x <= c.x_max {
            return c.interp.eval(x.ln());
        }
        if x > c.x_max {
            return self.w_direct(x);
        }
        let w_min = c.interp.values()[0];
        if self.w0 > 0.0 {
            self.w0 + (w_min - self.w0) * x / c.x_min
        } else {
            // Local power law from the first node.
            let s = c.interp.slopes()[0] / w_min;
            w_min * (x / c.x_min).powf(s)
        }
    }

    fn max_residual(&self) -> f64 {
        RESIDUAL_Q.iter().map(|&q| forward_residual(self, q)).fold(0.0, f64::max)
    }
}

fn brownian_w(g: f64, sigma2: f64, x: f64) -> f64 {
    if g == 0.0 {
        return 2.0 * x / sigma2;
    }
    let k = 2.0 * g / sigma2;
    -(-k * x).exp_m1() / g
}

/// Relative forward residual `|Psi(q) int exp(-q y) W(y) dy - 1|`.
pub fn forward_residual(sf: &ScaleFunction, q: f64) -> f64 {
    let f = |y: f64| (-q * y).exp() * sf.w_eval(y);
    let tol = Tol::new(1e-300, 1e-12);
    let head = integrate(&f, 0.0, 1.0 / q, tol).value;
    let tail = match integrate_to_infinity(&f, 1.0 / q, 1.0 / q, &[], tol) {
        Ok(t) => t.value,
        Err(_) => return f64::INFINITY,
    };
    (sf.mech.psi(q) * (head + tail) - 1.0).abs()
}

/// Diagnostics for a scale function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleDiagnostics {
    /// `(q, |Psi(q) L[W](q) - 1|)` pairs.
    pub residuals: Vec<(f64, f64)>,
    pub monotone: bool,
    /// Empirical constants in `c1 <= W(x) x Psi(1/x) <= c2`.
    pub c1: f64,
    pub c2: f64,
}

/// Check `W` against its defining transform and the two-sided bound
/// `W(x) ~ 1 / (x Psi(1/x))`.
pub fn validate_scale(sf: &ScaleFunction, q_points: &[f64]) -> ScaleDiagnostics {
    let residuals = q_points.iter().map(|&q| (q, forward_residual(sf, q))).collect();
    let xs = geomspace(1e-3, 1e3, 241);
    let ws: Vec<f64> = xs.iter().map(|&x| sf.w_eval(x)).collect();
    let monotone = ws.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let ratios: Vec<f64> = xs.iter().zip(&ws).map(|(&x, &w)| w * x * sf.mech.psi(1.0 / x)).collect();
    let c1 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().copied().fold(0.0, f64::max);
    ScaleDiagnostics { residuals, monotone, c1, c2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::erfc;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn closed_forms_are_selected() {
        let o = ScaleOptions::default();
        assert_eq!(build_scale(&Mechanism::pure_drift(2.0).unwrap(), &o).unwrap().method(), ScaleMethod::PureDrift);
        assert_eq!(build_scale(&Mechanism::brownian(1.0, 2.0).unwrap(), &o).unwrap().method(), ScaleMethod::BrownianDrift);
        assert_eq!(build_scale(&Mechanism::stable(1.0, 1.5).unwrap(), &o).unwrap().method(), ScaleMethod::Stable);
    }

    #[test]
    fn brownian_example_values() {
        // Psi = l + l^2: W = 1 - exp(-x), Delta = exp(-x).
        let sf = build_scale(&Mechanism::brownian(1.0, 2.0).unwrap(), &ScaleOptions::default()).unwrap();
        assert!((sf.w_eval(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((sf.delta(2.0).unwrap() - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(sf.w_eval(-0.5), 0.0);
    }

    #[test]
    fn critical_brownian_is_linear() {
        let sf = build_scale(&Mechanism::brownian(0.0, 0.5).unwrap(), &ScaleOptions::default()).unwrap();
        assert!((sf.w_eval(3.0) - 12.0).abs() < 1e-12);
        assert!(matches!(sf.delta(1.0), Err(Error::DeltaUndefined)));
        assert!(sf.w_limit().is_infinite());
    }

    #[test]
    fn compound_poisson_inversion_matches_partial_fractions() {
        // gamma = 1, rate = 1, mean = 1: 1/Psi = 1/q - 1/(1 + 2q), so
        // W(x) = 1 - exp(-x/2)/2 and W(0) = 1/2.
        let m = Mechanism::new(1.0, 0.0, LevyMeasure::CompoundPoissonExp { rate: 1.0, mean_jump: 1.0 }).unwrap();
        let sf = build_scale(&m, &ScaleOptions::default()).unwrap();
        assert_eq!(sf.method(), ScaleMethod::NumericInversion);
        assert!((sf.w_at_zero() - 0.5).abs() < 1e-15);
        for &x in &[1e-4, 0.01, 0.3, 1.0, 4.0, 30.0, 500.0, 2e4] {
            let exact = 1.0 - 0.5 * (-x / 2.0f64).exp();
            assert!(rel(sf.w_eval(x), exact) < 1e-7, "x={x}: {} vs {exact}", sf.w_eval(x));
        }
        for &x in &[0.5, 5.0, 10.0] {
            let exact = 0.5 * (-x / 2.0f64).exp();
            assert!(rel(sf.delta(x).unwrap(), exact) < 1e-6, "x={x}");
        }
    }

    #[test]
    fn subcritical_stable_tail_matches_erfc_form() {
        // gamma = 1 and c_pi Gamma(-3/2) = 1 give Psi = l + l^{3/2},
        // whose Delta is exp(x) erfc(sqrt(x)).
        let c_pi = 1.0 / gamma(-1.5);
        let m = Mechanism::new(1.0, 0.0, LevyMeasure::StableTail { alpha: 1.5, c_pi }).unwrap();
        let sf = build_scale(&m, &ScaleOptions::default()).unwrap();
        for &x in &[0.01f64, 0.2, 1.0, 7.0, 30.0] {
            let d = x.exp() * erfc(x.sqrt());
            assert!(rel(sf.delta(x).unwrap(), d) < 1e-7, "x={x}");
            assert!(rel(sf.w_eval(x), 1.0 - d) < 1e-7, "x={x}");
        }
    }

    #[test]
    fn diagnostics_on_stable() {
        let sf = build_scale(&Mechanism::stable(1.0, 1.5).unwrap(), &ScaleOptions::default()).unwrap();
        let d = validate_scale(&sf, &[0.5, 1.0, 2.0]);
        assert!(d.monotone);
        for (_, r) in d.residuals {
            assert!(r < 1e-9, "{r}");
        }
        // W(x) x Psi(1/x) = 1/Gamma(alpha) exactly.
        assert!((d.c1 - 1.0 / gamma(1.5)).abs() < 1e-12 && (d.c2 - d.c1).abs() < 1e-12);
    }
}
