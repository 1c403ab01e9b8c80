//! The recursion `W_{n+1}(x) = int_x^inf W(z - x) omega(z) W_n(z) dz`, `W_0 = 1`,
//! and the series built from it.
//!
//! Every level lives on one geometric grid starting at `x_min`. Between nodes
//! a level is interpolated by a monotone cubic in `(ln x, ln W_n)`; power
//! laws, the common critical shape, are reproduced exactly. Beyond the grid
//! the last log-log slope is continued. Where a level underflows or vanishes
//! (an indicator weight) it is taken as zero from the first zero node on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Omega;
use crate::error::{domain, Error, Result};
use crate::numeric::interp::Hermite;
use crate::numeric::quad::{integrate_to_infinity, Tol};
use crate::numeric::geomspace;
use crate::scale::ScaleFunction;

/// Hard limit on the series order reached by automatic extension.
pub const N_CAP: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WnOptions {
    /// First grid point; tables answer queries at `x >= x_min` only.
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Orders built up front; more are added on demand.
    pub n_max: usize,
    /// Relative quadrature tolerance per node, also the series tolerance.
    pub tol: f64,
}

impl Default for WnOptions {
    fn default() -> Self {
        Self { x_min: 1.0, x_max: 1e6, points: 640, n_max: 12, tol: 1e-10 }
    }
}

impl WnOptions {
    pub fn starting_at(x_min: f64) -> Self {
        Self { x_min, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
struct Level {
    ln_vals: Vec<f64>,
    /// Number of leading nodes with a positive value.
    positive: usize,
    interp: Option<Hermite>,
    tail_slope: f64,
    trunc_x: f64,
}

/// `W_0, ..., W_N` on a shared grid.
#[derive(Debug, Clone)]
pub struct WnTable {
    sf: ScaleFunction,
    omega: Omega,
    xs: Vec<f64>,
    u0: f64,
    h: f64,
    tol: f64,
    levels: Vec<Level>,
}

impl WnTable {
    /// Build `W_0..W_{n_max}` for weight `omega`.
    ///
    /// Fails with [`Error::Summability`] when `W_1` is infinite on the grid.
    pub fn build(sf: &ScaleFunction, omega: Omega, opts: &WnOptions) -> Result<Self> {
        omega.validate()?;
        if !(opts.x_min > 0.0 && opts.x_max > opts.x_min && opts.points >= 8 && opts.tol > 0.0) {
            return domain(format!("invalid table options {opts:?}"));
        }
        let xs = geomspace(opts.x_min, opts.x_max, opts.points);
        let u0 = opts.x_min.ln();
        let h = (opts.x_max / opts.x_min).ln() / (opts.points - 1) as f64;
        let one = Level {
            ln_vals: vec![0.0; xs.len()],
            positive: xs.len(),
            interp: Some(Hermite::from_values(u0, h, vec![0.0; xs.len()])),
            tail_slope: 0.0,
            trunc_x: opts.x_min,
        };
        let mut t = Self { sf: sf.clone(), omega, xs, u0, h, tol: opts.tol, levels: vec![one] };
        t.extend_to(opts.n_max.max(1))?;
        Ok(t)
    }

    pub fn omega(&self) -> &Omega {
        &self.omega
    }

    pub fn scale(&self) -> &ScaleFunction {
        &self.sf
    }

    pub fn grid(&self) -> &[f64] {
        &self.xs
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    /// Highest order built so far.
    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }

    /// Largest integration point reached while building level `n`.
    pub fn trunc_x(&self, n: usize) -> f64 {
        self.levels[n].trunc_x
    }

    /// Stored `W_n` at grid node `i`.
    pub fn node_value(&self, n: usize, i: usize) -> f64 {
        self.levels[n].ln_vals[i].exp()
    }

    /// Build levels up to order `n`.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.order() < n {
            let next = self.order() + 1;
            let results: Vec<Result<(f64, f64)>> =
                self.xs.par_iter().map(|&x| self.integrate_level(next - 1, x)).collect();
            let mut vals = Vec::with_capacity(self.xs.len());
            let mut trunc = self.xs[0];
            for (r, &x) in results.into_iter().zip(&self.xs) {
                let (v, end) = r.map_err(|e| match e {
                    Error::Divergent(msg) | Error::Summability(msg) => {
                        Error::Summability(format!("W_{next}({x:.6e}) diverges: {msg}"))
                    }
                    other => other,
                })?;
                vals.push(v);
                trunc = trunc.max(end);
            }
            self.levels.push(self.make_level(vals, trunc));
        }
        Ok(())
    }

    fn make_level(&self, vals: Vec<f64>, trunc_x: f64) -> Level {
        let positive = vals.iter().position(|&v| !(v > 0.0)).unwrap_or(vals.len());
        let ln_vals: Vec<f64> = vals.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        let interp = (positive >= 2).then(|| Hermite::from_values(self.u0, self.h, ln_vals[..positive].to_vec()));
        let tail_slope = match &interp {
            Some(hm) if positive == vals.len() => hm.slopes()[positive - 1].min(0.0),
            _ => 0.0,
        };
        Level { ln_vals, positive, interp, tail_slope, trunc_x }
    }

    /// Interpolated `W_n(z)` for `z >= x_min`.
    fn level_eval(&self, n: usize, z: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let lv = &self.levels[n];
        let u = z.ln();
        let s = (u - self.u0) / self.h;
        let p = lv.positive;
        if p == 0 {
            return 0.0;
        }
        let last = (p - 1) as f64;
        if s <= last {
            return match &lv.interp {
                Some(hm) => hm.eval(u).exp(),
                None => lv.ln_vals[0].exp(),
            };
        }
        if p < lv.ln_vals.len() {
            // Linear fade to zero across the first vanishing cell.
            return if s < last + 1.0 { lv.ln_vals[p - 1].exp() * (last + 1.0 - s) } else { 0.0 };
        }
        let u_max = self.u0 + self.h * last;
        (lv.ln_vals[p - 1] + lv.tail_slope * (u - u_max)).exp()
    }

    // W_{n+1}(x) by quadrature against interpolated W_n, with the far end reached.
    fn integrate_level(&self, n: usize, x: f64) -> Result<(f64, f64)> {
        let f = |z: f64| {
            let w = self.sf.w_eval(z - x);
            if w == 0.0 {
                return 0.0;
            }
            let om = self.omega.eval(z);
            if om == 0.0 {
                return 0.0;
            }
            w * om * self.level_eval(n, z)
        };
        let mut breaks: Vec<f64> = self.omega.breakpoints().into_iter().filter(|&b| b > x).collect();
        let lv = &self.levels[n];
        if lv.positive < self.xs.len() {
            for i in [lv.positive.saturating_sub(1), lv.positive] {
                if self.xs[i] > x {
                    breaks.push(self.xs[i]);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        let width = 0.5 * x.max(1e-3);
        let q = integrate_to_infinity(&f, x, width, &breaks, Tol::new(0.0, self.tol))?;
        let end = x + width * (2f64.powi(q.panels as i32) - 1.0);
        Ok((q.value, end))
    }

    /// `ln W_n(x)` for `x >= x_min`, `-inf` at `x = inf` for `n >= 1`.
    ///
    /// At grid nodes the stored value is returned; elsewhere `W_n(x)` is
    /// integrated directly against the interpolated `W_{n-1}`.
    pub fn ln_value(&mut self, n: usize, x: f64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        if x == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if !(x >= self.xs[0] * (1.0 - 1e-12)) {
            return Err(Error::OutOfRange(format!("x = {x} below the table start {}", self.xs[0])));
        }
        self.extend_to(n)?;
        let s = (x.ln() - self.u0) / self.h;
        let i = s.round();
        if (s - i).abs() < 1e-9 && (i as usize) < self.xs.len() {
            return Ok(self.levels[n].ln_vals[i as usize]);
        }
        let (v, _) = self.integrate_level(n - 1, x)?;
        Ok(if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
    }

    pub fn value(&mut self, n: usize, x: f64) -> Result<f64> {
        Ok(self.ln_value(n, x)?.exp())
    }
}

/// Partial sums of `sum_n lambda^n W_n(b)` and `sum_n lambda^n W_n(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSums {
    pub at_b: f64,
    pub at_x: f64,
    pub terms: usize,
    /// `lambda / r` with `r` the last term ratio: a crude radius estimate.
    pub radius_hint: f64,
}

/// Sum both series to relative tolerance `table.tol`.
///
/// Convergence is declared once the last three term ratios `r` are below one
/// and the geometric bound `t_n r / (1 - r)` on the remainder is below
/// `tol` times the partial sum. Three non-decreasing ratios at or above one
/// signal divergence, as does reaching [`N_CAP`] terms.
pub fn series_sums(table: &mut WnTable, b: f64, lambda: f64, x: f64) -> Result<SeriesSums> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    if !(x >= b) {
        return domain(format!("need x >= b, got x = {x}, b = {b}"));
    }
    let mut sum_b = 1.0;
    let mut sum_x = 1.0;
    if lambda == 0.0 || table.omega.is_zero() {
        return Ok(SeriesSums { at_b: 1.0, at_x: 1.0, terms: 0, radius_hint: f64::INFINITY });
    }
    let ln_l = lambda.ln();
    let mut prev = 1.0;
    let mut ratios: Vec<f64> = Vec::new();
    let tol = table.tol;
    for n in 1..=N_CAP {
        if n > table.order() {
            table.extend_to((2 * table.order()).min(N_CAP))?;
        }
        let tb = (n as f64 * ln_l + table.ln_value(n, b)?).exp();
        let tx = if x == b { tb } else { (n as f64 * ln_l + table.ln_value(n, x)?).exp() };
        if !tb.is_finite() {
            return Err(Error::SeriesDiverges { lambda, radius_hint: radius(lambda, &ratios) });
        }
        sum_b += tb;
        sum_x += tx;
        if tb == 0.0 {
            return Ok(SeriesSums { at_b: sum_b, at_x: sum_x, terms: n, radius_hint: f64::INFINITY });
        }
        ratios.push(tb / prev);
        prev = tb;
        let k = ratios.len();
        if k >= 3 {
            let last3 = &ratios[k - 3..];
            let r = last3.iter().cloned().fold(0.0, f64::max);
            if r < 1.0 && tb * r / (1.0 - r) <= tol * sum_b {
                return Ok(SeriesSums { at_b: sum_b, at_x: sum_x, terms: n, radius_hint: radius(lambda, &ratios) });
            }
            if last3.iter().all(|&q| q >= 1.0) && last3.windows(2).all(|w| w[1] >= w[0]) {
                return Err(Error::SeriesDiverges { lambda, radius_hint: radius(lambda, &ratios) });
            }
        }
    }
    Err(Error::SeriesDiverges { lambda, radius_hint: radius(lambda, &ratios) })
}

fn radius(lambda: f64, ratios: &[f64]) -> f64 {
    match ratios.last() {
        Some(&r) if r > 0.0 => lambda / r,
        _ => f64::INFINITY,
    }
}

/// `E_x[exp(-lambda T_b)]` from the `W_n` series; `x = inf` for the process
/// started at infinity. The table must carry `omega = 1/R`.
pub fn laplace_hit(table: &mut WnTable, b: f64, lambda: f64, x: f64) -> Result<f64> {
    let s = series_sums(table, b, lambda, x)?;
    Ok(if x == f64::INFINITY { 1.0 / s.at_b } else { s.at_x / s.at_b })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSummary {
    pub b: f64,
    pub x: f64,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub laplace: Vec<(f64, f64)>,
    pub series_radius_hint: Option<f64>,
}

/// Mean, second moment and variance of `T_b` under `P_x` from `W_1, W_2`.
pub fn hit_moments(table: &mut WnTable, b: f64, x: f64) -> Result<HittingSummary> {
    if !(x >= b) {
        return domain(format!("need x >= b, got x = {x}, b = {b}"));
    }
    if x == b {
        return Ok(HittingSummary { b, x, mean: 0.0, second_moment: 0.0, variance: 0.0, laplace: Vec::new(), series_radius_hint: None });
    }
    let w1b = table.value(1, b)?;
    let w2b = table.value(2, b)?;
    let (w1x, w2x) = (table.value(1, x)?, table.value(2, x)?);
    let mean = w1b - w1x;
    let second_moment = 2.0 * (w2x - w2b + w1b * (w1b - w1x));
    let mut variance = second_moment - mean * mean;
    if variance < 0.0 {
        if variance < -1e3 * table.tol * second_moment.abs() {
            return Err(Error::NegativeVariance(variance));
        }
        variance = 0.0;
    }
    Ok(HittingSummary { b, x, mean, second_moment, variance, laplace: Vec::new(), series_radius_hint: None })
}

/// [`hit_moments`] plus Laplace values at each `lambda`.
pub fn hitting_summary(table: &mut WnTable, b: f64, x: f64, lambdas: &[f64]) -> Result<HittingSummary> {
    let mut s = hit_moments(table, b, x)?;
    let mut hint = f64::INFINITY;
    for &l in lambdas {
        let sums = series_sums(table, b, l, x)?;
        hint = hint.min(sums.radius_hint);
        let v = if x == f64::INFINITY { 1.0 / sums.at_b } else { sums.at_x / sums.at_b };
        s.laplace.push((l, v));
    }
    s.series_radius_hint = hint.is_finite().then_some(hint);
    Ok(s)
}

/// `E_x[exp(-int_0^T omega(Z_s) ds); T < inf]` with `T` the first passage of
/// `Z` below `b`. Builds its own table starting at `b`.
pub fn occupation_laplace(sf: &ScaleFunction, omega: Omega, b: f64, x: f64, opts: &WnOptions) -> Result<f64> {
    if !(b > 0.0) {
        return domain("occupation needs b > 0");
    }
    let mut t = WnTable::build(sf, omega, &WnOptions { x_min: b, ..*opts })?;
    let s = series_sums(&mut t, b, 1.0, x).map_err(|e| match e {
        Error::SeriesDiverges { lambda, radius_hint } => {
            Error::Summability(format!("weighted series diverges (scale {lambda}, radius estimate {radius_hint:.3e})"))
        }
        other => other,
    })?;
    Ok(if x == f64::INFINITY { 1.0 / s.at_b } else { s.at_x / s.at_b })
}
