//! Recorded paths of `Z`, the time change to `X`, and descent diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hit::{replica_rngs, step_len};
use super::levy::{first_crossing, Increments, Piece};
use super::PathConfig;
use crate::boundary::entrance_test;
use crate::error::{domain, Error, Result};
use crate::hitting::{m_inverse, stable_power_mean};
use crate::mechanism::{Criticality, Mechanism};
use crate::numeric::quantile;
use crate::rates::{PhiFunction, RateFunction};
use crate::scale::ScaleFunction;

/// First passage of a recorded path below `barrier`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub time: f64,
    pub barrier: f64,
}

/// A sampled path of `Z`.
///
/// A jump at time `s` appears as two consecutive points with the same time,
/// before and after the jump, and is also listed in `jumps`. The stable
/// shortcut has no explicit jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jumps: Vec<(f64, f64)>,
    pub passage: Option<Passage>,
}

impl LevyPath {
    fn start(x0: f64) -> Self {
        Self { times: vec![0.0], values: vec![x0], jumps: Vec::new(), passage: None }
    }

    fn last(&self) -> (f64, f64) {
        (*self.times.last().unwrap(), *self.values.last().unwrap())
    }

    /// Append the pieces of one step; returns `true` at the passage.
    fn extend(&mut self, inc: &Increments, pieces: &[Piece], barrier: f64, min_len: f64, rng: &mut rand_chacha::ChaCha8Rng) -> bool {
        for p in pieces {
            let (t, z) = self.last();
            match *p {
                Piece::Jump(j) => {
                    self.times.push(t);
                    self.values.push(z + j);
                    self.jumps.push((t, j));
                }
                Piece::Flow { len, dz, knot } => {
                    if let Some(c) = first_crossing(inc, z, len, dz, knot, barrier, min_len, rng) {
                        self.times.push(t + c);
                        self.values.push(barrier);
                        self.passage = Some(Passage { time: t + c, barrier });
                        return true;
                    }
                    self.times.push(t + len);
                    self.values.push(z + dz);
                }
            }
        }
        false
    }
}

/// Path of `Z` from `x0` on a uniform grid of step `dt` up to `horizon`,
/// stopped at the first passage below zero.
pub fn sample_levy_path(mech: &Mechanism, x0: f64, cfg: &PathConfig) -> Result<LevyPath> {
    cfg.validate()?;
    if !(x0 > 0.0 && x0.is_finite()) {
        return domain(format!("x0 must be positive, got {x0}"));
    }
    if !cfg.horizon.is_finite() || cfg.horizon / cfg.dt > cfg.max_steps as f64 {
        return Err(Error::Config(format!(
            "horizon {} with dt {} needs more than max_steps = {} steps",
            cfg.horizon, cfg.dt, cfg.max_steps
        )));
    }
    let inc = Increments::new(mech, cfg.eps_jump)?;
    let (mut prng, mut brng) = replica_rngs(cfg, 0);
    let n = (cfg.horizon / cfg.dt).round().max(1.0) as usize;
    let mut path = LevyPath::start(x0);
    let mut pieces = Vec::new();
    for i in 0..n {
        let h = if i + 1 == n { cfg.horizon - path.last().0 } else { cfg.dt };
        pieces.clear();
        inc.step(h, &mut prng, &mut pieces);
        if path.extend(&inc, &pieces, 0.0, cfg.dt * 1e-4, &mut brng) {
            break;
        }
    }
    Ok(path)
}

/// Path of `Z` from `x0` with the level-dependent steps of the hitting-time
/// sampler, stopped at the first passage below `b`. `None` if the horizon or
/// step budget ran out.
pub fn sample_path_to(mech: &Mechanism, x0: f64, b: f64, cfg: &PathConfig) -> Result<Option<LevyPath>> {
    cfg.validate()?;
    if !(b > 0.0 && x0 > b && x0.is_finite()) {
        return domain(format!("need finite x0 > b > 0, got x0 = {x0}, b = {b}"));
    }
    let inc = Increments::new(mech, cfg.eps_jump)?;
    Ok(path_to(&inc, x0, b, cfg, 0))
}

fn path_to(inc: &Increments, x0: f64, b: f64, cfg: &PathConfig, r: u64) -> Option<LevyPath> {
    let (mut prng, mut brng) = replica_rngs(cfg, r);
    let mut path = LevyPath::start(x0);
    let mut pieces = Vec::new();
    for _ in 0..cfg.max_steps {
        let (t, z) = path.last();
        if t > cfg.horizon {
            return None;
        }
        pieces.clear();
        inc.step(step_len(cfg, inc, z, b), &mut prng, &mut pieces);
        if path.extend(inc, &pieces, b, cfg.dt * 1e-4, &mut brng) {
            return Some(path);
        }
    }
    None
}

/// The time-changed path `X_t = Z(eta^{-1}(t))`, `eta(s) = int_0^s du / R(Z_u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsbpPath {
    /// `eta` at each point of the source path.
    pub eta: Vec<f64>,
    /// `X` at time `eta[i]`, equal to `Z` at the source point `i`.
    pub values: Vec<f64>,
    pub running_inf: Vec<f64>,
    /// Uniform time grid on `[0, eta_end]` and `X` on it.
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// `(eta(s), size)` for each jump of `Z` at time `s`.
    pub jumps: Vec<(f64, f64)>,
    /// `eta` at the passage below zero, when the source path has one and the
    /// clock is finite there.
    pub lifetime: Option<f64>,
}

impl CsbpPath {
    pub fn end_time(&self) -> f64 {
        *self.eta.last().unwrap()
    }

    fn index(&self, t: f64) -> usize {
        self.eta.partition_point(|&e| e <= t).saturating_sub(1)
    }

    /// Right-continuous `X_t`, linear between recorded points.
    pub fn x_at(&self, t: f64) -> f64 {
        let i = self.index(t);
        if i + 1 >= self.eta.len() || t <= self.eta[i] {
            return self.values[i];
        }
        let f = (t - self.eta[i]) / (self.eta[i + 1] - self.eta[i]);
        self.values[i] + f * (self.values[i + 1] - self.values[i])
    }

    /// Running infimum `inf_{s <= t} X_s`.
    pub fn inf_at(&self, t: f64) -> f64 {
        self.running_inf[self.index(t)].min(self.x_at(t))
    }
}

/// Time change of a recorded path, with `X` resampled on a uniform grid of
/// as many points as the path has distinct times (at most 10001).
pub fn time_change_path(levy: &LevyPath, rate: &RateFunction) -> Result<CsbpPath> {
    rate.validate()?;
    let inv = |z: f64| (-rate.ln_eval(z)).exp();
    let mut eta = Vec::with_capacity(levy.times.len());
    let mut values = Vec::with_capacity(levy.times.len());
    let mut running_inf = Vec::with_capacity(levy.times.len());
    let mut acc = 0.0;
    let mut low = f64::INFINITY;
    let mut lifetime = None;
    for (i, (&s, &z)) in levy.times.iter().zip(&levy.values).enumerate() {
        if i > 0 {
            let ds = s - levy.times[i - 1];
            if ds > 0.0 {
                acc += 0.5 * ds * (inv(levy.values[i - 1]) + inv(z));
            }
        }
        if !acc.is_finite() {
            break;
        }
        if z <= 0.0 {
            lifetime = Some(acc);
        }
        low = low.min(z);
        eta.push(acc);
        values.push(z);
        running_inf.push(low);
    }
    let jumps = levy
        .jumps
        .iter()
        .map(|&(s, j)| {
            let k = levy.times.partition_point(|&u| u < s).min(eta.len() - 1);
            (eta[k], j)
        })
        .collect();
    let mut path = CsbpPath { eta, values, running_inf, t_grid: Vec::new(), x_grid: Vec::new(), jumps, lifetime };
    let mut distinct = levy.times.clone();
    distinct.dedup();
    let n = distinct.len().clamp(2, 10_001);
    let end = path.end_time();
    path.t_grid = (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect();
    path.x_grid = path.t_grid.iter().map(|&t| path.x_at(t)).collect();
    Ok(path)
}

/// Small-time settings of [`speed_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedOptions {
    /// Starting level, the surrogate for infinity.
    pub x0: f64,
    /// Increasing times at which ratios are reported; its range is the window.
    pub t_grid: Vec<f64>,
    /// Decreasing lower ends for the excursion statistic
    /// `sup_{lower <= s <= t_max} X_s / inf_{u <= s} X_u`.
    pub excursion_lower: Vec<f64>,
}

/// Median and 5% / 95% quantiles of a ratio across paths at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBand {
    pub t: f64,
    pub median_ratio: f64,
    pub q05: f64,
    pub q95: f64,
    /// Paths still alive at `t`.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionQuantile {
    pub t_lower: f64,
    pub q95: f64,
}

/// Per-path descent statistics. These are finite-sample evidence for limit
/// statements that hold in probability or almost surely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub evidence: String,
    pub regime: Criticality,
    pub n_paths: usize,
    pub horizon_exceeded: usize,
    /// `X_t / phi^{-1}(t)`; empty unless `gamma > 0`.
    pub flow_ratio: Vec<RatioBand>,
    /// `inf_{s <= t} X_s / m^{-1}(t)`.
    pub infimum_ratio: Vec<RatioBand>,
    /// Share of paths with `inf_{s <= t} X_s / X_t >= 0.9` throughout the window.
    pub infimum_close_fraction: f64,
    pub excursion: Vec<ExcursionQuantile>,
}

struct PathStats {
    flow: Vec<Option<f64>>,
    inf: Vec<Option<f64>>,
    inf_close: bool,
    excursion: Vec<f64>,
}

fn band(t: f64, mut xs: Vec<f64>) -> RatioBand {
    xs.sort_by(f64::total_cmp);
    if xs.is_empty() {
        return RatioBand { t, median_ratio: f64::NAN, q05: f64::NAN, q95: f64::NAN, n: 0 };
    }
    RatioBand { t, median_ratio: quantile(&xs, 0.5), q05: quantile(&xs, 0.05), q95: quantile(&xs, 0.95), n: xs.len() }
}

/// `m^{-1}(t)`, in closed form for the stable mechanism with a power rate.
fn m_inv(sf: &ScaleFunction, rate: &RateFunction, t: f64) -> Result<f64> {
    if let (Some(s), RateFunction::Power { theta, k }) = (sf.mechanism().stable, rate) {
        if *theta > s.alpha {
            let unit = stable_power_mean(s.c, s.alpha, *theta, 1.0) / k;
            return Ok((t / unit).powf(1.0 / (s.alpha - theta)));
        }
    }
    m_inverse(sf, rate, t)
}

/// Small-time behaviour of `X` started from `opts.x0` over `n_paths` paths,
/// each stopped once `Z` falls below `b_stop`.
pub fn speed_report(
    mech: &Mechanism,
    rate: &RateFunction,
    sf: &ScaleFunction,
    b_stop: f64,
    n_paths: usize,
    opts: &SpeedOptions,
    cfg: &PathConfig,
) -> Result<SpeedReport> {
    cfg.validate()?;
    let v = entrance_test(mech, rate, 0.05)?;
    if !v.is_entrance {
        return Err(Error::NotEntrance(v.note));
    }
    let ts = &opts.t_grid;
    if ts.is_empty() || ts.windows(2).any(|p| !(p[1] > p[0])) || !(ts[0] > 0.0) {
        return domain("t_grid must be positive and increasing");
    }
    let (t_lo, t_hi) = (ts[0], *ts.last().unwrap());
    let regime = mech.classify();
    let phi_inv: Option<Vec<f64>> = if regime == Criticality::Subcritical {
        let phi = PhiFunction::new(rate.clone(), mech.gamma)?;
        Some(ts.iter().map(|&t| phi.phi_inverse(t)).collect::<Result<_>>()?)
    } else {
        None
    };
    let m_inv_t: Vec<f64> = ts.iter().map(|&t| m_inv(sf, rate, t)).collect::<Result<_>>()?;
    let inc = Increments::new(mech, cfg.eps_jump)?;
    let per_path: Vec<Option<PathStats>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|r| {
            let levy = path_to(&inc, opts.x0, b_stop, cfg, r)?;
            let x = time_change_path(&levy, rate).ok()?;
            let end = x.end_time();
            let alive = |t: f64| t <= end;
            let flow = ts
                .iter()
                .enumerate()
                .map(|(k, &t)| Some(x.x_at(t) / phi_inv.as_ref()?[k]).filter(|_| alive(t)))
                .collect();
            let inf = ts.iter().zip(&m_inv_t).map(|(&t, &m)| alive(t).then(|| x.inf_at(t) / m)).collect();
            let in_window = |e: f64| e >= t_lo && e <= t_hi;
            let close_pts = x.eta.iter().zip(x.values.iter().zip(&x.running_inf)).filter(|(e, _)| in_window(**e));
            let inf_close = close_pts.map(|(_, (v, l))| l / v).chain(ts.iter().map(|&t| x.inf_at(t) / x.x_at(t))).all(|r| r >= 0.9);
            let excursion = opts
                .excursion_lower
                .iter()
                .map(|&lo| {
                    x.eta
                        .iter()
                        .zip(x.values.iter().zip(&x.running_inf))
                        .filter(|(e, _)| **e >= lo && **e <= t_hi)
                        .map(|(_, (v, l))| v / l)
                        .fold(1.0, f64::max)
                })
                .collect();
            Some(PathStats { flow, inf, inf_close, excursion })
        })
        .collect();
    let done: Vec<&PathStats> = per_path.iter().flatten().collect();
    let column = |k: usize, f: &dyn Fn(&PathStats) -> &Vec<Option<f64>>| -> Vec<f64> {
        done.iter().filter_map(|s| f(s)[k]).collect()
    };
    let flow_ratio = if phi_inv.is_some() {
        ts.iter().enumerate().map(|(k, &t)| band(t, column(k, &|s| &s.flow))).collect()
    } else {
        Vec::new()
    };
    let infimum_ratio = ts.iter().enumerate().map(|(k, &t)| band(t, column(k, &|s| &s.inf))).collect();
    let excursion = opts
        .excursion_lower
        .iter()
        .enumerate()
        .map(|(k, &lo)| {
            let mut xs: Vec<f64> = done.iter().map(|s| s.excursion[k]).collect();
            xs.sort_by(f64::total_cmp);
            ExcursionQuantile { t_lower: lo, q95: if xs.is_empty() { f64::NAN } else { quantile(&xs, 0.95) } }
        })
        .collect();
    let n_done = done.len();
    Ok(SpeedReport {
        evidence: "in-probability evidence".into(),
        regime,
        n_paths,
        horizon_exceeded: n_paths - n_done,
        flow_ratio,
        infimum_ratio,
        infimum_close_fraction: if n_done > 0 { done.iter().filter(|s| s.inf_close).count() as f64 / n_done as f64 } else { f64::NAN },
        excursion,
    })
}
