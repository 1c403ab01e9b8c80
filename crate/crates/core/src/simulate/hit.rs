//! Monte Carlo of passage functionals `int_0^T w(Z_s) ds`, with `T` the first
//! passage of `Z` below `b`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::levy::{first_crossing, merge_halves, Increments, Piece};
use super::{McSummary, PathConfig};
use crate::boundary::{entrance_test, entrance_test_empirical, EmpiricalEntranceReport, LadderPoint};
use crate::error::{domain, Result};
use crate::hitting::Omega;
use crate::mechanism::Mechanism;
use crate::numeric::pairwise_sum;
use crate::rates::RateFunction;

/// Path and bridge generators for one replica. Both are ChaCha streams keyed
/// by `(seed, replica)`, so results do not depend on scheduling.
pub(crate) fn replica_rngs(cfg: &PathConfig, r: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut path = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bridge = path.clone();
    let id = cfg.replica.wrapping_add(r);
    path.set_stream(id.wrapping_mul(2));
    bridge.set_stream(id.wrapping_mul(2).wrapping_add(1));
    (path, bridge)
}

/// Step length at level `z`: `dt (z / b)^kappa` above the barrier, divided
/// by `barrier_refine` within two step spreads of `b`.
pub(crate) fn step_len(cfg: &PathConfig, inc: &Increments, z: f64, b: f64) -> f64 {
    let mut h = cfg.dt * (z / b).max(1.0).powf(cfg.kappa);
    if z - b < 2.0 * inc.spread(h) {
        h /= cfg.barrier_refine as f64;
    }
    h
}

/// Walks `Z` piece by piece, accumulating `int w(Z_s) ds` by the trapezoid
/// rule until the first passage below `b`.
struct Walker {
    b: f64,
    min_len: f64,
    z: f64,
    t: f64,
    integral: f64,
    done: bool,
}

impl Walker {
    fn new(x0: f64, b: f64, cfg: &PathConfig) -> Self {
        Self { b, min_len: cfg.dt * 1e-4, z: x0, t: 0.0, integral: 0.0, done: false }
    }

    fn feed<W: Fn(f64) -> f64>(&mut self, inc: &Increments, p: &Piece, w: &W, rng: &mut ChaCha8Rng) {
        if self.done {
            return;
        }
        match *p {
            Piece::Jump(j) => self.z += j,
            Piece::Flow { len, dz, knot } => match first_crossing(inc, self.z, len, dz, knot, self.b, self.min_len, rng) {
                Some(c) => {
                    self.integral += 0.5 * c * (w(self.z) + w(self.b));
                    self.t += c;
                    self.z = self.b;
                    self.done = true;
                }
                None => {
                    let z1 = self.z + dz;
                    self.integral += 0.5 * len * (w(self.z) + w(z1));
                    self.t += len;
                    self.z = z1;
                }
            },
        }
    }

    fn result(&self) -> Option<f64> {
        self.done.then_some(self.integral)
    }
}

fn check_start(x0: f64, b: f64) -> Result<()> {
    if !(b > 0.0 && x0 > b && x0.is_finite()) {
        return domain(format!("need finite x0 > b > 0, got x0 = {x0}, b = {b}"));
    }
    Ok(())
}

/// One replica of the passage functional; `None` when the horizon or the
/// step budget ran out first.
fn run_single<W: Fn(f64) -> f64>(inc: &Increments, w: &W, x0: f64, b: f64, cfg: &PathConfig, r: u64) -> Option<f64> {
    let (mut prng, mut brng) = replica_rngs(cfg, r);
    let mut walker = Walker::new(x0, b, cfg);
    let mut pieces = Vec::new();
    let mut steps = 0u64;
    while !walker.done {
        if walker.t > cfg.horizon || steps >= cfg.max_steps {
            return None;
        }
        let h = step_len(cfg, inc, walker.z, b);
        pieces.clear();
        inc.step(h, &mut prng, &mut pieces);
        for p in &pieces {
            walker.feed(inc, p, w, &mut brng);
        }
        steps += 1;
    }
    walker.result()
}

/// One replica seen at two resolutions: the path is drawn in half steps, the
/// fine walker sees every half step and the coarse walker sees pairs merged.
fn run_coupled<W: Fn(f64) -> f64>(
    inc: &Increments,
    w: &W,
    x0: f64,
    b: f64,
    cfg: &PathConfig,
    r: u64,
) -> (Option<f64>, Option<f64>) {
    let (mut prng, brng) = replica_rngs(cfg, r);
    let (mut brng_c, mut brng_f) = (brng.clone(), brng);
    let mut coarse = Walker::new(x0, b, cfg);
    let mut fine = Walker::new(x0, b, cfg);
    let (mut first, mut second, mut merged) = (Vec::new(), Vec::new(), Vec::new());
    let mut steps = 0u64;
    while !(coarse.done && fine.done) {
        let lead = if coarse.done { &fine } else { &coarse };
        if lead.t > cfg.horizon || steps >= cfg.max_steps {
            break;
        }
        let h = step_len(cfg, inc, lead.z, b);
        first.clear();
        second.clear();
        merged.clear();
        inc.step(0.5 * h, &mut prng, &mut first);
        inc.step(0.5 * h, &mut prng, &mut second);
        merge_halves(&first, &second, &mut merged);
        for p in first.iter().chain(&second) {
            fine.feed(inc, p, w, &mut brng_f);
        }
        for p in &merged {
            coarse.feed(inc, p, w, &mut brng_c);
        }
        steps += 1;
    }
    (coarse.result(), fine.result())
}

fn inv_rate(rate: &RateFunction) -> impl Fn(f64) -> f64 + '_ {
    move |z| (-rate.ln_eval(z)).exp()
}

/// Per-replica `T_b` under `P_{x0}`, in replica order; `None` marks a
/// replica that exceeded the horizon.
pub fn sample_hit_draws(
    mech: &Mechanism,
    rate: &RateFunction,
    x0: f64,
    b: f64,
    n_reps: usize,
    cfg: &PathConfig,
) -> Result<Vec<Option<f64>>> {
    cfg.validate()?;
    rate.validate()?;
    check_start(x0, b)?;
    let inc = Increments::new(mech, cfg.eps_jump)?;
    let w = inv_rate(rate);
    Ok((0..n_reps as u64).into_par_iter().map(|r| run_single(&inc, &w, x0, b, cfg, r)).collect())
}

/// Monte Carlo summary of `T_b` under `P_{x0}` with empirical Laplace
/// transforms at `lambdas`.
pub fn sample_hit(
    mech: &Mechanism,
    rate: &RateFunction,
    x0: f64,
    b: f64,
    n_reps: usize,
    lambdas: &[f64],
    cfg: &PathConfig,
) -> Result<McSummary> {
    let draws = sample_hit_draws(mech, rate, x0, b, n_reps, cfg)?;
    Ok(McSummary::from_draws(&draws, lambdas))
}

/// Effect of halving `dt` on the mean of `T_b`, measured on coupled paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub dt: f64,
    pub mean_dt: f64,
    pub mean_half_dt: f64,
    /// Standard error of `mean_dt`.
    pub se: f64,
    /// `mean_half_dt - mean_dt` and its paired standard error.
    pub shift: f64,
    pub shift_se: f64,
    /// `|shift| / se`.
    pub shift_in_se: f64,
    /// Replicas dropped because either resolution exceeded the horizon.
    pub dropped: usize,
}

/// Run `n_reps` coupled replicas at `dt` and `dt / 2`.
pub fn richardson_hit(
    mech: &Mechanism,
    rate: &RateFunction,
    x0: f64,
    b: f64,
    n_reps: usize,
    cfg: &PathConfig,
) -> Result<Richardson> {
    cfg.validate()?;
    rate.validate()?;
    check_start(x0, b)?;
    let inc = Increments::new(mech, cfg.eps_jump)?;
    let w = inv_rate(rate);
    let pairs: Vec<(Option<f64>, Option<f64>)> =
        (0..n_reps as u64).into_par_iter().map(|r| run_coupled(&inc, &w, x0, b, cfg, r)).collect();
    let both: Vec<(f64, f64)> = pairs.iter().filter_map(|&(c, f)| Some((c?, f?))).collect();
    let n = both.len();
    if n < 2 {
        return domain("richardson diagnostic needs at least two completed replicas");
    }
    let coarse: Vec<f64> = both.iter().map(|p| p.0).collect();
    let fine: Vec<f64> = both.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = both.iter().map(|p| p.1 - p.0).collect();
    let (mean_dt, var_c) = mean_var(&coarse);
    let (mean_half_dt, _) = mean_var(&fine);
    let (shift, var_d) = mean_var(&diff);
    let se = (var_c / n as f64).sqrt();
    Ok(Richardson {
        dt: cfg.dt,
        mean_dt,
        mean_half_dt,
        se,
        shift,
        shift_se: (var_d / n as f64).sqrt(),
        shift_in_se: if se > 0.0 { shift.abs() / se } else { 0.0 },
        dropped: n_reps - n,
    })
}

pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 })
}

/// Ladder of `E_x[T_b]` estimates used as the surrogate for starting at
/// infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub b: f64,
    pub rungs: Vec<McSummary>,
    pub ladder: Vec<LadderPoint>,
    /// The last two rungs agree, by [`crate::boundary::rungs_agree`].
    pub converged: bool,
    pub plateau: EmpiricalEntranceReport,
    /// The analytic entrance verdict, for comparison.
    pub analytic_entrance: Option<bool>,
}

/// Simulate `T_b` from each `x0` in `x0_list` (increasing) with common
/// random numbers across rungs. `m_b` is the analytic `m(b)` if known.
#[allow(clippy::too_many_arguments)]
pub fn from_infinity_ladder(
    mech: &Mechanism,
    rate: &RateFunction,
    b: f64,
    x0_list: &[f64],
    n_reps: usize,
    lambdas: &[f64],
    m_b: Option<f64>,
    cfg: &PathConfig,
) -> Result<LadderReport> {
    if x0_list.windows(2).any(|p| !(p[1] > p[0])) {
        return domain("ladder starting points must increase");
    }
    let analytic_entrance = entrance_test(mech, rate, 0.05).ok().map(|v| v.is_entrance);
    let mut rungs = Vec::with_capacity(x0_list.len());
    let mut ladder = Vec::with_capacity(x0_list.len());
    for &x0 in x0_list {
        let mut s = sample_hit(mech, rate, x0, b, n_reps, lambdas, cfg)?;
        let point = LadderPoint { x0, mean: s.mean, se: s.se };
        s.ladder = vec![point];
        ladder.push(point);
        rungs.push(s);
    }
    let plateau = entrance_test_empirical(&ladder, m_b);
    Ok(LadderReport { b, rungs, converged: plateau.plateau, ladder, plateau, analytic_entrance })
}

/// Monte Carlo of `E_x[exp(-int_0^T omega(Z_s) ds); T < inf]`.
///
/// The returned summary describes the occupation integral `I`; its
/// `laplace` list holds the single entry `(1, E e^(-I))`.
pub fn occupation_mc(
    mech: &Mechanism,
    omega: &Omega,
    x: f64,
    b: f64,
    n_reps: usize,
    cfg: &PathConfig,
) -> Result<McSummary> {
    cfg.validate()?;
    omega.validate()?;
    check_start(x, b)?;
    let inc = Increments::new(mech, cfg.eps_jump)?;
    let w = |z: f64| omega.eval(z);
    let draws: Vec<Option<f64>> = (0..n_reps as u64).into_par_iter().map(|r| run_single(&inc, &w, x, b, cfg, r)).collect();
    Ok(McSummary::from_draws(&draws, &[1.0]))
}
