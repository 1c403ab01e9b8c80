//! Increment samplers for `Z` and the Brownian-bridge crossing search.
//!
//! A step of length `h` is returned as a list of [`Piece`]s: continuous
//! stretches (drift, Gaussian part and, for the stable shortcut, a stable
//! increment) separated by explicit upward jumps. Families with a finite jump
//! rate are sampled exactly. Infinite-activity tails keep the jumps above
//! `eps` and replace the rest by a Gaussian with the same variance.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::mechanism::{LevyMeasure, Mechanism};
use crate::numeric::quad::{integrate, integrate_to_infinity, Tol};

/// One piece of a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Piece {
    /// Continuous motion over `len` with total change `dz`. `knot` is an
    /// interior point `(offset, change so far)` already known on the path.
    Flow { len: f64, dz: f64, knot: Option<(f64, f64)> },
    Jump(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum JumpLaw {
    Exp { mean: f64 },
    /// Density proportional to `z^(-1-alpha)` on `(eps, inf)`.
    Pareto { alpha: f64, eps: f64 },
    /// Density proportional to `z^(-1-alpha) e^(-beta z)` on `(eps, inf)`.
    Tempered { alpha: f64, eps: f64, beta: f64 },
}

/// Increment law of `Z` built from a mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    /// Slope of the continuous part, including the big-jump compensator.
    drift: f64,
    /// Gaussian variance per unit time: Brownian part plus small jumps.
    var: f64,
    /// Small-jump share of `var`.
    small_jump_var: f64,
    /// `(sigma, alpha)`: the stable part over `h` is `h^(1/alpha) sigma S`.
    stable: Option<(f64, f64)>,
    jump_rate: f64,
    jumps: Option<JumpLaw>,
}

impl Increments {
    /// `eps_jump` is only used by the stable-tail and tempered families.
    pub fn new(mech: &Mechanism, eps_jump: f64) -> Result<Self> {
        let mech = mech.validated()?;
        if let Some(s) = mech.stable {
            if s.alpha == 2.0 {
                return Ok(Self::continuous(0.0, 2.0 * s.c));
            }
            let sigma = (s.c * (PI * s.alpha / 2.0).cos().abs()).powf(1.0 / s.alpha);
            return Ok(Self { stable: Some((sigma, s.alpha)), ..Self::continuous(0.0, 0.0) });
        }
        let base = Self::continuous(-mech.gamma, mech.sigma2);
        let check_eps = || {
            if eps_jump > 0.0 && eps_jump.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("eps_jump must be positive, got {eps_jump}")))
            }
        };
        Ok(match mech.measure {
            LevyMeasure::None => base,
            LevyMeasure::CompoundPoissonExp { rate, mean_jump } => Self {
                drift: base.drift - rate * mean_jump,
                jump_rate: rate,
                jumps: Some(JumpLaw::Exp { mean: mean_jump }),
                ..base
            },
            LevyMeasure::StableTail { alpha, c_pi } => {
                check_eps()?;
                let e = eps_jump;
                let small = c_pi * e.powf(2.0 - alpha) / (2.0 - alpha);
                Self {
                    drift: base.drift - c_pi * e.powf(1.0 - alpha) / (alpha - 1.0),
                    var: base.var + small,
                    small_jump_var: small,
                    jump_rate: c_pi * e.powf(-alpha) / alpha,
                    jumps: Some(JumpLaw::Pareto { alpha, eps: e }),
                    ..base
                }
            }
            LevyMeasure::TemperedStable { alpha, c_pi, beta } => {
                check_eps()?;
                let e = eps_jump;
                let tail = |p: f64| -> Result<f64> {
                    let f = |z: f64| z.powf(-p) * (-beta * z).exp();
                    Ok(c_pi * integrate_to_infinity(&f, e, e, &[], Tol::rel(1e-12))?.value)
                };
                // int_0^eps z^(1-alpha) e^(-beta z) dz with w = z^(2-alpha).
                let k = 2.0 - alpha;
                let g = |w: f64| (-beta * w.powf(1.0 / k)).exp() / k;
                let small = c_pi * integrate(&g, 0.0, e.powf(k), Tol::rel(1e-12)).value;
                Self {
                    drift: base.drift - tail(alpha)?,
                    var: base.var + small,
                    small_jump_var: small,
                    jump_rate: tail(1.0 + alpha)?,
                    jumps: Some(JumpLaw::Tempered { alpha, eps: e, beta }),
                    ..base
                }
            }
        })
    }

    fn continuous(drift: f64, var: f64) -> Self {
        Self { drift, var, small_jump_var: 0.0, stable: None, jump_rate: 0.0, jumps: None }
    }

    /// Whether the continuous part is Gaussian, so crossings between grid
    /// points can be detected with a Brownian bridge.
    pub fn bridgeable(&self) -> bool {
        self.var > 0.0 && self.stable.is_none()
    }

    pub fn gaussian_variance(&self) -> f64 {
        self.var
    }

    /// Variance per unit time that replaces the jumps below `eps`.
    pub fn small_jump_variance(&self) -> f64 {
        self.small_jump_var
    }

    pub fn jump_rate(&self) -> f64 {
        self.jump_rate
    }

    /// Typical size of a step of length `h`.
    pub fn spread(&self, h: f64) -> f64 {
        let st = self.stable.map_or(0.0, |(s, a)| s * h.powf(1.0 / a));
        self.drift.abs() * h + (self.var * h).sqrt() + st
    }

    /// Continuous change over `len`.
    fn flow<R: Rng + ?Sized>(&self, len: f64, rng: &mut R) -> f64 {
        let mut dz = self.drift * len;
        if self.var > 0.0 {
            let n: f64 = rng.sample(StandardNormal);
            dz += (self.var * len).sqrt() * n;
        }
        if let Some((s, a)) = self.stable {
            dz += s * len.powf(1.0 / a) * stable_unit(a, rng);
        }
        dz
    }

    fn jump_size<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.jumps {
            Some(JumpLaw::Exp { mean }) => mean * rng.sample::<f64, _>(Exp1),
            Some(JumpLaw::Pareto { alpha, eps }) => pareto(alpha, eps, rng),
            Some(JumpLaw::Tempered { alpha, eps, beta }) => loop {
                let z = pareto(alpha, eps, rng);
                if rng.random::<f64>() < (-beta * (z - eps)).exp() {
                    break z;
                }
            },
            None => 0.0,
        }
    }

    /// Append the pieces of one step of length `h` to `out`. The list always
    /// starts and ends with a `Flow`.
    pub(crate) fn step<R: Rng + ?Sized>(&self, h: f64, rng: &mut R, out: &mut Vec<Piece>) {
        let mut last = 0.0;
        if self.jump_rate > 0.0 {
            let mut t = 0.0;
            loop {
                t += rng.sample::<f64, _>(Exp1) / self.jump_rate;
                if t >= h {
                    break;
                }
                let len = t - last;
                out.push(Piece::Flow { len, dz: self.flow(len, rng), knot: None });
                out.push(Piece::Jump(self.jump_size(rng)));
                last = t;
            }
        }
        let len = h - last;
        out.push(Piece::Flow { len, dz: self.flow(len, rng), knot: None });
    }
}

/// Join two consecutive half steps into one, remembering the junction.
pub(crate) fn merge_halves(first: &[Piece], second: &[Piece], out: &mut Vec<Piece>) {
    let (Some(Piece::Flow { len: l1, dz: d1, .. }), Some(Piece::Flow { len: l2, dz: d2, .. })) =
        (first.last(), second.first())
    else {
        unreachable!("steps start and end with a flow");
    };
    out.extend_from_slice(&first[..first.len() - 1]);
    out.push(Piece::Flow { len: l1 + l2, dz: d1 + d2, knot: Some((*l1, *d1)) });
    out.extend_from_slice(&second[1..]);
}

fn pareto<R: Rng + ?Sized>(alpha: f64, eps: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    eps * u.powf(-1.0 / alpha)
}

/// A draw of `S_alpha(1, 1, 0)` by the Chambers-Mallows-Stuck method.
///
/// For `alpha` in `(1, 2)` this law has `E e^(-l S) = exp(l^alpha / |cos(pi alpha / 2)|)`,
/// so `sigma S` with `sigma = (c |cos(pi alpha / 2)|)^(1/alpha)` has Laplace
/// exponent `c l^alpha`.
pub(crate) fn stable_unit<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = rng.sample(Exp1);
    let t = (PI * alpha / 2.0).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha) * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Offset at which a continuous piece from `z0` first drops to `b`, or
/// `None` if it stays above.
///
/// Without a Gaussian part the piece is treated as linear. With one, the
/// piece is a Brownian bridge: it is bisected (at the knot first, if given)
/// while the probability of an unseen crossing exceeds `1e-10` and the
/// sub-piece is longer than `min_len`.
pub(crate) fn first_crossing<R: Rng + ?Sized>(
    inc: &Increments,
    z0: f64,
    len: f64,
    dz: f64,
    knot: Option<(f64, f64)>,
    b: f64,
    min_len: f64,
    rng: &mut R,
) -> Option<f64> {
    let z1 = z0 + dz;
    if z0 <= b {
        return Some(0.0);
    }
    if !inc.bridgeable() {
        return (z1 <= b).then(|| len * (z0 - b) / (z0 - z1));
    }
    let v = inc.var;
    if z1 > b {
        let p = (-2.0 * (z0 - b) * (z1 - b) / (v * len)).exp();
        if p < 1e-10 {
            return None;
        }
        if len <= min_len {
            return (rng.random::<f64>() < p).then_some(0.5 * len);
        }
    } else if len <= min_len {
        return Some(len * (z0 - b) / (z0 - z1));
    }
    let (t, zt) = match knot {
        Some((t, d)) => (t, z0 + d),
        None => {
            let t = 0.5 * len;
            let n: f64 = rng.sample(StandardNormal);
            (t, z0 + 0.5 * dz + (v * len / 4.0).sqrt() * n)
        }
    };
    if let Some(c) = first_crossing(inc, z0, t, zt - z0, None, b, min_len, rng) {
        return Some(c);
    }
    first_crossing(inc, zt, len - t, z1 - zt, None, b, min_len, rng).map(|c| t + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::pairwise_sum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn laplace_mc(inc: &Increments, t: f64, lambda: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pieces = Vec::new();
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                pieces.clear();
                inc.step(t, &mut rng, &mut pieces);
                let dz: f64 = pieces.iter().map(|p| match p {
                    Piece::Flow { dz, .. } => *dz,
                    Piece::Jump(j) => *j,
                }).sum();
                (-lambda * dz).exp()
            })
            .collect();
        let mean = pairwise_sum(&vals) / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn stable_sampler_matches_laplace_exponent() {
        for (alpha, lambda) in [(1.5, 0.5), (1.2, 0.7), (1.8, 0.4)] {
            let mech = Mechanism::stable(1.0, alpha).unwrap();
            let inc = Increments::new(&mech, 0.01).unwrap();
            let (m, se) = laplace_mc(&inc, 1.0, lambda, 200_000, 7);
            let exact = mech.psi(lambda).exp();
            assert!((m - exact).abs() < 4.0 * se, "alpha {alpha}: {m} vs {exact} (se {se})");
        }
    }

    #[test]
    fn stable_sampler_scales_with_time() {
        let mech = Mechanism::stable(2.0, 1.5).unwrap();
        let inc = Increments::new(&mech, 0.01).unwrap();
        let (m, se) = laplace_mc(&inc, 0.3, 0.8, 200_000, 8);
        let exact = (0.3 * mech.psi(0.8)).exp();
        assert!((m - exact).abs() < 4.0 * se, "{m} vs {exact}");
    }

    #[test]
    fn compound_poisson_and_truncated_families_match_laplace_exponent() {
        let mechs = [
            Mechanism::new(1.0, 0.5, LevyMeasure::CompoundPoissonExp { rate: 2.0, mean_jump: 0.5 }).unwrap(),
            Mechanism::new(0.5, 0.0, LevyMeasure::StableTail { alpha: 1.5, c_pi: 0.4 }).unwrap(),
            Mechanism::new(0.5, 0.0, LevyMeasure::TemperedStable { alpha: 1.4, c_pi: 0.5, beta: 1.0 }).unwrap(),
        ];
        for (i, mech) in mechs.iter().enumerate() {
            let inc = Increments::new(mech, 1e-3).unwrap();
            let (m, se) = laplace_mc(&inc, 1.0, 0.5, 100_000, 11 + i as u64);
            let exact = mech.psi(0.5).exp();
            assert!((m - exact).abs() < 4.0 * se, "{mech:?}: {m} vs {exact}");
        }
    }

    #[test]
    fn truncation_variance_is_the_small_jump_second_moment() {
        let mech = Mechanism::new(0.0, 0.0, LevyMeasure::StableTail { alpha: 1.5, c_pi: 1.0 }).unwrap();
        let inc = Increments::new(&mech, 0.04).unwrap();
        // int_0^0.04 z^2 z^(-2.5) dz = 0.04^0.5 / 0.5
        assert!((inc.small_jump_variance() - 0.4).abs() < 1e-12);
        let tm = Mechanism::new(0.0, 0.0, LevyMeasure::TemperedStable { alpha: 1.5, c_pi: 1.0, beta: 1e-9 }).unwrap();
        let ti = Increments::new(&tm, 0.04).unwrap();
        assert!((ti.small_jump_variance() - 0.4).abs() < 1e-8);
        assert!((ti.jump_rate() - inc.jump_rate()).abs() < 1e-6 * inc.jump_rate());
    }

    #[test]
    fn jumps_are_positive() {
        let mech = Mechanism::new(0.0, 0.0, LevyMeasure::TemperedStable { alpha: 1.7, c_pi: 1.0, beta: 2.0 }).unwrap();
        let inc = Increments::new(&mech, 1e-2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut out = Vec::new();
        for _ in 0..1000 {
            inc.step(0.1, &mut rng, &mut out);
        }
        assert!(out.iter().any(|p| matches!(p, Piece::Jump(_))));
        assert!(out.iter().all(|p| !matches!(p, Piece::Jump(j) if *j <= 0.0)));
    }

    #[test]
    fn bridge_crossing_probability() {
        // A driftless Brownian bridge from 1 to 1 over unit time with unit
        // variance dips below 0 with probability e^(-2).
        let inc = Increments::new(&Mechanism::brownian(0.0, 1.0).unwrap(), 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40_000;
        let hits = (0..n).filter(|_| first_crossing(&inc, 1.0, 1.0, 0.0, None, 0.0, 1e-5, &mut rng).is_some()).count();
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - (-2.0f64).exp()).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn merge_keeps_total_and_junction() {
        let a = [Piece::Flow { len: 0.5, dz: -0.1, knot: None }];
        let b = [Piece::Flow { len: 0.2, dz: 0.3, knot: None }, Piece::Jump(1.0), Piece::Flow { len: 0.3, dz: 0.0, knot: None }];
        let mut out = Vec::new();
        merge_halves(&a, &b, &mut out);
        assert_eq!(out.len(), 3);
        let Piece::Flow { len, dz, knot } = out[0] else { panic!("expected a flow") };
        assert!((len - 0.7).abs() < 1e-15 && (dz - 0.2).abs() < 1e-15);
        assert_eq!(knot, Some((0.5, -0.1)));
        assert_eq!(out[1], Piece::Jump(1.0));
    }
}
