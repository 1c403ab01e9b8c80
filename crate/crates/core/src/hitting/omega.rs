//! Weight functions `omega` for weighted occupation times.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rates::RateFunction;

/// A locally bounded, non-negative weight `omega(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Omega {
    /// `1 / R(z)`: the hitting-time case.
    Reciprocal { rate: RateFunction },
    Constant { q: f64 },
    /// `q` on `z <= a`, zero beyond.
    Indicator { q: f64, a: f64 },
    /// Piecewise linear through `(z_i, w_i)`, equal to `w_0` below the first
    /// node and zero beyond the last.
    Tabulated { z: Vec<f64>, w: Vec<f64> },
    Scaled { factor: f64, inner: Box<Omega> },
}

impl Omega {
    pub fn reciprocal(rate: RateFunction) -> Self {
        Self::Reciprocal { rate }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::Scaled { factor, inner: Box::new(self) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Reciprocal { rate } => rate.validate(),
            Self::Constant { q } => nonneg("q", *q),
            Self::Indicator { q, a } => {
                nonneg("q", *q)?;
                if a.is_finite() {
                    Ok(())
                } else {
                    domain("indicator breakpoint must be finite")
                }
            }
            Self::Tabulated { z, w } => {
                if z.len() < 2 || z.len() != w.len() || z.windows(2).any(|p| !(p[1] > p[0])) {
                    return domain("omega table needs >= 2 increasing nodes with matching weights");
                }
                w.iter().try_for_each(|&v| nonneg("omega value", v))
            }
            Self::Scaled { factor, inner } => {
                nonneg("factor", *factor)?;
                inner.validate()
            }
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Self::Reciprocal { rate } => (-rate.ln_eval(z)).exp(),
            Self::Constant { q } => *q,
            Self::Indicator { q, a } => {
                if z <= *a {
                    *q
                } else {
                    0.0
                }
            }
            Self::Tabulated { z: zs, w } => {
                let n = zs.len();
                if z <= zs[0] {
                    return w[0];
                }
                if z > zs[n - 1] {
                    return 0.0;
                }
                let i = (zs.partition_point(|&v| v <= z) - 1).min(n - 2);
                let t = (z - zs[i]) / (zs[i + 1] - zs[i]);
                w[i] + t * (w[i + 1] - w[i])
            }
            Self::Scaled { factor, inner } => factor * inner.eval(z),
        }
    }

    /// Points where `omega` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Reciprocal { rate } => rate.breakpoints(),
            Self::Constant { .. } => Vec::new(),
            Self::Indicator { a, .. } => vec![*a],
            Self::Tabulated { z, .. } => z.clone(),
            Self::Scaled { inner, .. } => inner.breakpoints(),
        }
    }

    /// Whether `omega` vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Reciprocal { .. } => false,
            Self::Constant { q } | Self::Indicator { q, .. } => *q == 0.0,
            Self::Tabulated { w, .. } => w.iter().all(|&v| v == 0.0),
            Self::Scaled { factor, inner } => *factor == 0.0 || inner.is_zero(),
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite and >= 0, got {v}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        assert_eq!(Omega::Indicator { q: 0.2, a: 5.0 }.eval(5.0), 0.2);
        assert_eq!(Omega::Indicator { q: 0.2, a: 5.0 }.eval(5.1), 0.0);
        let r = Omega::reciprocal(RateFunction::power(2.0));
        assert!((r.eval(4.0) - 1.0 / 16.0).abs() < 1e-15);
        assert!((r.clone().scaled(3.0).eval(2.0) - 0.75).abs() < 1e-15);
        let t = Omega::Tabulated { z: vec![1.0, 2.0], w: vec![1.0, 3.0] };
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1.5), 2.0);
        assert_eq!(t.eval(2.5), 0.0);
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(Omega::Constant { q: -1.0 }.validate().is_err());
        assert!(Omega::Tabulated { z: vec![1.0, 2.0], w: vec![1.0, -3.0] }.validate().is_err());
    }
}
