//! Numerical toolkit for continuous-state branching processes with
//! population-dependent rates.
//!
//! A process is described by a branching mechanism `Psi` (the Laplace
//! exponent of a spectrally positive Levy process `Z` with no negative jumps)
//! and a positive rate function `R`. The population `X` is `Z` run on the
//! clock `int_0^t ds / R(Z_s)`. The crate answers three questions about `X`
//! started from infinity: does it come down (entrance boundary), how long does
//! it take to reach a level `b`, and how fast does it descend.
//!
//! Module map:
//!
//! * [`mechanism`] for `Psi`, its classification and roots.
//! * [`scale`] for the scale function `W` and `Delta = W(inf) - W`.
//! * [`rates`] for `R`, `phi`, the deterministic flow and the valley diagnostics.
//! * [`boundary`] for the entrance test at infinity.
//! * [`hitting`] for moments and Laplace transforms of first passage times.
//! * [`limitlaw`] for the limiting laws of rescaled hitting times.
//! * [`simulate`] for Monte Carlo of `Z`, the time change and the estimators.

pub mod boundary;
pub mod error;
pub mod hitting;
pub mod limitlaw;
pub mod mechanism;
pub mod numeric;
pub mod rates;
pub mod scale;
pub mod simulate;

pub use boundary::{entrance_test, EntranceCriterion, EntranceVerdict};
pub use error::{Error, Result};
pub use hitting::{HittingSummary, Omega, WnOptions, WnTable};
pub use limitlaw::{ExpRateLimitLaw, StableThetaLaw};
pub use mechanism::{Criticality, LevyMeasure, Mechanism};
pub use rates::{Hypothesis, PChoice, PhiFunction, RateFunction, Verdict};
pub use scale::{ScaleFunction, ScaleMethod, ScaleOptions};
pub use simulate::{McSummary, PathConfig};
