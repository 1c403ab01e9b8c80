//! Hitting times of `X` below a level `b`.
//!
//! `T_b` under `P_x` is the first passage of `Z` below `b` measured on the
//! clock `int dt / R(Z_t)`. Its mean is a single quadrature against the scale
//! function; its Laplace transform is a ratio of power series in `lambda`
//! with coefficients `W_n`, produced by a Volterra-type recursion.

mod mean;
mod omega;
mod table;

pub use mean::{
    asymptotic_mean, exp_rate_wn, m_inverse, mean_hit, stable_power_mean, variance_double_integral, MeanRegime,
};
pub use omega::Omega;
pub use table::{
    hit_moments, hitting_summary, laplace_hit, occupation_laplace, series_sums, HittingSummary, SeriesSums, WnOptions,
    WnTable, N_CAP,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::mechanism::{LevyMeasure, Mechanism};
    use crate::numeric::{gamma, ln_gamma};
    use crate::rates::{PhiFunction, RateFunction};
    use crate::scale::{build_scale, ScaleFunction, ScaleOptions};

    fn brownian(g: f64, s2: f64) -> ScaleFunction {
        build_scale(&Mechanism::brownian(g, s2).unwrap(), &ScaleOptions::default()).unwrap()
    }

    fn stable15() -> ScaleFunction {
        build_scale(&Mechanism::stable(1.0, 1.5).unwrap(), &ScaleOptions::default()).unwrap()
    }

    fn table(sf: &ScaleFunction, rate: RateFunction, b: f64) -> WnTable {
        WnTable::build(sf, Omega::reciprocal(rate), &WnOptions::starting_at(b)).unwrap()
    }

    // prod_{i<=n} Gamma(i theta - i alpha) / Gamma(i theta - (i-1) alpha)
    fn a_n(alpha: f64, theta: f64, n: usize) -> f64 {
        (1..=n)
            .map(|i| {
                let i = i as f64;
                ln_gamma(i * theta - i * alpha) - ln_gamma(i * theta - (i - 1.0) * alpha)
            })
            .sum::<f64>()
            .exp()
    }

    #[test]
    fn exponential_rate_closed_forms() {
        let sf = brownian(1.0, 2.0);
        let mut t = WnTable::build(&sf, Omega::reciprocal(RateFunction::exp_rate(1.0)), &WnOptions::starting_at(0.5)).unwrap();
        let psi = |l: f64| l + l * l;
        for n in 1..=6 {
            for &x in &[0.5, 1.0, 2.7, 5.0] {
                let exact = exp_rate_wn(psi, 1.0, n, x);
                let got = t.value(n, x).unwrap();
                assert!(((got - exact) / exact).abs() < 1e-6, "n={n} x={x}: {got} vs {exact}");
            }
        }
        // W_2(x) = e^-2x / 12
        assert!((exp_rate_wn(psi, 1.0, 2, 0.0) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn stable_power_levels_are_exact_power_laws() {
        let (alpha, theta) = (1.5, 3.0);
        let mut t = table(&stable15(), RateFunction::power(theta), 2.0);
        for n in 1..=3 {
            let exact = a_n(alpha, theta, n) * 50f64.powf(n as f64 * (alpha - theta));
            let got = t.value(n, 50.0).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-7, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn mean_examples() {
        let sf = stable15();
        let m = mean_hit(&sf, &RateFunction::power(3.0), 2.0, f64::INFINITY).unwrap();
        // Gamma(1.5)/Gamma(3) 2^-1.5, quoted to six digits
        assert!((m - 0.156_663).abs() < 2e-6, "{m}");
        assert!(((m - stable_power_mean(1.0, 1.5, 3.0, 2.0)) / m).abs() < 1e-9);
        assert_eq!(mean_hit(&sf, &RateFunction::power(3.0), 2.0, 2.0).unwrap(), 0.0);
        let bs = brownian(1.0, 2.0);
        for &b in &[0.5, 3.0] {
            let m = mean_hit(&bs, &RateFunction::exp_rate(1.0), b, f64::INFINITY).unwrap();
            assert!(((m - (-b as f64).exp() / 2.0) / m).abs() < 1e-9);
        }
    }

    #[test]
    fn stable_mean_constant_scales_as_one_over_c() {
        // Oracle: quadrature of int_b^inf W(y - b) y^-theta dy with W = y^(alpha-1)/(c Gamma(alpha)).
        let c = 2.5;
        let sf = build_scale(&Mechanism::stable(c, 1.5).unwrap(), &ScaleOptions::default()).unwrap();
        let m = mean_hit(&sf, &RateFunction::power(3.0), 2.0, f64::INFINITY).unwrap();
        assert!(((m - stable_power_mean(c, 1.5, 3.0, 2.0)) / m).abs() < 1e-9);
        assert!(((m * c - stable_power_mean(1.0, 1.5, 3.0, 2.0)) / m).abs() < 1e-9);
    }

    #[test]
    fn not_entrance_is_reported() {
        let sf = brownian(1.0, 1.0);
        assert!(matches!(mean_hit(&sf, &RateFunction::power(1.0), 1.0, f64::INFINITY), Err(Error::NotEntrance(_))));
        // From a finite start the mean exists: int_1^10 dy / y = ln 10 up to the Delta correction.
        assert!(mean_hit(&sf, &RateFunction::power(1.0), 1.0, 10.0).unwrap() > 0.0);
    }

    #[test]
    fn laplace_exponential_rate_example() {
        let sf = brownian(1.0, 2.0);
        let mut t = WnTable::build(&sf, Omega::reciprocal(RateFunction::exp_rate(1.0)), &WnOptions::starting_at(1.0)).unwrap();
        let psi = |l: f64| l + l * l;
        let series: f64 = (0..40).map(|n| exp_rate_wn(psi, 1.0, n, 1.0)).sum();
        let got = laplace_hit(&mut t, 1.0, 1.0, f64::INFINITY).unwrap();
        assert!((got - 1.0 / series).abs() < 1e-9);
        assert!((got - 0.8364).abs() < 1e-4, "{got}");
        assert_eq!(laplace_hit(&mut t, 1.0, 0.0, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn variance_exponential_rate_example() {
        let sf = brownian(1.0, 2.0);
        let mut t = WnTable::build(&sf, Omega::reciprocal(RateFunction::exp_rate(1.0)), &WnOptions::starting_at(1.0)).unwrap();
        let s = hit_moments(&mut t, 1.0, f64::INFINITY).unwrap();
        let e1 = (-1.0f64).exp();
        let exact = (e1 / 2.0).powi(2) - 2.0 * e1 * e1 / 12.0;
        assert!(((s.variance - exact) / exact).abs() < 1e-7, "{} vs {exact}", s.variance);
        assert!((s.variance - 0.011_278).abs() < 1e-6);
        let zero = hit_moments(&mut t, 1.0, 1.0).unwrap();
        assert_eq!(zero.second_moment, 0.0);
    }

    #[test]
    fn variance_two_routes_agree_for_stable() {
        let sf = stable15();
        let r = RateFunction::power(3.0);
        let mut t = table(&sf, r.clone(), 2.0);
        let s = hit_moments(&mut t, 2.0, f64::INFINITY).unwrap();
        let d = variance_double_integral(&sf, &r, 2.0).unwrap();
        assert!(((s.variance - d) / d).abs() < 1e-6, "{} vs {d}", s.variance);
        // Exact: a_1^2 b^(2(alpha-theta)) - 2 a_2 b^(2(alpha-theta))
        let exact = (a_n(1.5, 3.0, 1).powi(2) - 2.0 * a_n(1.5, 3.0, 2)) * 2f64.powf(-3.0);
        assert!(((s.variance - exact) / exact).abs() < 1e-7);
    }

    #[test]
    fn m_inverse_closed_forms() {
        let sf = stable15();
        let r = RateFunction::power(3.0);
        for &t in &[0.01, 0.3, 5.0] {
            let b = m_inverse(&sf, &r, t).unwrap();
            let exact = (gamma(3.0) / gamma(1.5) * t).powf(1.0 / (1.5 - 3.0));
            assert!(((b - exact) / exact).abs() < 1e-9, "t={t}");
        }
        let bs = brownian(1.0, 2.0);
        let e = RateFunction::exp_rate(1.0);
        let t = 0.01;
        let b = m_inverse(&bs, &e, t).unwrap();
        assert!((b + (2.0 * t as f64).ln()).abs() < 1e-9);
        // m(0+) = 1/2 for this pair
        assert!(matches!(m_inverse(&bs, &e, 0.7), Err(Error::OutOfRange(_))));
        let sub = brownian(1.0, 1.0);
        let p2 = RateFunction::power(2.0);
        let m = mean_hit(&sub, &p2, 3.7, f64::INFINITY).unwrap();
        assert!(((m_inverse(&sub, &p2, m).unwrap() - 3.7) / 3.7).abs() < 1e-8);
    }

    #[test]
    fn finite_differences_match_moments() {
        let sf = brownian(1.0, 1.0);
        let r = RateFunction::power(2.0);
        let (b, x) = (1.0, 10.0);
        let mut t = table(&sf, r.clone(), b);
        let mean = mean_hit(&sf, &r, b, x).unwrap();
        let s = hit_moments(&mut t, b, x).unwrap();
        assert!(((s.mean - mean) / mean).abs() < 1e-8);
        let h = 1e-2 / mean;
        let l: Vec<f64> = (0..3).map(|k| laplace_hit(&mut t, b, k as f64 * h, x).unwrap()).collect();
        let d1 = (-3.0 * l[0] + 4.0 * l[1] - l[2]) / (2.0 * h);
        let d2 = (l[0] - 2.0 * l[1] + l[2]) / (h * h);
        assert!(((d1 + mean) / mean).abs() < 1e-3, "{d1} vs {mean}");
        assert!(((d2 - s.second_moment) / s.second_moment).abs() < 5e-2);
    }

    #[test]
    fn levels_are_monotone_and_bounded() {
        let sf = brownian(1.0, 1.0);
        let r = RateFunction::power(2.0);
        let b = 1.0;
        let t = table(&sf, r.clone(), b);
        let phi = PhiFunction::new(r, 1.0).unwrap().phi(b);
        let mut fact = 1.0;
        for n in 1..=8 {
            fact *= n as f64;
            for i in 0..t.grid().len() {
                let w = t.node_value(n, i);
                assert!(w >= 0.0);
                if i > 0 {
                    assert!(w <= t.node_value(n, i - 1) * (1.0 + 1e-12));
                }
                assert!(w <= t.node_value(1, i).powi(n as i32) * (1.0 + 1e-9));
            }
            assert!(t.node_value(n, 0) <= phi.powi(n as i32) / fact * (1.0 + 1e-9), "n={n}");
        }
        for i in 0..t.grid().len() {
            assert_eq!(t.node_value(0, i), 1.0);
        }
    }

    #[test]
    fn strong_markov_additivity() {
        let sf = brownian(1.0, 1.0);
        let r = RateFunction::power(2.0);
        let (b, a) = (1.0, 4.0);
        let mb = mean_hit(&sf, &r, b, f64::INFINITY).unwrap();
        let ma = mean_hit(&sf, &r, a, f64::INFINITY).unwrap();
        let eab = mean_hit(&sf, &r, b, a).unwrap();
        assert!(((mb - ma - eab) / eab).abs() < 1e-9);
    }

    #[test]
    fn laplace_monotone_and_limit_in_x() {
        let sf = stable15();
        let r = RateFunction::power(3.0);
        let mut t = table(&sf, r, 2.0);
        let mut prev = 1.0;
        for &l in &[0.5, 1.0, 2.0, 4.0] {
            let v = laplace_hit(&mut t, 2.0, l, f64::INFINITY).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        let mut prev_b = 0.0;
        for &b in &[2.0, 3.0, 5.0] {
            let v = laplace_hit(&mut t, b, 1.0, f64::INFINITY).unwrap();
            assert!(v > prev_b);
            prev_b = v;
        }
        let inf = laplace_hit(&mut t, 2.0, 1.0, f64::INFINITY).unwrap();
        let near = laplace_hit(&mut t, 2.0, 1.0, 1e5).unwrap();
        let far = laplace_hit(&mut t, 2.0, 1.0, 1e7).unwrap();
        assert!((far - inf).abs() < (near - inf).abs() && (far - inf).abs() < 1e-6);
    }

    #[test]
    fn occupation_matches_laplace_path() {
        let sf = brownian(1.0, 1.0);
        let r = RateFunction::power(2.0);
        let lam = 1.5;
        let mut t = table(&sf, r.clone(), 1.0);
        let direct = laplace_hit(&mut t, 1.0, lam, 10.0).unwrap();
        let occ = occupation_laplace(&sf, Omega::reciprocal(r).scaled(lam), 1.0, 10.0, &WnOptions::default()).unwrap();
        assert!((direct - occ).abs() < 1e-9);
        let zero = occupation_laplace(&sf, Omega::Constant { q: 0.0 }, 1.0, 10.0, &WnOptions::default()).unwrap();
        assert_eq!(zero, 1.0);
    }

    #[test]
    fn constant_weight_over_bounded_window() {
        // Pure drift gamma: the path spends (a - b)/gamma in [b, a] and the
        // passage is deterministic, so the answer is exp(-q (a - b)/gamma).
        // The levels vanish beyond a and are faded linearly across the grid
        // cell containing a, which bounds the accuracy here.
        let sf = build_scale(&Mechanism::pure_drift(2.0).unwrap(), &ScaleOptions::default()).unwrap();
        let (q, a, b) = (0.3, 5.0, 1.0);
        let v = occupation_laplace(&sf, Omega::Indicator { q, a }, b, 8.0, &WnOptions::default()).unwrap();
        assert!((v - (-q * (a - b) / 2.0).exp()).abs() < 5e-5, "{v}");
    }

    #[test]
    fn unbounded_weight_is_not_summable() {
        let sf = brownian(1.0, 1.0);
        let r = Omega::Constant { q: 0.5 };
        assert!(matches!(occupation_laplace(&sf, r, 1.0, 2.0, &WnOptions::default()), Err(Error::Summability(_))));
    }

    #[test]
    fn huge_lambda_reports_divergence() {
        let sf = brownian(1.0, 1.0);
        let mut t = table(&sf, RateFunction::power(2.0), 1.0);
        match laplace_hit(&mut t, 1.0, 1e6, f64::INFINITY) {
            Err(Error::SeriesDiverges { lambda, .. }) => assert_eq!(lambda, 1e6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asymptotic_regimes() {
        let bs = brownian(1.0, 2.0);
        let (v, reg) = asymptotic_mean(&bs, &RateFunction::exp_rate(1.0), 5.0).unwrap();
        assert_eq!(reg, MeanRegime::ExponentialRate);
        let m = mean_hit(&bs, &RateFunction::exp_rate(1.0), 5.0, f64::INFINITY).unwrap();
        assert!((m / v - 1.0).abs() < 1e-2);
        let sub = brownian(1.0, 1.0);
        let (v, reg) = asymptotic_mean(&sub, &RateFunction::power(2.0), 1e4).unwrap();
        assert_eq!(reg, MeanRegime::SubcriticalH1);
        assert!((v - 1e-4).abs() < 1e-12);
        let m = mean_hit(&sub, &RateFunction::power(2.0), 1e4, f64::INFINITY).unwrap();
        assert!((m / v - 1.0).abs() < 1e-3);
        let st = stable15();
        let (v, reg) = asymptotic_mean(&st, &RateFunction::power(3.0), 50.0).unwrap();
        assert_eq!(reg, MeanRegime::CriticalStableLike);
        assert!((v - gamma(1.5) / gamma(3.0) * 50f64.powf(-1.5)).abs() < 1e-15);
        let cp = build_scale(
            &Mechanism::new(-1.0, 0.0, LevyMeasure::CompoundPoissonExp { rate: 1.0, mean_jump: 1.0 }).unwrap(),
            &ScaleOptions::default(),
        );
        if let Ok(cp) = cp {
            assert!(asymptotic_mean(&cp, &RateFunction::power(2.0), 10.0).is_err());
        }
    }
}
