//! Numerical Laplace inversion.
//!
//! The fixed Talbot contour (Abate-Valko) deforms the Bromwich line around
//! the negative real axis, so branch cuts and poles there are admissible.
//! The Euler algorithm (Abate-Whitt) sums along a vertical line and serves as
//! an independent fallback.
//!
//! Both methods amplify round-off by roughly `exp(0.4 m)`, so in double
//! precision the useful node counts are small (about 20 to 28 for Talbot).

use num_complex::Complex64;

/// Invert `f_hat` at time `t > 0` with `m` contour nodes.
pub fn fixed_talbot<F: Fn(Complex64) -> Complex64>(f_hat: &F, t: f64, m: usize) -> f64 {
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let mut acc = 0.5 * (f_hat(Complex64::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / mf;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        acc += ((s * t).exp() * f_hat(s) * Complex64::new(1.0, sigma)).re;
    }
    r / mf * acc
}

/// Euler summation along `Re s = m ln(10) / (3 t)` with `2m + 1` terms.
pub fn euler<F: Fn(Complex64) -> Complex64>(f_hat: &F, t: f64, m: usize) -> f64 {
    let mf = m as f64;
    let ln10 = std::f64::consts::LN_10;
    let a = mf * ln10 / 3.0;
    // Binomial averaging weights xi_k.
    let mut xi = vec![1.0; 2 * m + 1];
    xi[0] = 0.5;
    let two_m = 2f64.powi(-(m as i32));
    xi[2 * m] = two_m;
    let mut binom = 1.0;
    for k in 1..m {
        binom *= (m - k + 1) as f64 / k as f64;
        xi[2 * m - k] = xi[2 * m - k + 1] + two_m * binom;
    }
    let mut acc = 0.0;
    for (k, &w) in xi.iter().enumerate() {
        let beta = Complex64::new(a, std::f64::consts::PI * k as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * w * f_hat(beta / t).re;
    }
    10f64.powf(mf / 3.0) / t * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn talbot_inverts_exponential() {
        let f = |s: Complex64| 1.0 / (s + 1.0);
        for &t in &[0.05f64, 0.5, 1.0, 5.0, 20.0] {
            let v = fixed_talbot(&f, t, 24);
            assert!((v - (-t).exp()).abs() < 1e-11, "t={t} v={v}");
        }
    }

    #[test]
    fn talbot_handles_branch_cut() {
        // L[t^{-1/2} / sqrt(pi)] = s^{-1/2}
        let f = |s: Complex64| s.powf(-0.5);
        for &t in &[0.05f64, 1.0, 20.0] {
            let exact = 1.0 / (std::f64::consts::PI * t).sqrt();
            let v = fixed_talbot(&f, t, 24);
            assert!(((v - exact) / exact).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn euler_agrees() {
        let f = |s: Complex64| 1.0 / (s * (s + 2.0));
        for &t in &[0.1f64, 1.0, 4.0] {
            let exact = (1.0 - (-2.0 * t).exp()) / 2.0;
            let v = euler(&f, t, 18);
            assert!((v - exact).abs() < 1e-7, "t={t} v={v}");
        }
    }
}
