//! Piecewise cubic Hermite interpolation on a uniform grid.
//!
//! Slopes are either supplied exactly or estimated with a fourth-order
//! stencil, then limited so that monotone data stays monotone.

/// Cubic Hermite interpolant on `u0 + i h`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    u0: f64,
    h: f64,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Hermite {
    /// Build from values and exact slopes `dy/du`.
    pub fn with_slopes(u0: f64, h: f64, ys: Vec<f64>, ds: Vec<f64>) -> Self {
        assert_eq!(ys.len(), ds.len());
        assert!(ys.len() >= 2 && h > 0.0);
        let mut out = Self { u0, h, ys, ds };
        out.limit_slopes();
        out
    }

    /// Build from values alone using fourth-order finite-difference slopes.
    pub fn from_values(u0: f64, h: f64, ys: Vec<f64>) -> Self {
        assert!(ys.len() >= 2 && h > 0.0);
        let ds = stencil_slopes(&ys, h);
        let mut out = Self { u0, h, ys, ds };
        out.limit_slopes();
        out
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn u_min(&self) -> f64 {
        self.u0
    }

    pub fn u_max(&self) -> f64 {
        self.u0 + self.h * (self.ys.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    pub fn node(&self, i: usize) -> f64 {
        self.u0 + self.h * i as f64
    }

    /// Evaluate at `u`, clamping to the end values outside the grid.
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.ys.len();
        let s = (u - self.u0) / self.h;
        if s <= 0.0 {
            return self.ys[0];
        }
        if s >= (n - 1) as f64 {
            return self.ys[n - 1];
        }
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.ds[i] * self.h, self.ds[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }

    // Hyman-style limiter: a slope may not exceed three times the smaller
    // adjacent secant, and vanishes at local extrema of the data.
    fn limit_slopes(&mut self) {
        let n = self.ys.len();
        let sec: Vec<f64> = self.ys.windows(2).map(|w| (w[1] - w[0]) / self.h).collect();
        for i in 0..n {
            let left = if i > 0 { Some(sec[i - 1]) } else { None };
            let right = if i + 1 < n { Some(sec[i]) } else { None };
            let d = self.ds[i];
            self.ds[i] = match (left, right) {
                (Some(l), Some(r)) => {
                    if l * r <= 0.0 {
                        0.0
                    } else {
                        clamp_to(d, l, 3.0 * l.abs().min(r.abs()))
                    }
                }
                (None, Some(r)) | (Some(r), None) => clamp_to(d, r, 3.0 * r.abs()),
                (None, None) => 0.0,
            };
        }
    }
}

fn clamp_to(d: f64, sign_ref: f64, bound: f64) -> f64 {
    if sign_ref == 0.0 {
        return 0.0;
    }
    if d * sign_ref < 0.0 {
        return 0.0;
    }
    d.signum() * d.abs().min(bound)
}

fn stencil_slopes(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    let mut ds = vec![0.0; n];
    if n < 5 {
        for i in 0..n {
            let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
            ds[i] = (ys[b] - ys[a]) / (h * (b - a) as f64);
        }
        return ds;
    }
    for i in 0..n {
        ds[i] = if i >= 2 && i + 2 < n {
            (-ys[i + 2] + 8.0 * ys[i + 1] - 8.0 * ys[i - 1] + ys[i - 2]) / (12.0 * h)
        } else if i < 2 {
            // Fourth-order one-sided differences.
            let j = i;
            let c: [f64; 5] = if j == 0 {
                [-25.0, 48.0, -36.0, 16.0, -3.0]
            } else {
                [-3.0, -10.0, 18.0, -6.0, 1.0]
            };
            (0..5).map(|k| c[k] * ys[k]).sum::<f64>() / (12.0 * h)
        } else {
            let j = n - 1 - i;
            let c: [f64; 5] = if j == 0 {
                [25.0, -48.0, 36.0, -16.0, 3.0]
            } else {
                [3.0, 10.0, -18.0, 6.0, -1.0]
            };
            (0..5).map(|k| c[k] * ys[n - 1 - k]).sum::<f64>() / (12.0 * h)
        };
    }
    ds
}
