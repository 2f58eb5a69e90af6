//! Shape-preserving piecewise cubic Hermite interpolation.
//!
//! Node slopes are supplied by the caller (for the saturation table they are
//! exact derivatives from the ODE right-hand side) and then limited with the
//! Fritsch–Carlson condition so the interpolant is monotone whenever the data
//! are.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from strictly increasing `x` and matching `y`
    /// and `slope`. Slopes are limited in place where the Fritsch–Carlson
    /// condition `alpha^2 + beta^2 <= 9` fails.
    pub fn new(x: Vec<f64>, y: Vec<f64>, mut slope: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || slope.len() != n {
            return Err(Error::InvalidInput(format!(
                "interpolant needs >= 2 matching samples (x: {}, y: {}, slope: {})",
                n,
                y.len(),
                slope.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        for i in 0..n - 1 {
            let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if delta == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let alpha = slope[i] / delta;
            let beta = slope[i + 1] / delta;
            if alpha < 0.0 {
                slope[i] = 0.0;
            }
            if beta < 0.0 {
                slope[i + 1] = 0.0;
            }
            let r2 = alpha * alpha + beta * beta;
            if r2 > 9.0 {
                let t = 3.0 / r2.sqrt();
                slope[i] = t * alpha * delta;
                slope[i + 1] = t * beta * delta;
            }
        }
        Ok(Self { x, y, slope })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slope
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index `i` of the interval `[x[i], x[i+1]]` containing `t` (clamped).
    fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        let p = self.x.partition_point(|&xi| xi <= t);
        p.clamp(1, n - 1) - 1
    }

    /// Value at `t`; `t` is clamped to the tabulated range.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(self.x[0], self.x[self.x.len() - 1]);
        let i = self.interval(t);
        self.eval_in(i, t)
    }

    /// Derivative of the interpolant at `t` (clamped).
    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.clamp(self.x[0], self.x[self.x.len() - 1]);
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.slope[i], self.slope[i + 1]);
        let dh00 = 6.0 * s * s - 6.0 * s;
        let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * s * s - 2.0 * s;
        (dh00 * y0 + dh01 * y1) / h + dh10 * m0 + dh11 * m1
    }

    fn eval_in(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }

    /// Inverse of a monotone increasing interpolant: the `t` with
    /// `eval(t) == v`, found by safeguarded Newton inside the bracketing
    /// interval. `v` is clamped to the tabulated value range.
    pub fn inverse(&self, v: f64) -> f64 {
        let n = self.y.len();
        let v = v.clamp(self.y[0], self.y[n - 1]);
        let p = self.y.partition_point(|&yi| yi <= v);
        let i = p.clamp(1, n - 1) - 1;
        if v == self.y[i] {
            return self.x[i];
        }
        let (mut lo, mut hi) = (self.x[i], self.x[i + 1]);
        let mut t = lo + (hi - lo) * (v - self.y[i]) / (self.y[i + 1] - self.y[i]);
        for _ in 0..100 {
            let f = self.eval_in(i, t) - v;
            if f == 0.0 {
                return t;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.derivative(t);
            let newton = if d > 0.0 { t - f / d } else { f64::NAN };
            t = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_exactly_with_exact_slopes() {
        let f = |x: f64| x * x * x - x;
        let df = |x: f64| 3.0 * x * x - 1.0;
        let x: Vec<f64> = (0..5).map(|i| 1.0 + i as f64 * 0.5).collect();
        let y = x.iter().map(|&t| f(t)).collect();
        let s = x.iter().map(|&t| df(t)).collect();
        let it = MonotoneCubic::new(x, y, s).unwrap();
        for k in 0..40 {
            let t = 1.0 + k as f64 * 0.05;
            assert!((it.eval(t) - f(t)).abs() < 1e-12);
            assert!((it.derivative(t) - df(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn limiter_keeps_steep_data_monotone() {
        // A step-like data set whose naive slopes would overshoot.
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, 0.01, 0.99, 1.0];
        let s = vec![0.0, 5.0, 5.0, 0.0];
        let it = MonotoneCubic::new(x, y, s).unwrap();
        let mut prev = it.eval(0.0);
        for k in 1..=300 {
            let v = it.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn inverse_round_trips() {
        let x: Vec<f64> = (0..15).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let s: Vec<f64> = x.iter().map(|t| t.cos()).collect();
        let it = MonotoneCubic::new(x, y, s).unwrap();
        for k in 0..50 {
            let t = 0.03 + k as f64 * 0.0277;
            let v = it.eval(t);
            assert!((it.inverse(v) - t).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn rejects_unsorted_abscissae() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
    }
}
