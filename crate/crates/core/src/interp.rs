//! Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Carlson slopes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidInput("pchip needs at least two matching samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("pchip abscissae must be strictly increasing".into()));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pchip samples must be finite".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for k in 1..n - 1 {
                if m[k - 1] * m[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Value and derivative; arguments outside the table are extrapolated by the end cubic.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh01 = -6.0 * s * (s - 1.0);
        let dh11 = s * (3.0 * s - 2.0);
        let dv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (v, dv)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let x = vec![0.0, 0.5, 1.5, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        let (v, dv) = p.eval_with_derivative(2.2);
        assert!((v - 3.4).abs() < 1e-14 && (dv - 2.0).abs() < 1e-14);
    }

    #[test]
    fn converges_on_smooth_data() {
        let x: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
        let p = Pchip::new(x, y).unwrap();
        for k in 0..50 {
            let t = 0.0371 + 0.077 * k as f64;
            assert!((p.eval(t) - (-t * t).exp()).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(steps in proptest::collection::vec(0.0f64..1.0, 3..12)) {
            let x: Vec<f64> = (0..steps.len()).map(|i| i as f64).collect();
            let mut acc = 0.0;
            let y: Vec<f64> = steps.iter().map(|s| { acc -= s; acc }).collect();
            let p = Pchip::new(x.clone(), y).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..=500 {
                let t = x[x.len() - 1] * k as f64 / 500.0;
                let v = p.eval(t);
                prop_assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
    }
}
