//! Adaptive Gauss-Kronrod quadrature on finite intervals and a panel walker
//! for oscillatory integrals on the half line.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    /// Largest |f| seen at any node.
    pub max_abs: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 15-point Kronrod rule with its embedded 7-point Gauss estimate.
fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64, max_abs: &mut f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    *max_abs = max_abs.max(fc.norm());
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        *max_abs = max_abs.max(f1.norm()).max(f2.norm());
        let s = f1 + f2;
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    let err = (k - g).norm();
    // Round-off floor, as in QUADPACK.
    let floor = 50.0 * f64::EPSILON * k.norm();
    (k, err.max(floor))
}

/// Adaptive quadrature of a complex integrand over [a, b].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
            max_abs: 0.0,
            evaluations: 0,
        });
    }
    let mut max_abs = 0.0;
    let (v, e) = gk15(&mut f, a, b, &mut max_abs);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    let mut splits = 0;
    while total_err > opts.abs_tol.max(opts.rel_tol * total.norm()) {
        if splits >= opts.max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                what: format!("adaptive quadrature on [{a}, {b}]"),
                estimate: total_err,
            });
        }
        let seg = heap.pop().expect("heap is never empty");
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureNotConverged {
                what: format!("interval exhausted near {m}"),
                estimate: total_err,
            });
        }
        let (v1, e1) = gk15(&mut f, seg.a, m, &mut max_abs);
        let (v2, e2) = gk15(&mut f, m, seg.b, &mut max_abs);
        evals += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, err: e2 });
        splits += 1;
        if splits % 64 == 0 {
            // Re-sum to shed accumulated cancellation error.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
    Ok(QuadResult {
        value: total,
        abs_error: total_err,
        max_abs,
        evaluations: evals,
    })
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|r| r.value.re)
}

#[derive(Debug, Clone, Copy)]
pub struct PanelOptions {
    pub panel: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

/// Integrates f over [0, inf) panel by panel.
///
/// Stops once `tail(t)` (a certified bound on the remaining integral) falls below
/// `abs_tol`. Without a bound the walker uses `t * max|f|` over the latest panel,
/// which is conservative for algebraic decay down to t^-2.
pub fn integrate_half_line<F>(
    mut f: F,
    opts: &PanelOptions,
    tail: Option<&dyn Fn(f64) -> f64>,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    let inner = QuadOptions {
        abs_tol: opts.abs_tol * 1e-2,
        rel_tol: 1e-12,
        max_subdivisions: 100,
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut evals = 0;
    let mut t = 0.0;
    for _ in 0..opts.max_panels {
        let r = integrate(&mut f, t, t + opts.panel, &inner)?;
        total += r.value;
        err += r.abs_error;
        max_abs = max_abs.max(r.max_abs);
        evals += r.evaluations;
        t += opts.panel;
        let remaining = match tail {
            Some(b) => b(t),
            None => t * r.max_abs + r.value.norm(),
        };
        if remaining < opts.abs_tol {
            return Ok(QuadResult {
                value: total,
                abs_error: err + remaining,
                max_abs,
                evaluations: evals,
            });
        }
    }
    let remaining = match tail {
        Some(b) => b(t),
        None => f64::NAN,
    };
    Err(Error::QuadratureNotConverged {
        what: format!("half-line integral still open at t = {t:.3e}"),
        estimate: remaining,
    })
}
