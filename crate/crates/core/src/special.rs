//! Special functions: the Faddeeva function, integer-order Bessel functions and
//! sphere areas.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Γ(k/2) for integer k ≥ 1.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere S^{d-1} in R^d (|S^0| = 2).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

const WEIDEMAN_N: usize = 40;

fn weideman_coefficients() -> &'static (f64, Vec<f64>) {
    static COEF: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    COEF.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // f sampled at k = -M+1..M-1 with a leading zero, then fftshifted.
        let mut f = vec![0.0; m2];
        for (idx, k) in (-(m as i64) + 1..m as i64).enumerate() {
            let theta = k as f64 * PI / m as f64;
            let t = l * (theta / 2.0).tan();
            f[idx + 1] = (-t * t).exp() * (l * l + t * t);
        }
        let mut shifted = vec![0.0; m2];
        for i in 0..m2 {
            shifted[i] = f[(i + m) % m2];
        }
        // Real part of the DFT; size is small, so direct summation is fine.
        let mut a = vec![0.0; m2];
        for (k, ak) in a.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, v) in shifted.iter().enumerate() {
                s += v * (2.0 * PI * (k * j % m2) as f64 / m2 as f64).cos();
            }
            *ak = s / m2 as f64;
        }
        // Highest degree first for Horner evaluation.
        let coef: Vec<f64> = a[1..=n].iter().rev().copied().collect();
        (l, coef)
    })
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    let (l, coef) = weideman_coefficients();
    let i = Complex64::i();
    let denom = Complex64::new(*l, 0.0) - i * z;
    let zz = (Complex64::new(*l, 0.0) + i * z) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for c in coef {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

/// Faddeeva function w(z) = e^{-z²} erfc(-iz).
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        2.0 * (-z * z).exp() - faddeeva_upper(-z)
    }
}

/// Scaled complementary error function erfcx(z) = e^{z²} erfc(z) = w(iz).
pub fn erfcx(z: Complex64) -> Complex64 {
    faddeeva(Complex64::i() * z)
}

/// J_n(z) for integer n ≥ 0 and real z via the periodic trapezoid rule on Bessel's
/// integral, which converges geometrically once the node count exceeds |z| + n.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    let m = ((z.abs() + n as f64 + 40.0).ceil() as usize).max(64);
    let mut s = 0.0;
    for j in 0..m {
        let th = 2.0 * PI * j as f64 / m as f64;
        s += (n as f64 * th - z * th.sin()).cos();
    }
    s / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_half_line, PanelOptions};

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn faddeeva_known_values() {
        let w0 = faddeeva(Complex64::new(0.0, 0.0));
        assert!((w0 - 1.0).norm() < 1e-14);
        // w(1) = e^{-1} + (2i/sqrt(pi)) Dawson(1)
        let w1 = faddeeva(Complex64::new(1.0, 0.0));
        assert!((w1 - Complex64::new(0.367_879_441_171_442_3, 0.607_157_705_841_393_7)).norm() < 1e-13);
        // erfcx(1)
        let e1 = erfcx(Complex64::new(1.0, 0.0));
        assert!((e1.re - 0.427_583_576_155_807).abs() < 1e-14);
    }

    #[test]
    fn faddeeva_matches_laplace_integral() {
        // w(z) = (1/sqrt(pi)) int_0^inf exp(-t²/4 + i z t) dt for Im z ≥ 0
        let zs = [
            Complex64::new(0.3, 0.0),
            Complex64::new(-2.5, 0.1),
            Complex64::new(4.0, 2.0),
            Complex64::new(-7.0, 0.5),
            Complex64::new(12.0, 0.0),
            Complex64::new(0.0, 5.0),
            Complex64::new(30.0, 3.0),
        ];
        for z in zs {
            let opts = PanelOptions { panel: 0.25, abs_tol: 1e-15, max_panels: 400 };
            let tail = |t: f64| (-t * t / 4.0).exp() * 2.0 / t.max(1e-300);
            let r = integrate_half_line(
                |t| (Complex64::new(-t * t / 4.0, 0.0) + Complex64::i() * z * t).exp(),
                &opts,
                Some(&tail),
            )
            .unwrap();
            let reference = r.value / PI.sqrt();
            let w = faddeeva(z);
            assert!((w - reference).norm() < 1e-13 * reference.norm().max(1e-2), "z={z} w={w} ref={reference}");
        }
    }

    #[test]
    fn faddeeva_lower_half_plane_reflection() {
        let z = Complex64::new(1.3, -0.4);
        let lhs = faddeeva(z) + faddeeva(-z);
        assert!((lhs - 2.0 * (-z * z).exp()).norm() < 1e-14);
    }

    #[test]
    fn bessel_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(0, 2.404_825_557_695_773).abs()) < 1e-14);
        assert!((bessel_j(1, 50.0) - (-0.097_511_828_125_175_96)).abs() < 1e-14);
    }
}
