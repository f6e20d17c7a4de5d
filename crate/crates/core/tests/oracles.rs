//! Independent reference computations: brute-force sums and quadratures that share no
//! code path with the library routines they check.

use std::f64::consts::PI;

use hartree_core::dispersion::{dispersion_m, penrose_value, DispersionMethod};
use hartree_core::profiles::{InteractionPotential, VelocityProfile};
use hartree_core::response::kernel_eval;
use hartree_core::spectral::{
    density_coefficients, schatten_norm, DensityMatrixState, DensityRule, TorusGrid, C64,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// (2π)^{-d/2} Σ_v g(v) e^{-ix·v} h^d over a cube of half-width `half` with midpoints.
fn riemann_fourier(p: &VelocityProfile, x: &[f64], half: f64, n: usize) -> C64 {
    let d = p.dim();
    let h = 2.0 * half / n as f64;
    let axis: Vec<f64> = (0..n).map(|i| -half + (i as f64 + 0.5) * h).collect();
    let mut acc = C64::new(0.0, 0.0);
    let mut idx = vec![0usize; d];
    let total = n.pow(d as u32);
    let mut v = vec![0.0; d];
    for _ in 0..total {
        for a in 0..d {
            v[a] = axis[idx[a]];
        }
        let g = p.eval(&v);
        if g != 0.0 {
            let phase: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
            acc += C64::from_polar(g, -phase);
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
        }
    }
    acc * h.powi(d as i32) * (2.0 * PI).powf(-(d as f64) / 2.0)
}

fn probes(d: usize) -> Vec<Vec<f64>> {
    let base = [0.0, 0.3, 0.8, 1.5, 2.2];
    base.iter()
        .enumerate()
        .map(|(i, &r)| (0..d).map(|a| if a == i % d { r } else { 0.37 * r }).collect())
        .collect()
}

fn assert_rel(a: C64, b: C64, tol: f64, what: &str) {
    let scale = b.norm().max(1e-3);
    assert!((a - b).norm() <= tol * scale, "{what}: {a} vs {b}");
}

#[test]
fn smooth_profiles_match_riemann_sums() {
    let cases: Vec<(VelocityProfile, f64, usize)> = vec![
        (VelocityProfile::gaussian(1, 1.3, 0.7).unwrap(), 9.0, 400),
        (VelocityProfile::gaussian(2, 1.0, 1.0).unwrap(), 8.0, 160),
        (VelocityProfile::gaussian(3, 2.0, 1.0).unwrap(), 6.0, 64),
        (VelocityProfile::fermi_dirac(1, 3.0, 1.0, 1.0).unwrap(), 14.0, 1400),
        (VelocityProfile::fermi_dirac(2, 4.0, 1.0, 1.0).unwrap(), 10.0, 400),
        (VelocityProfile::fermi_dirac(3, 4.0, 1.0, 1.0).unwrap(), 8.0, 96),
        (VelocityProfile::two_stream(1, 1.0, 2.0, 1.0).unwrap(), 12.0, 600),
        (VelocityProfile::two_stream(2, 1.0, 1.5, 1.0).unwrap(), 9.0, 180),
    ];
    for (p, half, n) in &cases {
        for x in probes(p.dim()) {
            let lib = p.fourier(&x).unwrap();
            let oracle = riemann_fourier(p, &x, *half, *n);
            assert_rel(lib, oracle, 1e-6, &format!("{:?} d={} at {x:?}", p.family(), p.dim()));
        }
    }
}

#[test]
fn one_dimensional_ball_and_table_match_fine_midpoint_sums() {
    // The ball edge sits on a cell boundary, so the midpoint rule is second order.
    // mu is the Fermi energy, so the radius is 1.2.
    let ball = VelocityProfile::ball(1, 1.44, 1.0).unwrap();
    let tab = VelocityProfile::tabulated(1, vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![1.0, 0.9, 0.5, 0.1, 0.0]).unwrap();
    for x in probes(1) {
        assert_rel(ball.fourier(&x).unwrap(), riemann_fourier(&ball, &x, 1.2, 240_000), 1e-6, "ball");
        assert_rel(tab.fourier(&x).unwrap(), riemann_fourier(&tab, &x, 2.0, 400_000), 1e-6, "table");
    }
}

#[test]
fn density_matches_brute_force_double_sum() {
    let grid = TorusGrid::new(2, 6, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = DensityMatrixState::random_hermitian(&grid, 0.4, &mut rng);
    let rho = grid.from_coefficients(&density_coefficients(&q, DensityRule::Collocation));
    let l = grid.length();
    let m = grid.size();
    // e_k(x) = L^{-d/2} e^{ik·x}, summed over all pairs at eight grid points.
    for j in [0usize, 5, 7, 13, 20, 28, 31, 35] {
        let x = grid.position(j);
        let e = |k: usize| {
            let kv = grid.momentum(k);
            C64::from_polar(1.0 / l, kv[0] * x[0] + kv[1] * x[1])
        };
        let mut brute = C64::new(0.0, 0.0);
        for k in 0..m {
            for kp in 0..m {
                brute += q.matrix[(k, kp)] * e(k) * e(kp).conj();
            }
        }
        assert!((rho[j] - brute).norm() < 1e-10, "{} vs {brute}", rho[j]);
        assert!(brute.im.abs() < 1e-12);
    }
}

/// One-sided Jacobi SVD on the real 2m×2m embedding; singular values come in pairs.
fn jacobi_singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let (r, c) = a.shape();
    let mut m = DMatrix::<f64>::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            m[(i, j)] = z.re;
            m[(i + r, j + c)] = z.re;
            m[(i, j + c)] = -z.im;
            m[(i + r, j)] = z.im;
        }
    }
    let n = 2 * c;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..2 * r {
                    alpha += m[(i, p)] * m[(i, p)];
                    beta += m[(i, q)] * m[(i, q)];
                    gamma += m[(i, p)] * m[(i, q)];
                }
                if gamma.abs() < 1e-300 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..2 * r {
                    let (x, y) = (m[(i, p)], m[(i, q)]);
                    m[(i, p)] = cs * x - sn * y;
                    m[(i, q)] = sn * x + cs * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| m.column(j).norm()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.iter().step_by(2).copied().collect()
}

#[test]
fn schatten_norms_match_jacobi_oracle() {
    let grid = TorusGrid::new(1, 8, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = DensityMatrixState::random_hermitian(&grid, 1.0, &mut rng);
    let a = &q.matrix * DMatrix::from_fn(8, 8, |i, j| C64::new((i as f64 - j as f64).cos(), 0.1 * i as f64));
    let sv = jacobi_singular_values(&a);
    for alpha in [1.0, 4.0 / 3.0, 2.0, 3.0, f64::INFINITY] {
        let oracle = if alpha.is_infinite() {
            sv[0]
        } else {
            sv.iter().map(|s| s.powf(alpha)).sum::<f64>().powf(1.0 / alpha)
        };
        let lib = schatten_norm(&a, alpha).unwrap();
        assert!((lib - oracle).abs() < 1e-10 * oracle, "α={alpha}: {lib} vs {oracle}");
    }
}

/// 1 + ∫_0^∞ e^{-(τ + iω)t} K(t, ξ) dt by composite Simpson on the kernel itself.
fn laplace_of_kernel(p: &VelocityProfile, w: &InteractionPotential, tau: f64, omega: f64, xi: &[f64], t_max: f64) -> C64 {
    let n = 200_000;
    let h = t_max / n as f64;
    let s = C64::new(tau, omega);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..=n {
        let t = i as f64 * h;
        let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += wgt * (-s * t).exp() * kernel_eval(p, w, t, xi).unwrap();
    }
    1.0 + acc * h / 3.0
}

#[test]
fn penrose_value_is_the_laplace_transform_of_the_kernel() {
    let w = InteractionPotential::delta_with_fourier(1, 0.8).unwrap();
    let g = VelocityProfile::gaussian(1, 1.0, 1.0).unwrap();
    let ts = VelocityProfile::two_stream(1, 1.0, 2.0, 1.0).unwrap();
    for (p, tau, omega, xi) in [(&g, 0.0, 0.7, 0.5), (&g, 0.3, -1.2, 1.1), (&ts, 0.1, 0.4, 0.6), (&ts, 0.0, 2.0, 0.9)] {
        let oracle = laplace_of_kernel(p, &w, tau, omega, &[xi], 60.0 / xi);
        let lib = penrose_value(p, &w, tau, omega, &[xi], DispersionMethod::Auto).unwrap();
        assert!((lib - oracle).norm() < 1e-8, "{lib} vs {oracle}");
    }
    let w3 = InteractionPotential::delta_with_fourier(3, 0.5).unwrap();
    let g3 = VelocityProfile::gaussian(3, 1.0, 1.0).unwrap();
    let xi = [0.3, 0.4, 0.0];
    let oracle = laplace_of_kernel(&g3, &w3, 0.05, 0.9, &xi, 120.0);
    let lib = 1.0 + 2.0 * w3.fourier(&xi) * dispersion_m(&g3, 0.05, 0.9, &xi).unwrap();
    assert!((lib - oracle).norm() < 1e-8, "{lib} vs {oracle}");
}
