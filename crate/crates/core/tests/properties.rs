//! Invariants checked over randomized inputs.

use hartree_core::dispersion::{penrose_value, DispersionMethod};
use hartree_core::dynamics::{free_conjugate, Propagator};
use hartree_core::profiles::{InteractionPotential, VelocityProfile};
use hartree_core::response::{volterra_apply, volterra_solve};
use hartree_core::spectral::{
    density_coefficients, schatten_norm, weighted_schatten_norm, DensityMatrixState, DensityRule, TimeGrid, TorusGrid,
    C64,
};
use hartree_core::verify::{strichartz_sample, StrichartzParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_state(d: usize, n: usize, seed: u64) -> DensityMatrixState {
    let grid = TorusGrid::new(d, n, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DensityMatrixState::random_hermitian(&grid, 0.5, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hermitian_states_have_real_density(seed in any::<u64>(), d in 1usize..=2, n in prop::sample::select(vec![4usize, 6, 8])) {
        let q = random_state(d, n, seed);
        let rho = q.grid.from_coefficients(&density_coefficients(&q, DensityRule::Collocation));
        let scale = rho.iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(rho.iter().all(|v| v.im.abs() < 1e-12 * scale));
        // Truncation leaves the Nyquist modes unpaired; every other pair is conjugate.
        let c = density_coefficients(&q, DensityRule::Truncated);
        let half = (n / 2) as i64;
        for i in 0..q.grid.size() {
            let k = q.grid.mode(i);
            if k[..d].contains(&-half) {
                continue;
            }
            let neg: Vec<i64> = k[..d].iter().map(|x| -x).collect();
            let j = q.grid.flat_index(&neg);
            prop_assert!((c[i] - c[j].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn free_flow_preserves_schatten_norms(seed in any::<u64>(), t in -5.0f64..5.0, alpha in 1.0f64..4.0) {
        let q = random_state(1, 8, seed);
        let qt = free_conjugate(&q, t);
        let a = schatten_norm(&q.matrix, alpha).unwrap();
        prop_assert!((schatten_norm(&qt.matrix, alpha).unwrap() - a).abs() < 1e-10 * a);
        let w = weighted_schatten_norm(&q, 0.7, alpha).unwrap();
        prop_assert!((weighted_schatten_norm(&qt, 0.7, alpha).unwrap() - w).abs() < 1e-10 * w);
        let back = free_conjugate(&qt, -t);
        prop_assert!((&back.matrix - &q.matrix).norm() < 1e-12 * q.matrix.norm());
    }

    #[test]
    fn strang_step_is_a_unitary_conjugation(seed in any::<u64>(), h in 0.001f64..0.2, amp in 0.0f64..3.0) {
        let q = random_state(1, 8, seed);
        let p = Propagator::new(&q.grid, h);
        let v: Vec<f64> = (0..8).map(|j| amp * (0.7 * j as f64).sin()).collect();
        let mut m = q.matrix.clone();
        p.step(&mut m, &v);
        let before = schatten_norm(&q.matrix, 3.0).unwrap();
        prop_assert!((schatten_norm(&m, 3.0).unwrap() - before).abs() < 1e-10 * before);
        prop_assert!((m.trace() - q.matrix.trace()).norm() < 1e-10 * (1.0 + q.matrix.trace().norm()));
        prop_assert!((&m - m.adjoint()).norm() < 1e-12 * m.norm());
    }

    #[test]
    fn volterra_solve_inverts_apply(
        kernel in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 64),
        f in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        dt in 0.001f64..0.1,
    ) {
        let k: Vec<C64> = kernel.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let f: Vec<C64> = f.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let lf = volterra_apply(&k, dt, &f);
        let h: Vec<C64> = f.iter().zip(&lf).map(|(a, b)| a + b).collect();
        let back = volterra_solve(&k, dt, &h).unwrap();
        let err = back.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn penrose_value_is_conjugate_symmetric_in_frequency(
        tau in 0.0f64..1.0, omega in -3.0f64..3.0, xi in 0.1f64..2.0, beta in 0.5f64..2.0,
    ) {
        let g = VelocityProfile::gaussian(1, beta, 1.0).unwrap();
        let w = InteractionPotential::delta_with_fourier(1, 0.6).unwrap();
        let a = penrose_value(&g, &w, tau, omega, &[xi], DispersionMethod::Auto).unwrap();
        let b = penrose_value(&g, &w, tau, -omega, &[xi], DispersionMethod::Auto).unwrap();
        let c = penrose_value(&g, &w, tau, omega, &[-xi], DispersionMethod::Auto).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9);
        prop_assert!((a - c).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn strichartz_draws_depend_only_on_the_seed(seed in any::<u64>()) {
        let grid = TorusGrid::new(2, 4, 6.0).unwrap();
        let time = TimeGrid::from_final(0.5, 10).unwrap();
        let params = StrichartzParams::energy_point(2);
        let a = strichartz_sample(&grid, time, &params, 4, seed).unwrap();
        let b = strichartz_sample(&grid, time, &params, 4, seed).unwrap();
        prop_assert_eq!(a.ratios, b.ratios);
    }
}
