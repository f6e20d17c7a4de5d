//! Picard iteration of the density map against direct self-consistent propagation, and the
//! interaction-picture scattering diagnostic.

use hartree_core::dispersion::penrose_sufficient_check;
use hartree_core::dynamics::{PropagateOptions, SelfConsistentScheme};
use hartree_core::profiles::{InteractionPotential, VelocityProfile};
use hartree_core::solver::{scattering_diagnostic, solve_direct, solve_fixed_point, FixedPointConfig, Problem};
use hartree_core::spectral::{sobolev_norm, DensityMatrixState, DensityRule, TimeGrid, TorusGrid, C64};

fn main() -> hartree_core::Result<()> {
    let g = VelocityProfile::gaussian(1, 1.0, 1.0)?;
    let per_unit = penrose_sufficient_check(&g, &InteractionPotential::delta_with_fourier(1, 1.0)?)?.cond1_ratio;
    let w = InteractionPotential::delta_with_fourier(1, 0.5 / per_unit)?;
    let grid = TorusGrid::new(1, 32, 20.0)?;
    let q = DensityMatrixState::rank_one(&grid, 1e-2, |x| C64::new((-(x[0] - 10.0).powi(2)).exp(), 0.0));
    let time = TimeGrid::from_final(20.0, 1000)?;

    let problem = Problem { profile: &g, potential: &w, q_in: &q, time, rule: DensityRule::Collocation };
    let fp = solve_fixed_point(problem, &FixedPointConfig::default())?;
    for r in &fp.history {
        println!("iteration {}: residual {:.3e}, factor {:?}", r.iteration, r.residual, r.factor);
    }

    let opts = PropagateOptions { store_stride: 50, ..Default::default() };
    for scheme in [SelfConsistentScheme::Explicit, SelfConsistentScheme::PredictorCorrector] {
        let direct = solve_direct(&q, &g, &w, time, scheme, &opts)?;
        let rel = sobolev_norm(&fp.density.sub(&direct.trajectory.density), 0.0) / sobolev_norm(&fp.density, 0.0);
        let s = scattering_diagnostic(&direct.trajectory, 0.0, time.t_final())?;
        println!(
            "{scheme:?}: ‖ϱ* - ρ_direct‖/‖ϱ*‖ = {rel:.3e}; tails {:.4e} → {:.4e} ({:?})",
            s.first_tail, s.last_tail, s.verdict
        );
    }
    Ok(())
}
