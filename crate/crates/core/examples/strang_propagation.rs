//! Self-consistent split-step evolution of a small perturbation of a Gaussian background,
//! with the diagnostics ledger and an on-disk trajectory.

use hartree_core::dynamics::{free_conjugate, propagate, Drive, PropagateOptions, SelfConsistentScheme};
use hartree_core::io::write_trajectory;
use hartree_core::profiles::{InteractionPotential, VelocityProfile};
use hartree_core::spectral::{weighted_schatten_norm, DensityMatrixState, TimeGrid, TorusGrid, C64};

fn main() -> hartree_core::Result<()> {
    let grid = TorusGrid::new(1, 32, 20.0)?;
    let g = VelocityProfile::gaussian(1, 1.0, 1.0)?;
    let w = InteractionPotential::delta_with_fourier(1, 0.7)?;
    let q0 = DensityMatrixState::rank_one(&grid, 1e-2, |x| C64::new((-(x[0] - 10.0).powi(2)).exp(), 0.0));
    let time = TimeGrid::new(0.01, 2000)?;
    let opts = PropagateOptions { store_stride: 400, background: Some(g), ..Default::default() };
    let drive = Drive::SelfConsistent { potential: &w, scheme: SelfConsistentScheme::Explicit };
    let traj = propagate(&q0, &drive, time, &opts)?;

    println!("{:>6} {:>8} {:>14} {:>12} {:>12}", "step", "time", "trace", "herm", "‖ρ‖₂");
    for r in &traj.ledger {
        println!("{:>6} {:>8.2} {:>14.10} {:>12.2e} {:>12.4e}", r.step, r.time, r.trace_re, r.herm_defect, r.rho_l2);
    }
    let q = traj.final_state();
    let before = weighted_schatten_norm(q, 0.5, 2.0)?;
    let after = weighted_schatten_norm(&free_conjugate(q, 3.7), 0.5, 2.0)?;
    println!("free flow keeps the weighted Hilbert-Schmidt norm: {before:.12} vs {after:.12}");

    let dir = std::env::temp_dir().join("hartree_strang_example");
    let manifest = write_trajectory(&dir, &traj)?;
    println!("wrote {} snapshots to {}", manifest.snapshots.len(), dir.display());
    Ok(())
}
