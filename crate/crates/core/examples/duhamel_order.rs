//! Second-order convergence of the split-step propagator, measured through the defect in
//! the Duhamel identity for a smooth prescribed potential.

use hartree_core::dynamics::duhamel_defect;
use hartree_core::spectral::{PotentialField, SpaceTimeField, TimeGrid, TorusGrid, C64};
use nalgebra::DMatrix;

fn main() -> hartree_core::Result<()> {
    let grid = TorusGrid::new(1, 16, 2.0 * std::f64::consts::PI)?;
    let v = |t: f64, x: &[f64]| C64::new(0.8 * x[0].cos() * (1.0 + t).sin() + 0.3 * (2.0 * x[0] + t).sin(), 0.0);
    let probe = DMatrix::<C64>::identity(grid.size(), grid.size());
    let mut prev: Option<f64> = None;
    for n in [20, 40, 80, 160] {
        let time = TimeGrid::from_final(1.0, n)?;
        let field = PotentialField::prescribed(SpaceTimeField::from_fn(&grid, time, v));
        let r = duhamel_defect(&field, &probe)?;
        match prev {
            Some(p) => println!("Δt = {:.5}: defect {:.4e}, ratio {:.3}", time.dt, r.max_defect, p / r.max_defect),
            None => println!("Δt = {:.5}: defect {:.4e}", time.dt, r.max_defect),
        }
        prev = Some(r.max_defect);
    }
    Ok(())
}
