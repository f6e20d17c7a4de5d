//! Background response to a small potential: linear part versus the remainder, whose size
//! grows quadratically with the amplitude.

use hartree_core::dynamics::reaction_terms;
use hartree_core::profiles::{InteractionPotential, VelocityProfile};
use hartree_core::spectral::{sobolev_norm, DensityRule, PotentialField, SpaceTimeField, TimeGrid, TorusGrid, C64};

fn main() -> hartree_core::Result<()> {
    let grid = TorusGrid::new(1, 16, 10.0)?;
    let time = TimeGrid::from_final(2.0, 100)?;
    let g = VelocityProfile::gaussian(1, 1.0, 1.0)?;
    let w = InteractionPotential::delta_with_fourier(1, 0.5)?;
    let k = 2.0 * std::f64::consts::PI / 10.0;
    let mut prev: Option<f64> = None;
    for amp in [0.01, 0.02, 0.04] {
        let rho = SpaceTimeField::from_fn(&grid, time, |t, x| C64::new(amp * (k * x[0]).cos() * (1.0 + t).cos(), 0.0));
        let v = PotentialField::from_density(&w, &rho);
        let r = reaction_terms(&v, &g, &w, DensityRule::Collocation)?;
        let lin = sobolev_norm(&r.linear, 0.0);
        let hi = sobolev_norm(&r.higher, 0.0);
        let ratio = prev.map(|p| format!("{:.3}", hi / p)).unwrap_or_default();
        println!("amplitude {amp}: ‖linear‖ {lin:.4e}, ‖higher‖ {hi:.4e} {ratio}");
        prev = Some(hi);
    }
    Ok(())
}
