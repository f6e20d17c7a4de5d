//! The linear response operator 1 + 𝓛: round trip through the Volterra solver, and the
//! linearized evolution of a two-stream instability compared with the dispersion root.

use hartree_core::dispersion::{dispersion_root, RootOptions};
use hartree_core::profiles::{InteractionPotential, VelocityProfile};
use hartree_core::response::{
    apply_response, growth_rate_fit, invert_response, linear_solve, FitWindow, KernelSource, ResponseKernel,
};
use hartree_core::spectral::{sobolev_norm, DensityMatrixState, SpaceTimeField, TimeGrid, TorusGrid, C64};

fn main() -> hartree_core::Result<()> {
    let g = VelocityProfile::gaussian(1, 1.0, 1.0)?;
    let w = InteractionPotential::delta_with_fourier(1, 0.5)?;
    let grid = TorusGrid::new(1, 64, 20.0)?;
    let time = TimeGrid::new(0.02, 512)?;
    let k = ResponseKernel::build(&g, &w, &grid, time, KernelSource::Continuum)?;
    let f = SpaceTimeField::from_fn(&grid, time, |t, x| C64::new((x[0] - t).sin() * (-0.1 * t).exp(), 0.0));
    let h = f.add(&apply_response(&k, &f)?);
    let back = invert_response(&k, &h)?;
    println!("(1 + 𝓛)^(-1)(1 + 𝓛) f - f = {:.3e} relative", sobolev_norm(&back.sub(&f), 0.0) / sobolev_norm(&f, 0.0));

    let p = VelocityProfile::two_stream(1, 1.0, 2.0, 1.0)?;
    let w = InteractionPotential::delta_with_fourier(1, 5.0)?;
    let l = 4.0 * std::f64::consts::PI;
    let xi = 2.0 * std::f64::consts::PI / l;
    let root = dispersion_root(&p, &w, &[xi], (0.3, 0.0), &RootOptions::default())?;
    let grid = TorusGrid::new(1, 32, l)?;
    let time = TimeGrid::new(0.02, 1500)?;
    let k = ResponseKernel::build(&p, &w, &grid, time, KernelSource::Continuum)?;
    let q = DensityMatrixState::rank_one(&grid, 1e-3, |x| C64::new(1.0 + 0.5 * (x[0] * xi).cos(), 0.0));
    let rho = linear_solve(&q, &k)?;
    let series: Vec<C64> = rho.to_coefficients().iter().map(|c| c[1]).collect();
    let fit = growth_rate_fit(&series, time, FitWindow::default())?;
    println!(
        "two-stream at |ξ| = {xi:.3}: root τ* = {:.5}, fitted growth {:.5} (r² = {:.6})",
        root.tau, fit.rate, fit.r2
    );
    Ok(())
}
