//! Zeros of 1 + 2ŵM for a two-stream profile, and the one-dimensional boundary formula.

use hartree_core::dispersion::{dispersion_m, dispersion_root, im_m_boundary, reduced_m, RootOptions};
use hartree_core::profiles::{InteractionPotential, VelocityProfile};

fn main() -> hartree_core::Result<()> {
    let p = VelocityProfile::two_stream(1, 1.0, 2.0, 1.0)?;
    let w = InteractionPotential::delta_with_fourier(1, 5.0)?;
    for xi in [0.25, 0.5, 0.75] {
        match dispersion_root(&p, &w, &[xi], (0.3, 0.0), &RootOptions::default()) {
            Ok(r) => println!("|ξ| = {xi}: τ* = {:.6}, ω* = {:+.6} after {} Newton steps", r.tau, r.omega, r.iterations),
            Err(e) => println!("|ξ| = {xi}: {e}"),
        }
    }

    // Reduced one-dimensional function and its boundary limit.
    let g = VelocityProfile::gaussian(1, 1.0, 1.0)?;
    let m = reduced_m(&g, 1e-4, 1.0, 1e-3)?;
    println!("Im m(1e-4, 1, 1e-3) = {:.6}, boundary formula {:.6}", m.im, im_m_boundary(&g, 1.0, 1e-3)?);
    let full = dispersion_m(&g, 0.4, 0.3, &[0.8])?;
    let red = reduced_m(&g, 0.4 / 1.6, 0.3 / 1.6, 0.4)? / 4.0;
    println!("M(0.4, 0.3, 0.8) = {full:.8}, via reduced function {red:.8}");
    Ok(())
}
