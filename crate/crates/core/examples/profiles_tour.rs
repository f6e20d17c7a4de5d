//! Built-in velocity profiles: values, Fourier transforms, moments and warnings.

use hartree_core::profiles::{penrose_moment_integral, profile_marginal, InteractionPotential, VelocityProfile};

fn main() -> hartree_core::Result<()> {
    let profiles = [
        ("gaussian", VelocityProfile::gaussian(3, 1.0, 1.0)?),
        ("fermi-dirac", VelocityProfile::fermi_dirac(3, 2.0, 1.0, 1.0)?),
        ("two-stream", VelocityProfile::two_stream(1, 1.0, 2.0, 1.0)?),
        ("ball", VelocityProfile::ball(3, 1.0, 1.0)?),
    ];
    for (name, p) in &profiles {
        println!("{name} (d = {})", p.dim());
        println!("  g(0) = {:.6}   mass = {:.6}", p.eval(&vec![0.0; p.dim()]), p.mass()?);
        let probe: Vec<f64> = (0..p.dim()).map(|i| if i == 0 { 0.7 } else { 0.2 }).collect();
        println!("  ĝ({probe:?}) = {:.6e}", p.fourier(&probe)?);
        match penrose_moment_integral(p) {
            Ok(m) => println!("  ∫ |x| |ĝ(x)| dx = {m:.6}"),
            Err(e) => println!("  moment integral: {e}"),
        }
        if !p.warnings().is_empty() {
            println!("  warnings: {:?}", p.warnings());
        }
    }

    // The one-dimensional marginal that enters the boundary analysis.
    let g3 = VelocityProfile::gaussian(3, 1.0, 1.0)?;
    let m = profile_marginal(&g3)?;
    println!("marginal of the d = 3 Gaussian at v = 0, 1: {:.6}, {:.6}", m.eval(&[0.0]), m.eval(&[1.0]));

    let tab = VelocityProfile::tabulated(2, vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![1.0, 0.8, 0.4, 0.1, 0.0])?;
    println!("tabulated d = 2: g(0.75) = {:.4}, ĝ(0.3) = {:.6}", tab.eval(&[0.75, 0.0]), tab.fourier_radial(0.3)?);

    for w in [
        InteractionPotential::delta(3, 1.0)?,
        InteractionPotential::gaussian(3, 1.0, 0.5)?,
        InteractionPotential::yukawa(3, 1.0, 2.0)?,
    ] {
        println!("{:?}: ŵ(0) = {:.6}, sup|ŵ| = {:.6}", w.family(), w.fourier_radial(0.0), w.sup_norm());
    }
    Ok(())
}
