//! Penrose margin of a three-dimensional Gaussian against a delta coupling, together with
//! the sufficient conditions and the refusal of the ball profile.

use hartree_core::dispersion::{penrose_margin, penrose_sufficient_check, ScanConfig};
use hartree_core::profiles::{InteractionPotential, VelocityProfile};

fn main() -> hartree_core::Result<()> {
    let g = VelocityProfile::gaussian(3, 1.0, 1.0)?;
    let unit = InteractionPotential::delta_with_fourier(3, 1.0)?;
    let per_unit = penrose_sufficient_check(&g, &unit)?.cond1_ratio;

    for ratio in [0.5, 0.9] {
        let w = InteractionPotential::delta_with_fourier(3, ratio / per_unit)?;
        let suff = penrose_sufficient_check(&g, &w)?;
        println!("sufficiency ratio {:.2}: cond1 {:?}, cond2 {:?}", suff.cond1_ratio, suff.cond1, suff.cond2);
        let report = match penrose_margin(&g, &w, &ScanConfig::default()) {
            Ok(r) => r,
            Err(e) => {
                println!("  {e}");
                continue;
            }
        };
        println!(
            "  margin {:.4} (stable: {}), boundary min {:.4}, interior min {:.4}, Ξ = {:.3}",
            report.margin, report.stable, report.boundary_min, report.interior_min, report.xi_max
        );
        println!("  refinement margins {:?}", report.refinement_margins);
        if let Some(a) = report.argmin {
            println!("  attained at τ = {:.3e}, ω = {:.4}, |ξ| = {:.4}", a.tau, a.omega, a.xi);
        }
    }

    let ball = VelocityProfile::ball(3, 1.0, 1.0)?;
    match penrose_margin(&ball, &unit, &ScanConfig::default()) {
        Ok(_) => println!("ball scanned"),
        Err(e) => println!("ball refused: {e}"),
    }
    Ok(())
}
