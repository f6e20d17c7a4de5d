//! Random low-rank sampling of the orthonormal Strichartz ratio at the energy point in d = 2,
//! and a non-admissible probe with α = 2.

use hartree_core::spectral::{TimeGrid, TorusGrid};
use hartree_core::verify::{strichartz_ladder, StrichartzParams};

fn main() -> hartree_core::Result<()> {
    let grid = TorusGrid::new(2, 8, 2.0 * std::f64::consts::PI)?;
    let time = TimeGrid::from_final(1.0, 100)?;
    let params = StrichartzParams::energy_point(2);
    let r = strichartz_ladder(&grid, time, &params, 24, 5, 2)?;
    for l in &r.levels {
        println!("N = {:>3}: max ratio {:.5}, mean {:.5}", l.n, l.max, l.mean);
    }
    println!("growth across the ladder {:.3} (stable: {})", r.growth, r.stable);

    let probe = StrichartzParams { alpha: 2.0, probe_sharpness: true, ..params };
    println!("α = 2 violates: {:?}", probe.admissibility_violations(2));
    let r = strichartz_ladder(&grid, time, &probe, 24, 5, 2)?;
    println!("probe maxima {:?}", r.levels.iter().map(|l| l.max).collect::<Vec<_>>());
    Ok(())
}
