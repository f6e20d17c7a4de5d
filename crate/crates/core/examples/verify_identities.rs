//! The discrete Hilbert-Schmidt identity on random potentials and the weight integral bound
//! across the three regimes of (α1, α2).

use hartree_core::spectral::{SpaceTimeField, TimeGrid, TorusGrid, C64};
use hartree_core::verify::{default_probe, hs_identity_check, weight_integral, weight_sum_bound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> hartree_core::Result<()> {
    let grid = TorusGrid::new(1, 16, 7.0)?;
    let time = TimeGrid::new(0.05, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..3 {
        let mut v = SpaceTimeField::zeros(&grid, time);
        for x in v.data.iter_mut() {
            *x = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let h = hs_identity_check(&v, 0.3, 0.8);
        println!("lhs {:.12e}  rhs {:.12e}  rel {:.1e}", h.lhs, h.rhs, h.rel_err);
    }

    for (a1, a2) in [(0.6, 0.6), (1.0, 0.4), (1.5, 1.5)] {
        let r = weight_sum_bound(3, a1, a2, &default_probe())?;
        println!("d = 3, α = ({a1}, {a2}): regime {:?}, α0 = {:.3}, C = {:.4}", r.regime, r.alpha0, r.constant);
    }
    match weight_integral(3, 0.5, 0.5, 2.0, 1.0) {
        Ok(v) => println!("threshold integral {v}"),
        Err(e) => println!("threshold α1 + α2 = 1: {e}"),
    }
    Ok(())
}
