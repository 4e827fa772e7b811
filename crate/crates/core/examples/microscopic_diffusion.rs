//! Spreading local mass over a small ball raises the potential far away
//! when the kernel is subharmonic.
use frostman::field::KernelTable;
use frostman::grid::{DiscreteMeasure, Domain, GridSpec};
use frostman::kernel::Kernel;
use frostman::solver::microscopic_diffusion;

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(2, 4.0, 48)?;
    let t = KernelTable::new(&Kernel::riesz(2, -1.0)?, &g)?;
    let m = DiscreteMeasure::from_density(&g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp())?;
    let x = g.flat_index(&[24, 24]);
    for cells in [2.0, 3.0, 4.0] {
        let delta = cells * g.spacing();
        let (_, rep) = microscopic_diffusion(&t, &Domain::full(&g), &m, x, delta)?;
        println!("delta = {delta:.3}  sigma mass {:.4}  min far field {:.3e}", rep.sigma_mass, rep.min_far_field);
    }
    Ok(())
}
