//! Truncate-and-rescale a Gaussian profile and watch the energy converge.
use frostman::analysis::truncation_probe;
use frostman::field::{ExternalPotential, KernelTable};
use frostman::grid::{DiscreteMeasure, GridSpec};
use frostman::kernel::Kernel;

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(1, 8.0, 256)?;
    let t = KernelTable::new(&Kernel::riesz(1, -0.5)?, &g)?;
    let u = ExternalPotential::bump_well(&g, 1.0, 1.0, &[0.0])?;
    let m = DiscreteMeasure::from_density(&g, |x| (-x[0] * x[0]).exp())?;
    let r = truncation_probe(&t, &u, &m, &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0], 1e-3)?;
    println!("E = {:.6}, verdict {:?}, margin {:.2e}", r.scalars["energy"], r.verdict, r.margin);
    for d in &r.diagnostics {
        println!("  R = {:3}  E_R = {:.6}  mass outside = {:.2e}", d.r, d.energy, d.boundary_mass);
    }
    Ok(())
}
