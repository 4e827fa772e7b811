//! The height maximizer and the energy minimizer sit at the same level.
use frostman::analysis::{interior_height, verify_euler_lagrange};
use frostman::field::{height, ExternalPotential, KernelTable};
use frostman::grid::{Domain, GridSpec};
use frostman::kernel::Kernel;
use frostman::solver::{frank_wolfe_minimize, height_ascent, SolverConfig};

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(1, 4.0, 256)?;
    let t = KernelTable::new(&Kernel::riesz(1, -0.5)?, &g)?;
    let u = ExternalPotential::bump_well(&g, 6.0, 1.2, &[0.2])?;
    let d = Domain::full(&g);
    let cfg = SolverConfig::default();

    let (m, _) = frank_wolfe_minimize(&t, &u, &d, &cfg)?;
    let c0 = verify_euler_lagrange(&t, &u, &d, &m, 0.0)?.c0;
    println!("minimizer: C0 = {c0:.6}, interior height = {:.6}", interior_height(&t, &u, &d, &m)?);

    let (hm, trace) = height_ascent(&t, &u, &d, &cfg)?;
    let (h, _) = height(&t, &u, &hm, &d)?;
    println!(
        "height ascent: H = {h:.6} after {} steps, L1 to minimizer {:.3}",
        trace.records.len(),
        hm.l1_distance(&m)?
    );
    Ok(())
}
