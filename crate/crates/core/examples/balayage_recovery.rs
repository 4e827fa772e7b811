//! With `U = −W*φ` the minimizer is `φ` itself; Frank–Wolfe finds it and the
//! Euler–Lagrange report certifies it.
use frostman::analysis::verify_euler_lagrange;
use frostman::config::centered_bump;
use frostman::field::{height, ExternalPotential, KernelTable};
use frostman::grid::{Domain, GridSpec};
use frostman::kernel::Kernel;
use frostman::solver::{frank_wolfe_minimize, SolverConfig};

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(1, 2.0, 256)?;
    let t = KernelTable::new(&Kernel::riesz(1, -0.5)?, &g)?;
    let phi = centered_bump(&g, 0.5)?;
    let u = ExternalPotential::balayage(&t, &phi)?;
    let d = Domain::full(&g);

    let (m, trace) = frank_wolfe_minimize(&t, &u, &d, &SolverConfig::default())?;
    let c0 = verify_euler_lagrange(&t, &u, &d, &m, 0.0)?.c0;
    let el = verify_euler_lagrange(&t, &u, &d, &m, 1e-3 * c0.abs() + 1e-9)?;
    let (h, _) = height(&t, &u, &m, &d)?;
    println!("{:?} after {} iterations (polished: {})", trace.status, trace.records.len(), trace.polished);
    println!("L1 to phi   {:.3e}", m.l1_distance(&phi)?);
    println!("C0          {:.3e}", el.c0);
    println!("EL pass     {} (support {:.2e}, domain {:.2e})", el.pass, el.residual_support, el.residual_domain);
    println!("height      {h:.3e}");
    Ok(())
}
