//! Escaping-mass signature for a superharmonic Riesz kernel, next to the
//! subharmonic control. Takes a few minutes in release mode.
use frostman::analysis::{ball_sweep, nonexistence_scenario, ProbeOptions};
use frostman::field::{ExternalPotential, KernelTable};
use frostman::grid::{bump, DiscreteMeasure, GridSpec};
use frostman::kernel::Kernel;

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(3, 4.25, 32)?;
    let phi = DiscreteMeasure::from_density(&g, |x| bump(x.iter().map(|v| v * v).sum::<f64>().sqrt()))?;
    let radii = [2.0, 3.0, 4.0];
    let opts = ProbeOptions::default();

    let k = Kernel::riesz(3, -0.5)?;
    let t = KernelTable::new(&k, &g)?;
    let t0 = std::time::Instant::now();
    let rep = nonexistence_scenario(&k, &t, 0.9, &phi, &radii, &opts)?;
    println!("b = -0.5: verdict {:?} ({:.1?})", rep.verdict, t0.elapsed());
    for d in &rep.diagnostics {
        println!("  R = {}  E = {:.8}  boundary mass = {:.4}", d.r, d.energy, d.boundary_mass);
    }

    let k = Kernel::riesz(3, -2.0)?;
    let t = KernelTable::new(&k, &g)?;
    let u = ExternalPotential::balayage(&t, &phi.scaled(0.9)?)?;
    let t0 = std::time::Instant::now();
    println!("b = -2 control ({:.1?} to start)", t0.elapsed());
    for (d, _) in ball_sweep(&t, &u, &radii, &opts.solver)? {
        println!("  R = {}  E = {:.8}  boundary mass = {:.4}", d.r, d.energy, d.boundary_mass);
    }
    println!("control done in {:.1?}", t0.elapsed());
    Ok(())
}
