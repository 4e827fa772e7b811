//! Essential-convexity certificates for a few kernels.
use frostman::kernel::{AngularProfile, Kernel};

fn main() -> frostman::Result<()> {
    let kernels = [
        ("riesz d=1 b=-0.5", Kernel::riesz(1, -0.5)?),
        ("riesz d=3 b=-2 (Newtonian)", Kernel::riesz(3, -2.0)?),
        ("riesz d=3 b=-0.5", Kernel::riesz(3, -0.5)?),
        ("anisotropic d=2 b=-1 alpha=0.2", Kernel::anisotropic(2, -1.0, 0.2, AngularProfile::first_even_harmonic(2))?),
        ("gaussian d=1", Kernel::gaussian(1, 1.0)?),
    ];
    for (name, k) in &kernels {
        let c = k.certificate()?;
        println!(
            "{name:32} certified {:5}  min ΔW sample {:+.3e}  b_near {:+.3}  a_far {:+.3}",
            c.is_essentially_convex, c.min_laplacian_samples, c.b_near, c.a_far
        );
        for v in c.violations.iter().take(2) {
            println!("    {v:?}");
        }
    }
    Ok(())
}
