//! Second differences of the energy along linear interpolations, for a
//! certified kernel and for one that is not positive definite.
use frostman::analysis::interpolation_convexity_check;
use frostman::field::{ExternalPotential, KernelTable};
use frostman::grid::{DiscreteMeasure, GridSpec};
use frostman::kernel::Kernel;

fn bump_at(g: &GridSpec, c: f64) -> frostman::Result<DiscreteMeasure> {
    DiscreteMeasure::from_density(g, |x| (-(x[0] - c).powi(2) * 4.0).exp())
}

fn wave(g: &GridSpec, s: f64) -> frostman::Result<DiscreteMeasure> {
    DiscreteMeasure::from_density(g, |x| 1.0 + s * (std::f64::consts::PI * x[0]).cos())
}

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(1, 4.0, 128)?;
    let u = ExternalPotential::zero(&g);
    let pairs = vec![
        (bump_at(&g, -1.0)?, bump_at(&g, 1.0)?),
        // opposite phases of a wave the cosine-perturbed kernel gives negative energy
        (wave(&g, 1.0)?, wave(&g, -1.0)?),
    ];
    for (name, k) in
        [("riesz b=-0.5", Kernel::riesz(1, -0.5)?), ("cosine-perturbed", Kernel::cosine_perturbed(1, 1.0, 0.8, 0.5)?)]
    {
        let t = KernelTable::new(&k, &g)?;
        let r = interpolation_convexity_check(&t, &u, &pairs, 10)?;
        println!(
            "{name:18} strictly convex {:5}  min second difference {:+.3e}  identity error {:.1e}",
            r.strictly_convex, r.min_second_difference, r.max_identity_error
        );
    }
    Ok(())
}
