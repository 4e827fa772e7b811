//! Existence probe on a half-line next to the whole line.
use frostman::analysis::{existence_probe, ProbeOptions};
use frostman::config::centered_bump;
use frostman::field::{ExternalPotential, KernelTable};
use frostman::grid::{Domain, DomainKind, GridSpec};
use frostman::kernel::Kernel;

fn main() -> frostman::Result<()> {
    let g = GridSpec::centered_cube(1, 4.0, 128)?;
    let k = Kernel::riesz(1, -0.5)?;
    let t = KernelTable::new(&k, &g)?;
    let omega = centered_bump(&g, 0.5)?.scaled(2.0)?;
    let u = ExternalPotential::balayage(&t, &omega)?;
    let opts = ProbeOptions::default();
    for kind in [DomainKind::FullSpace, DomainKind::HalfLine { x0: -1.0 }] {
        let d = Domain::new(kind.clone(), &g)?;
        let r = existence_probe(&k, &t, &u, &d, None, &opts)?;
        println!("{kind:?}: {:?}, margin {:.3}", r.verdict, r.margin);
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
