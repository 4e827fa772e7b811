use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{generated_potential, height, ExternalPotential, KernelTable};
use crate::grid::{DiscreteMeasure, Domain};

/// One-sided residuals of the Frostman conditions at the level `C0 = ∫V dρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ELReport {
    pub c0: f64,
    /// `max_{supp ρ} (V − C0)_+`
    pub residual_support: f64,
    /// `max_D (C0 − V)_+`
    pub residual_domain: f64,
    /// `Σ w_i |V_i − C0|`
    pub rho_ae_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_euler_lagrange(
    table: &KernelTable,
    u: &ExternalPotential,
    domain: &Domain,
    m: &DiscreteMeasure,
    tol: f64,
) -> Result<ELReport> {
    table.grid().ensure_same(domain.grid())?;
    if (m.mass() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("EL check needs mass 1, got {}", m.mass())));
    }
    let v = generated_potential(table, u, m)?;
    let v = v.values();
    let w = m.weights();
    let c0: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
    let mut residual_support = 0.0f64;
    let mut rho_ae_residual = 0.0;
    for (a, b) in w.iter().zip(v) {
        if *a > 0.0 {
            residual_support = residual_support.max(b - c0);
            rho_ae_residual += a * (b - c0).abs();
        }
    }
    let residual_domain = domain.cells().into_iter().map(|i| c0 - v[i]).fold(0.0f64, f64::max);
    Ok(ELReport {
        c0,
        residual_support,
        residual_domain,
        rho_ae_residual,
        tol,
        pass: residual_support <= tol && residual_domain <= tol,
    })
}

/// Height of `m` over the interior of `domain` (cells whose whole lattice
/// neighbourhood is feasible), where boundary cells cannot spoil the minimum.
pub fn interior_height(
    table: &KernelTable,
    u: &ExternalPotential,
    domain: &Domain,
    m: &DiscreteMeasure,
) -> Result<f64> {
    let s = domain.interior();
    if s.count() == 0 {
        return Err(Error::EmptyS);
    }
    Ok(height(table, u, m, &s)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::Kernel;
    use crate::solver::{frank_wolfe_minimize, SolverConfig};

    fn line(n: usize) -> (GridSpec, KernelTable) {
        let g = GridSpec::centered_cube(1, 2.0, n).unwrap();
        let t = KernelTable::new(&Kernel::riesz(1, -0.5).unwrap(), &g).unwrap();
        (g, t)
    }

    #[test]
    fn self_balayage_has_zero_residuals() {
        let (g, t) = line(64);
        let phi = DiscreteMeasure::point_mass(&g, 32).mollify(0.5).unwrap();
        let u = ExternalPotential::balayage(&t, &phi).unwrap();
        let r = verify_euler_lagrange(&t, &u, &Domain::full(&g), &phi, 1e-12).unwrap();
        assert!(r.c0.abs() < 1e-14 && r.residual_support < 1e-14 && r.residual_domain < 1e-14);
        assert!(r.pass);
    }

    #[test]
    fn solver_output_passes_and_perturbation_fails() {
        let (g, t) = line(128);
        let u = ExternalPotential::bump_well(&g, 2.0, 1.0, &[0.0]).unwrap();
        let d = Domain::full(&g);
        let (m, tr) = frank_wolfe_minimize(&t, &u, &d, &SolverConfig::default()).unwrap();
        assert!(tr.converged());
        let r = verify_euler_lagrange(&t, &u, &d, &m, 0.0).unwrap();
        let tol = 1e-3 * r.c0.abs();
        let r = verify_euler_lagrange(&t, &u, &d, &m, tol).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(interior_height(&t, &u, &d, &m).unwrap() >= r.c0 - tol);

        // move 10% of the mass to the outermost cell
        let mut w = m.weights().iter().map(|v| 0.9 * v).collect::<Vec<_>>();
        w[0] += 0.1;
        let bad = DiscreteMeasure::new(&g, w).unwrap();
        let r = verify_euler_lagrange(&t, &u, &d, &bad, tol).unwrap();
        assert!(!r.pass && r.residual_support > tol);
    }

    #[test]
    fn residuals_are_nonnegative_for_arbitrary_measures() {
        let (g, t) = line(32);
        let u = ExternalPotential::zero(&g);
        let m = DiscreteMeasure::uniform(&Domain::full(&g));
        let r = verify_euler_lagrange(&t, &u, &Domain::full(&g), &m, 1e-6).unwrap();
        assert!(r.residual_support >= 0.0 && r.residual_domain >= 0.0 && r.rho_ae_residual >= 0.0);
    }
}
