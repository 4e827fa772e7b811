use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{energy, ExternalPotential, KernelTable};
use crate::grid::DiscreteMeasure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConvexity {
    /// Smallest centered second difference of `t ↦ E[(1−t)ρ₀ + tρ₁]`.
    pub min_second_difference: f64,
    /// `2E_W[ρ₁ − ρ₀]·Δt²`, the exact second difference of the quadratic.
    pub quadratic: f64,
    /// Largest `|second difference − quadratic|` over interior `t`.
    pub identity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub steps: usize,
    pub pairs: Vec<PairConvexity>,
    pub min_second_difference: f64,
    pub max_identity_error: f64,
    /// Every second difference was strictly positive.
    pub strictly_convex: bool,
}

/// Second differences of the energy along linear interpolations, sampled at
/// `t = j/steps`. The potential term is linear in `t` and only contributes
/// rounding.
pub fn interpolation_convexity_check(
    table: &KernelTable,
    u: &ExternalPotential,
    pairs: &[(DiscreteMeasure, DiscreteMeasure)],
    steps: usize,
) -> Result<ConvexityReport> {
    if steps < 2 {
        return Err(Error::InvalidParameter("need at least 2 interpolation steps".into()));
    }
    let dt = 1.0 / steps as f64;
    let mut out = Vec::with_capacity(pairs.len());
    for (r0, r1) in pairs {
        if r0.l1_distance(r1)? == 0.0 {
            return Err(Error::DegenerateInterpolation);
        }
        let e: Vec<f64> =
            (0..=steps).map(|j| energy(table, u, &r0.interpolate(r1, j as f64 * dt)?)).collect::<Result<_>>()?;
        let diff: Vec<f64> = r1.weights().iter().zip(r0.weights()).map(|(a, b)| a - b).collect();
        let quadratic = table.bilinear(&diff, &diff) * dt * dt;
        let mut min_sd = f64::INFINITY;
        let mut err = 0.0f64;
        for j in 1..steps {
            let sd = e[j - 1] - 2.0 * e[j] + e[j + 1];
            min_sd = min_sd.min(sd);
            err = err.max((sd - quadratic).abs());
        }
        out.push(PairConvexity { min_second_difference: min_sd, quadratic, identity_error: err });
    }
    let min_second_difference = out.iter().map(|p| p.min_second_difference).fold(f64::INFINITY, f64::min);
    let max_identity_error = out.iter().map(|p| p.identity_error).fold(0.0, f64::max);
    Ok(ConvexityReport {
        steps,
        strictly_convex: min_second_difference > 0.0,
        pairs: out,
        min_second_difference,
        max_identity_error,
    })
}
