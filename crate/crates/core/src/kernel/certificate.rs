//! Sampled certification of essential convexity: positivity of ΔW, power-law
//! fits near the origin and at infinity, and W ≥ 0 spot checks.

use serde::{Deserialize, Serialize};

use super::Kernel;
use crate::error::{Error, Result};
use crate::quadrature::sphere_nodes;

/// Where and how densely to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub shells: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub angular: usize,
    pub near_window: (f64, f64),
    pub far_window: (f64, f64),
    /// Cap on the number of recorded violation witnesses.
    pub max_violations: usize,
}

impl SamplePlan {
    pub fn for_dim(d: usize) -> Self {
        Self {
            shells: 64,
            r_min: 1e-3,
            r_max: 1e3,
            angular: match d {
                1 => 2,
                2 => 48,
                _ => 192,
            },
            near_window: (1e-3, 1e-1),
            far_window: (10.0, 1e3),
            max_violations: 32,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        (0..self.shells).map(|i| (a + (b - a) * i as f64 / (self.shells - 1) as f64).exp()).collect()
    }

    /// Unit directions: quadrature nodes plus the signed axes, and in d = 2
    /// an equispaced set that includes θ = 0.
    pub fn directions(&self, d: usize) -> Vec<Vec<f64>> {
        let mut dirs = match d {
            2 => (0..self.angular)
                .map(|j| {
                    let t = 2.0 * std::f64::consts::PI * j as f64 / self.angular as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            _ => sphere_nodes(d, self.angular),
        };
        for a in 0..d {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; d];
                e[a] = s;
                dirs.push(e);
            }
        }
        dirs
    }
}

/// Least-squares slope of `log|f|` against `log r` on one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub quantity: String,
    pub window: String,
    pub slope: f64,
    /// The slope shifted back to the exponent of W (slope + order of derivative).
    pub exponent: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Vec<f64>,
    pub laplacian: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub is_essentially_convex: bool,
    pub min_laplacian_samples: f64,
    pub b_near: f64,
    pub a_far: f64,
    pub fits: Vec<ExponentFit>,
    pub nonnegative: bool,
    pub violations: Vec<Violation>,
}

fn fit_slope(samples: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|(_, v)| *v > 0.0 && v.is_finite()).map(|(r, v)| (r.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::INFINITY);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let res = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, res)
}

pub fn check_essential_convexity(k: &Kernel, plan: &SamplePlan) -> Result<ConvexityCertificate> {
    if !k.is_derivable() {
        return Err(Error::InsufficientSmoothness);
    }
    let d = k.dim();
    let dirs = plan.directions(d);
    let mut min_lap = f64::INFINITY;
    let mut nonnegative = true;
    let mut violations = Vec::new();
    // per radius: max over directions of |W|, |∇W|, |ΔW|
    let mut envelopes: Vec<[f64; 4]> = Vec::with_capacity(plan.shells);
    for r in plan.radii() {
        let mut env = [r, 0.0, 0.0, 0.0];
        for u in &dirs {
            let x: Vec<f64> = u.iter().map(|c| c * r).collect();
            let w = k.evaluate(&x);
            let g = k.gradient(&x)?;
            let l = k.laplacian(&x)?;
            min_lap = min_lap.min(l);
            if w < 0.0 {
                nonnegative = false;
            }
            if (l <= 0.0 || w < 0.0) && violations.len() < plan.max_violations {
                violations.push(Violation { point: x, laplacian: l, value: w });
            }
            env[1] = env[1].max(w.abs());
            env[2] = env[2].max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
            env[3] = env[3].max(l.abs());
        }
        envelopes.push(env);
    }

    let mut fits = Vec::new();
    for (wname, (lo, hi)) in [("near", plan.near_window), ("far", plan.far_window)] {
        let window: Vec<&[f64; 4]> =
            envelopes.iter().filter(|e| e[0] >= lo * (1.0 - 1e-9) && e[0] <= hi * (1.0 + 1e-9)).collect();
        for (q, (qname, order)) in [("W", 0.0), ("grad", 1.0), ("laplacian", 2.0)].into_iter().enumerate() {
            let samples: Vec<(f64, f64)> = window.iter().map(|e| (e[0], e[q + 1])).collect();
            let (slope, residual) = fit_slope(&samples);
            fits.push(ExponentFit {
                quantity: qname.to_string(),
                window: wname.to_string(),
                slope,
                exponent: slope + order,
                residual,
            });
        }
    }
    let b_near = fits[0].exponent;
    let a_far = fits[3].exponent;
    let upper = (2.0 - d as f64).min(0.0);
    let in_range = fits.iter().all(|f| f.exponent > -(d as f64) && f.exponent < upper);
    Ok(ConvexityCertificate {
        is_essentially_convex: min_lap > 0.0 && in_range && nonnegative,
        min_laplacian_samples: min_lap,
        b_near,
        a_far,
        fits,
        nonnegative,
        violations,
    })
}

impl Kernel {
    /// Certificate under the default plan for this dimension.
    pub fn certificate(&self) -> Result<ConvexityCertificate> {
        check_essential_convexity(self, &SamplePlan::for_dim(self.dim()))
    }

    pub fn is_certified(&self) -> bool {
        self.certificate().map(|c| c.is_essentially_convex).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::super::AngularProfile;
    use super::*;

    #[test]
    fn riesz_minus_two_in_3d_is_certified() {
        let c = Kernel::riesz(3, -2.0).unwrap().certificate().unwrap();
        assert!(c.is_essentially_convex);
        assert!((c.b_near + 2.0).abs() <= 0.02 && (c.a_far + 2.0).abs() <= 0.02);
        assert!(c.min_laplacian_samples > 0.0);
    }

    #[test]
    fn superharmonic_riesz_is_refuted_with_witnesses() {
        let c = Kernel::riesz(3, -0.5).unwrap().certificate().unwrap();
        assert!(!c.is_essentially_convex);
        assert!(!c.violations.is_empty());
        assert!(c.violations.iter().all(|v| v.laplacian < 0.0));
    }

    #[test]
    fn power_sum_is_certified() {
        assert!(Kernel::power_sum(3, vec![(1.0, -2.5), (1.0, -2.2)]).unwrap().is_certified());
    }

    #[test]
    fn bounded_and_newtonian_kernels_are_not() {
        assert!(!Kernel::gaussian(3, 1.0).unwrap().is_certified());
        assert!(!Kernel::exponential(1, 1.0).unwrap().is_certified());
        assert!(!Kernel::newtonian(3).is_certified());
    }

    #[test]
    fn anisotropic_threshold_is_respected() {
        let omega = AngularProfile::first_even_harmonic(2);
        let base = Kernel::anisotropic(2, -1.5, 0.0, omega.clone()).unwrap();
        let suff = base.anisotropic_sufficient_bound().unwrap();
        let exact = base.anisotropic_exact_threshold().unwrap();
        let below = Kernel::anisotropic(2, -1.5, 0.9 * suff, omega.clone()).unwrap();
        let above = Kernel::anisotropic(2, -1.5, 1.1 * exact, omega).unwrap();
        assert!(below.is_certified());
        assert!(!above.is_certified());
    }

    #[test]
    fn tabulated_has_no_certificate() {
        let k = Kernel::tabulated_from_csv(1, "0,1\n1,0.5\n2,0.2\n".as_bytes()).unwrap();
        assert!(matches!(k.certificate(), Err(Error::InsufficientSmoothness)));
    }
}
