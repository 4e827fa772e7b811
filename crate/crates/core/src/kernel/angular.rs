//! Even angular profiles ω on the unit sphere with exact spherical Laplacian.
//!
//! d = 2: ω(θ) = c₀ + Σ c_k cos(kθ), Δ_S cos(kθ) = −k² cos(kθ).
//! d = 3: zonal about the last axis, ω = c₀ + Σ c_l P_l(x₃), Δ_S P_l = −l(l+1) P_l.
//! d = 1: S⁰ = {±1} and an even ω is a constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularProfile {
    #[serde(default)]
    pub constant: f64,
    /// `(order, coefficient)` pairs; orders must be even.
    #[serde(default)]
    pub terms: Vec<(u32, f64)>,
}

/// Number of samples used to check ω ≥ 0 and to locate min Δ_S ω.
const PROFILE_SAMPLES: usize = 4096;

impl AngularProfile {
    pub fn new(constant: f64, terms: Vec<(u32, f64)>) -> Self {
        Self { constant, terms }
    }

    /// `1 + cos(4θ)` in d = 2, `1 + P₂` style analogue in d = 3.
    pub fn first_even_harmonic(dim: usize) -> Self {
        match dim {
            3 => Self::new(0.5, vec![(2, 1.0)]),
            _ => Self::new(1.0, vec![(4, 1.0)]),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter("anisotropic kernels support d ∈ {1,2,3}".into()));
        }
        if let Some((k, _)) = self.terms.iter().find(|(k, _)| k % 2 != 0) {
            return Err(Error::InvalidParameter(format!("ω must be even; order {k} is odd")));
        }
        if dim == 1 && self.terms.iter().any(|(_, c)| *c != 0.0) {
            return Err(Error::InvalidParameter("in d = 1 an even ω is constant".into()));
        }
        let min = self.sampled_min(dim, |s| self.value_at(dim, s));
        if min < -1e-12 {
            return Err(Error::InvalidParameter(format!("ω must be ≥ 0 (sampled minimum {min})")));
        }
        Ok(())
    }

    /// Angular coordinate used by the series: θ in d = 2, x₃ in d = 3.
    fn coordinate(dim: usize, unit: &[f64]) -> f64 {
        match dim {
            2 => unit[1].atan2(unit[0]),
            3 => unit[2].clamp(-1.0, 1.0),
            _ => 0.0,
        }
    }

    fn value_at(&self, dim: usize, s: f64) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(k, c)| match dim {
                    2 => c * (k as f64 * s).cos(),
                    3 => c * legendre(k, s).0,
                    _ => 0.0,
                })
                .sum::<f64>()
    }

    fn laplacian_at(&self, dim: usize, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| {
                let k = k as f64;
                match dim {
                    2 => -k * k * c * (k * s).cos(),
                    3 => -k * (k + 1.0) * c * legendre(k as u32, s).0,
                    _ => 0.0,
                }
            })
            .sum()
    }

    /// Derivative of ω with respect to its series coordinate.
    fn derivative_at(&self, dim: usize, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| match dim {
                2 => -(k as f64) * c * (k as f64 * s).sin(),
                3 => c * legendre(k, s).1,
                _ => 0.0,
            })
            .sum()
    }

    /// ω at a unit vector.
    pub fn value(&self, dim: usize, unit: &[f64]) -> f64 {
        self.value_at(dim, Self::coordinate(dim, unit))
    }

    /// Δ_S ω at a unit vector.
    pub fn sphere_laplacian(&self, dim: usize, unit: &[f64]) -> f64 {
        self.laplacian_at(dim, Self::coordinate(dim, unit))
    }

    /// Tangential gradient of ω at a unit vector (a vector orthogonal to it).
    pub fn tangential_gradient(&self, dim: usize, unit: &[f64]) -> Vec<f64> {
        match dim {
            2 => {
                let f = self.derivative_at(2, Self::coordinate(2, unit));
                vec![-unit[1] * f, unit[0] * f]
            }
            3 => {
                let u = Self::coordinate(3, unit);
                let g = self.derivative_at(3, u);
                // ∇_S u = e₃ − u·x̂
                vec![-u * unit[0] * g, -u * unit[1] * g, (1.0 - u * u) * g]
            }
            _ => vec![0.0; dim],
        }
    }

    fn sampled_min<F: Fn(f64) -> f64>(&self, dim: usize, f: F) -> f64 {
        let (lo, hi) = match dim {
            2 => (-std::f64::consts::PI, std::f64::consts::PI),
            3 => (-1.0, 1.0),
            _ => return f(0.0),
        };
        (0..=PROFILE_SAMPLES)
            .map(|i| f(lo + (hi - lo) * i as f64 / PROFILE_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sampled min of Δ_S ω over the sphere.
    pub fn min_sphere_laplacian(&self, dim: usize) -> f64 {
        self.sampled_min(dim, |s| self.laplacian_at(dim, s))
    }

    /// Sampled min of `(1 + αω)·c + (α/|b|)·Δ_S ω` style combinations:
    /// returns min over the sphere of `p·(1 + αω) + q·Δ_S ω`.
    pub fn min_combination(&self, dim: usize, alpha: f64, p: f64, q: f64) -> f64 {
        self.sampled_min(dim, |s| p * (1.0 + alpha * self.value_at(dim, s)) + q * self.laplacian_at(dim, s))
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == 0.0)
    }
}

/// `(P_l(u), P_l'(u))` by the three-term recurrence.
pub fn legendre(l: u32, u: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, u);
    let (mut d0, mut d1) = (0.0, 1.0);
    for n in 1..l {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * u * p1 - nf * p0) / (nf + 1.0);
        let d2 = d0 + (2.0 * nf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(2, 0.5).0, 0.5 * (3.0 * 0.25 - 1.0));
        let (p, d) = legendre(4, 0.3);
        let u: f64 = 0.3;
        assert!((p - (35.0 * u.powi(4) - 30.0 * u * u + 3.0) / 8.0).abs() < 1e-14);
        assert!((d - (140.0 * u.powi(3) - 60.0 * u) / 8.0).abs() < 1e-13);
    }

    #[test]
    fn odd_orders_rejected() {
        assert!(AngularProfile::new(2.0, vec![(1, 1.0)]).validate(2).is_err());
        assert!(AngularProfile::new(0.0, vec![(2, 1.0)]).validate(2).is_err());
        assert!(AngularProfile::first_even_harmonic(2).validate(2).is_ok());
        assert!(AngularProfile::first_even_harmonic(3).validate(3).is_ok());
    }

    #[test]
    fn laplacian_matches_finite_difference_in_2d() {
        let w = AngularProfile::new(1.0, vec![(4, 0.7), (2, 0.2)]);
        let h = 1e-4;
        for i in 0..20 {
            let t = -3.0 + 0.3 * i as f64;
            let fd = (w.value_at(2, t + h) - 2.0 * w.value_at(2, t) + w.value_at(2, t - h)) / (h * h);
            assert!((fd - w.laplacian_at(2, t)).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn min_laplacian_of_cos4() {
        let w = AngularProfile::first_even_harmonic(2);
        assert!((w.min_sphere_laplacian(2) + 16.0).abs() < 1e-9);
    }
}
