//! Interaction kernels `W`, their derivatives and asymptotic data.

mod angular;
mod certificate;
mod representation;
mod spline;

use std::io::BufRead;

use serde::{Deserialize, Serialize};

pub use angular::{legendre, AngularProfile};
pub use certificate::{check_essential_convexity, ConvexityCertificate, ExponentFit, SamplePlan, Violation};
pub use representation::{fourier_estimate, representation_reconstruct, QuadratureOptions};
pub use spline::CubicSpline;

use crate::error::{Error, Result};
use crate::quadrature::sphere_area;

/// Which `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelVariant {
    /// `−|x|^b / b`, `−d < b < 0`.
    Riesz { b: f64 },
    /// `−|x|^b / b · (1 + α ω(x̂))`.
    Anisotropic { b: f64, alpha: f64, omega: AngularProfile },
    /// `Σ A_j (−|x|^{b_j} / b_j)` with `(A_j, b_j)` pairs.
    PowerSum { terms: Vec<(f64, f64)> },
    /// Repulsive Newtonian potential with `ΔN = −δ`.
    Newtonian,
    /// `exp(−(|x|/s)²)`.
    Gaussian { scale: f64 },
    /// `exp(−|x|/s)`.
    Exponential { scale: f64 },
    /// `1 − exp(−(|x|/s)²)`: minimum 0 at the origin, `W → 1` at infinity.
    Attractive { scale: f64 },
    /// `exp(−(|x|/s)²)·(1 − a·cos(2π f |x|))`, which can have a negative
    /// Fourier region.
    CosinePerturbed { scale: f64, amplitude: f64, frequency: f64 },
    /// Radial samples `(r_i, W(r_i))` with natural cubic interpolation.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dim: usize,
    variant: KernelVariant,
    spline: Option<CubicSpline>,
}

/// Repulsive Newtonian potential as a function of the radius.
pub fn newtonian(d: usize, r: f64) -> f64 {
    match d {
        2 => -r.ln() / (2.0 * std::f64::consts::PI),
        _ => -r.powi(2 - d as i32) / ((2.0 - d as f64) * sphere_area(d)),
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Flip `x` so its first nonzero component is positive.
fn canonical(x: &[f64]) -> std::borrow::Cow<'_, [f64]> {
    match x.iter().find(|v| **v != 0.0) {
        Some(v) if *v < 0.0 => std::borrow::Cow::Owned(x.iter().map(|v| -v).collect()),
        _ => std::borrow::Cow::Borrowed(x),
    }
}

fn check_scale(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("scale must be > 0, got {s}")))
    }
}

fn check_riesz_exponent(d: usize, b: f64) -> Result<()> {
    if b > -(d as f64) && b < 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("b out of (−d,0): b = {b}, d = {d}")))
    }
}

impl Kernel {
    pub fn new(dim: usize, variant: KernelVariant) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        let mut spline = None;
        match &variant {
            KernelVariant::Riesz { b } => check_riesz_exponent(dim, *b)?,
            KernelVariant::Anisotropic { b, alpha, omega } => {
                check_riesz_exponent(dim, *b)?;
                if !(*alpha >= 0.0) {
                    return Err(Error::InvalidParameter("α must be ≥ 0".into()));
                }
                omega.validate(dim)?;
            }
            KernelVariant::PowerSum { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidParameter("power_sum needs at least one term".into()));
                }
                let cap = (2.0 - dim as f64).min(0.0);
                for (j, &(a, b)) in terms.iter().enumerate() {
                    if !(a > 0.0) {
                        return Err(Error::InvalidParameter(format!("power_sum amplitude A_{j} must be > 0")));
                    }
                    if !(b > -(dim as f64) && b < cap) {
                        return Err(Error::InvalidParameter(format!(
                            "power_sum exponent b_{j} = {b} outside (−d, min(2−d,0))"
                        )));
                    }
                    if j > 0 && !(terms[j - 1].1 < b) {
                        return Err(Error::InvalidParameter("power_sum exponents must increase strictly".into()));
                    }
                }
            }
            KernelVariant::Newtonian => {}
            KernelVariant::Gaussian { scale }
            | KernelVariant::Exponential { scale }
            | KernelVariant::Attractive { scale } => check_scale(*scale)?,
            KernelVariant::CosinePerturbed { scale, amplitude, frequency } => {
                check_scale(*scale)?;
                if !(*amplitude >= 0.0) || !(*frequency >= 0.0) {
                    return Err(Error::InvalidParameter("amplitude and frequency must be ≥ 0".into()));
                }
            }
            KernelVariant::Tabulated { radii, values } => {
                spline = Some(CubicSpline::natural(radii, values)?);
            }
        }
        Ok(Self { dim, variant, spline })
    }

    pub fn riesz(dim: usize, b: f64) -> Result<Self> {
        Self::new(dim, KernelVariant::Riesz { b })
    }

    pub fn newtonian(dim: usize) -> Self {
        Self { dim, variant: KernelVariant::Newtonian, spline: None }
    }

    pub fn power_sum(dim: usize, terms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(dim, KernelVariant::PowerSum { terms })
    }

    pub fn anisotropic(dim: usize, b: f64, alpha: f64, omega: AngularProfile) -> Result<Self> {
        Self::new(dim, KernelVariant::Anisotropic { b, alpha, omega })
    }

    pub fn gaussian(dim: usize, scale: f64) -> Result<Self> {
        Self::new(dim, KernelVariant::Gaussian { scale })
    }

    pub fn exponential(dim: usize, scale: f64) -> Result<Self> {
        Self::new(dim, KernelVariant::Exponential { scale })
    }

    pub fn attractive(dim: usize, scale: f64) -> Result<Self> {
        Self::new(dim, KernelVariant::Attractive { scale })
    }

    pub fn cosine_perturbed(dim: usize, scale: f64, amplitude: f64, frequency: f64) -> Result<Self> {
        Self::new(dim, KernelVariant::CosinePerturbed { scale, amplitude, frequency })
    }

    /// Two-column CSV `radius,value`; an optional non-numeric header is skipped.
    pub fn tabulated_from_csv<R: BufRead>(dim: usize, input: R) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (Some(r), Some(v)) = (it.next(), it.next()) else {
                return Err(Error::Parse(format!("line {}: expected radius,value", n + 1)));
            };
            match (r.parse::<f64>(), v.parse::<f64>()) {
                (Ok(r), Ok(v)) => {
                    radii.push(r);
                    values.push(v);
                }
                _ if n == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: not numeric", n + 1))),
            }
        }
        Self::new(dim, KernelVariant::Tabulated { radii, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variant(&self) -> &KernelVariant {
        &self.variant
    }

    pub fn is_radial(&self) -> bool {
        match &self.variant {
            KernelVariant::Anisotropic { alpha, omega, .. } => *alpha == 0.0 || omega.is_trivial(),
            _ => true,
        }
    }

    /// `W(0) = +∞`.
    pub fn is_singular(&self) -> bool {
        match self.variant {
            KernelVariant::Riesz { .. } | KernelVariant::Anisotropic { .. } | KernelVariant::PowerSum { .. } => true,
            KernelVariant::Newtonian => self.dim >= 2,
            _ => false,
        }
    }

    /// Tabulated kernels carry no derivative data.
    pub fn is_derivable(&self) -> bool {
        !matches!(self.variant, KernelVariant::Tabulated { .. })
    }

    /// Declared `(b_near, a_far)` for power-law variants.
    pub fn declared_exponents(&self) -> Option<(f64, f64)> {
        match &self.variant {
            KernelVariant::Riesz { b } | KernelVariant::Anisotropic { b, .. } => Some((*b, *b)),
            KernelVariant::PowerSum { terms } => Some((terms[0].1, terms[terms.len() - 1].1)),
            KernelVariant::Newtonian if self.dim >= 3 => {
                let e = 2.0 - self.dim as f64;
                Some((e, e))
            }
            _ => None,
        }
    }

    /// Whether `W` is integrable near the origin (`b_near > −d`).
    pub fn locally_integrable(&self) -> bool {
        match self.declared_exponents() {
            Some((b, _)) => b > -(self.dim as f64),
            None => true,
        }
    }

    /// `(W, W', W'')` of the radial profile at `r > 0`; `None` for
    /// anisotropic and tabulated kernels.
    pub fn radial_profile(&self, r: f64) -> Option<[f64; 3]> {
        let d = self.dim as f64;
        Some(match &self.variant {
            KernelVariant::Riesz { b } => riesz_profile(*b, r, 1.0),
            KernelVariant::Anisotropic { b, alpha, omega } if self.is_radial() => {
                let f = 1.0 + alpha * omega.constant;
                riesz_profile(*b, r, f)
            }
            KernelVariant::PowerSum { terms } => {
                let mut acc = [0.0; 3];
                for &(a, b) in terms {
                    let p = riesz_profile(b, r, a);
                    acc[0] += p[0];
                    acc[1] += p[1];
                    acc[2] += p[2];
                }
                acc
            }
            KernelVariant::Newtonian => {
                let s = sphere_area(self.dim);
                let w = newtonian(self.dim, r);
                let w1 = -r.powf(1.0 - d) / s;
                let w2 = (d - 1.0) * r.powf(-d) / s;
                [w, w1, w2]
            }
            KernelVariant::Gaussian { scale } => gaussian_profile(*scale, r),
            KernelVariant::Exponential { scale } => {
                let w = (-r / scale).exp();
                [w, -w / scale, w / (scale * scale)]
            }
            KernelVariant::Attractive { scale } => {
                let g = gaussian_profile(*scale, r);
                [1.0 - g[0], -g[1], -g[2]]
            }
            KernelVariant::CosinePerturbed { scale, amplitude, frequency } => {
                let g = gaussian_profile(*scale, r);
                let k = 2.0 * std::f64::consts::PI * frequency;
                let c =
                    [1.0 - amplitude * (k * r).cos(), amplitude * k * (k * r).sin(), amplitude * k * k * (k * r).cos()];
                [g[0] * c[0], g[1] * c[0] + g[0] * c[1], g[2] * c[0] + 2.0 * g[1] * c[1] + g[0] * c[2]]
            }
            _ => return None,
        })
    }

    /// `W` as a function of the radius, for radial kernels.
    pub fn radial_value(&self, r: f64) -> f64 {
        if let Some(sp) = &self.spline {
            return sp.eval(r);
        }
        if r == 0.0 {
            return self.value_at_origin();
        }
        self.radial_profile(r).map(|p| p[0]).expect("radial_value on a non-radial kernel")
    }

    fn value_at_origin(&self) -> f64 {
        if self.is_singular() {
            return f64::INFINITY;
        }
        match &self.variant {
            KernelVariant::Newtonian => 0.0,
            KernelVariant::Gaussian { .. } | KernelVariant::Exponential { .. } => 1.0,
            KernelVariant::Attractive { .. } => 0.0,
            KernelVariant::CosinePerturbed { amplitude, .. } => 1.0 - amplitude,
            KernelVariant::Tabulated { .. } => self.spline.as_ref().map_or(f64::NAN, |s| s.eval(0.0)),
            _ => unreachable!("singular variants handled above"),
        }
    }

    /// `W(x)`; `+∞` at the origin for singular kernels. Even in `x` bit for bit.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let x = canonical(x);
        let r = norm(&x);
        match &self.variant {
            KernelVariant::Anisotropic { b, alpha, omega } if !self.is_radial() => {
                if r == 0.0 {
                    return f64::INFINITY;
                }
                let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
                -r.powf(*b) / b * (1.0 + alpha * omega.value(self.dim, &unit))
            }
            _ => self.radial_value(r),
        }
    }

    /// `∇W(x)` for `x ≠ 0`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.is_derivable() {
            return Err(Error::InsufficientSmoothness);
        }
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::SingularPoint);
        }
        let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
        if let Some(p) = self.radial_profile(r) {
            return Ok(unit.iter().map(|u| p[1] * u).collect());
        }
        let KernelVariant::Anisotropic { b, alpha, omega } = &self.variant else {
            unreachable!("only anisotropic kernels lack a radial profile");
        };
        // W = −r^b/b · f(x̂): ∇W = −r^{b−1}(f x̂ + ∇_S f / b)
        let f = 1.0 + alpha * omega.value(self.dim, &unit);
        let tg = omega.tangential_gradient(self.dim, &unit);
        let rb = r.powf(b - 1.0);
        Ok(unit.iter().zip(&tg).map(|(u, t)| -rb * (f * u + alpha * t / b)).collect())
    }

    /// `ΔW(x)` for `x ≠ 0`.
    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        if !self.is_derivable() {
            return Err(Error::InsufficientSmoothness);
        }
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::SingularPoint);
        }
        match &self.variant {
            KernelVariant::Anisotropic { b, alpha, omega } if !self.is_radial() => {
                let d = self.dim as f64;
                let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
                let f = 1.0 + alpha * omega.value(self.dim, &unit);
                let ls = omega.sphere_laplacian(self.dim, &unit);
                Ok((-(b + d - 2.0) * f - alpha / b * ls) * r.powf(b - 2.0))
            }
            _ => self.radial_laplacian(r),
        }
    }

    /// `ΔW` of a radial kernel at radius `r > 0`.
    pub fn radial_laplacian(&self, r: f64) -> Result<f64> {
        if !self.is_derivable() {
            return Err(Error::InsufficientSmoothness);
        }
        if r == 0.0 {
            return Err(Error::SingularPoint);
        }
        let d = self.dim as f64;
        match &self.variant {
            KernelVariant::Newtonian => Ok(0.0),
            KernelVariant::Riesz { b } => Ok(-(b + d - 2.0) * r.powf(b - 2.0)),
            KernelVariant::PowerSum { terms } => {
                Ok(terms.iter().map(|&(a, b)| -a * (b + d - 2.0) * r.powf(b - 2.0)).sum())
            }
            _ => {
                let p = self.radial_profile(r).ok_or(Error::InsufficientSmoothness)?;
                Ok(p[2] + (d - 1.0) / r * p[1])
            }
        }
    }

    /// `lim_{|x|→∞} W(x)` when it exists and is finite.
    pub fn limit_at_infinity(&self) -> Option<f64> {
        match &self.variant {
            KernelVariant::Newtonian if self.dim <= 2 => None,
            KernelVariant::Attractive { .. } => Some(1.0),
            KernelVariant::Tabulated { values, .. } => values.last().copied(),
            _ => Some(0.0),
        }
    }

    /// `inf W` over `ℝ^d ∖ {0}`; `−∞` if unbounded below.
    pub fn infimum(&self) -> f64 {
        match &self.variant {
            KernelVariant::Newtonian if self.dim <= 2 => f64::NEG_INFINITY,
            KernelVariant::Attractive { .. } => 0.0,
            KernelVariant::CosinePerturbed { scale, amplitude, .. } => {
                // sample the first few oscillations; the envelope decays
                let n = 20000;
                let reach = 6.0 * scale;
                (0..=n)
                    .map(|i| self.radial_value(reach * i as f64 / n as f64))
                    .fold(0.0f64.min(1.0 - amplitude), f64::min)
            }
            KernelVariant::Tabulated { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }

    /// Smallest `α` at which the anisotropic form stops being subharmonic
    /// somewhere on the sphere, using the full Laplacian including the
    /// `(1 + αω)` factor. `None` for other variants.
    pub fn anisotropic_exact_threshold(&self) -> Option<f64> {
        let KernelVariant::Anisotropic { b, omega, .. } = &self.variant else {
            return None;
        };
        let d = self.dim as f64;
        let p = -(b + d - 2.0);
        if p <= 0.0 {
            return Some(0.0);
        }
        // ΔW ∝ p(1 + αω) − (α/b)Δ_Sω, decreasing past zero at the threshold
        let positive = |alpha: f64| omega.min_combination(self.dim, alpha, p, -alpha / b) > 0.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        while positive(hi) {
            hi *= 2.0;
            if hi > 1e12 {
                return Some(f64::INFINITY);
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if positive(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    /// Sufficient bound `−(b+d−2)·b / min Δ_S ω` on `α`.
    pub fn anisotropic_sufficient_bound(&self) -> Option<f64> {
        let KernelVariant::Anisotropic { b, omega, .. } = &self.variant else {
            return None;
        };
        let d = self.dim as f64;
        let m = omega.min_sphere_laplacian(self.dim);
        if m >= 0.0 {
            return Some(f64::INFINITY);
        }
        Some(-(b + d - 2.0) * b / m)
    }
}

fn riesz_profile(b: f64, r: f64, amp: f64) -> [f64; 3] {
    let w = -amp * r.powf(b) / b;
    let w1 = -amp * r.powf(b - 1.0);
    let w2 = -amp * (b - 1.0) * r.powf(b - 2.0);
    [w, w1, w2]
}

fn gaussian_profile(s: f64, r: f64) -> [f64; 3] {
    let s2 = s * s;
    let w = (-(r * r) / s2).exp();
    [w, -2.0 * r / s2 * w, (4.0 * r * r / (s2 * s2) - 2.0 / s2) * w]
}
