//! `t ↦ (W*φ_t)(x)` for the dilated mollifier `φ_t = t^{−d}φ(·/t)`, and its
//! derivative written as a ball average of ΔW.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::bump;
use crate::kernel::Kernel;
use crate::quadrature::{integrate, integrate_split, sphere_area};

const REL: f64 = 1e-10;
const SEGMENTS: usize = 4000;

/// Radial profile of the unit-mass bump on `B(0;1)` in dimension `d`.
pub fn bump_profile(d: usize) -> impl Fn(f64) -> f64 {
    let raw = integrate(|r| bump(r) * r.powi(d as i32 - 1), 0.0, 1.0, 1e-13, 0.0, 200).value;
    let c = 1.0 / (sphere_area(d) * raw);
    move |r| c * bump(r)
}

/// `∫_{S^{d−1}} f(|x − a u|) dS(u)` with `|x| = rx`.
fn sphere_integral<F: Fn(f64) -> f64>(d: usize, rx: f64, a: f64, f: F) -> f64 {
    if d == 1 {
        return f((rx - a).abs()) + f(rx + a);
    }
    if rx == 0.0 || a == 0.0 {
        return sphere_area(d) * f(rx.max(a));
    }
    let g = |th: f64| {
        let rho = (rx * rx + a * a - 2.0 * a * rx * th.cos()).max(0.0).sqrt();
        f(rho) * th.sin().powi(d as i32 - 2)
    };
    sphere_area(d - 1) * integrate(g, 0.0, PI, REL, 1e-300, SEGMENTS).value
}

/// Measure of `{u ∈ S^{d−1} : |x + ρu| < s}`.
fn cap_measure(d: usize, rx: f64, rho: f64, s: f64) -> f64 {
    if rx == 0.0 || rho == 0.0 {
        return if rx.max(rho) < s { sphere_area(d) } else { 0.0 };
    }
    if d == 1 {
        return [rx + rho, (rx - rho).abs()].iter().filter(|v| **v < s).count() as f64;
    }
    let c = ((s * s - rx * rx - rho * rho) / (2.0 * rho * rx)).clamp(-1.0, 1.0);
    let th0 = c.acos();
    match d {
        2 => 2.0 * (PI - th0),
        3 => 2.0 * PI * (1.0 + c),
        _ => sphere_area(d - 1) * integrate(|t| t.sin().powi(d as i32 - 2), th0, PI, 1e-12, 0.0, 200).value,
    }
}

fn radial_only(k: &Kernel) -> Result<()> {
    if k.is_radial() && k.is_derivable() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("scale flow is implemented for analytic radial kernels".into()))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `(W*φ_t)(x) = ∫_0^1 φ(r) r^{d−1} ∫_{S^{d−1}} W(x − t r u) dS(u) dr`.
pub fn scaled_convolution(k: &Kernel, x: &[f64], t: f64, phi: &dyn Fn(f64) -> f64) -> Result<f64> {
    radial_only(k)?;
    if x.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: x.len() });
    }
    let d = k.dim();
    let rx = norm(x);
    let f = |r: f64| phi(r) * r.powi(d as i32 - 1) * sphere_integral(d, rx, t * r, |rho| k.radial_value(rho));
    Ok(integrate_split(f, 0.0, 1.0, &[rx / t], REL, 1e-300, SEGMENTS).value)
}

/// `d/dt (W*φ_t)(x)` for `t > 0` and a radial profile `φ` supported in
/// `[0,1]` with unit mass.
///
/// Computed as `∫_0^1 ∫_{B(0;1)} ΔW(x − t r z) dz · φ(r) t r^{d+1} dr` when
/// ΔW is integrable near the origin. Otherwise (near exponent `≤ 2 − d`)
/// the ball form hides a distributional term, and a central difference of [`scaled_convolution`] at `δ = 10⁻³` is returned instead.
pub fn scale_flow_derivative(k: &Kernel, x: &[f64], t: f64, phi: &dyn Fn(f64) -> f64) -> Result<f64> {
    radial_only(k)?;
    if x.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: x.len() });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let d = k.dim();
    let rx = norm(x);
    let lap_integrable = k.declared_exponents().is_none_or(|(b, _)| b + d as f64 - 2.0 > 0.0);
    if !lap_integrable {
        let delta = 1e-3;
        let hi = scaled_convolution(k, x, t + delta, phi)?;
        let lo = scaled_convolution(k, x, t - delta, phi)?;
        return Ok((hi - lo) / (2.0 * delta));
    }
    let lap = |rho: f64| k.radial_laplacian(rho).unwrap_or(0.0);
    // ∫_{B(0;1)} ΔW(x − s z) dz = s^{−d} ∫_{B(0;s)} ΔW(x − y) dy
    let ball = |s: f64| -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let g = |rho: f64| lap(rho) * rho.powi(d as i32 - 1) * cap_measure(d, rx, rho, s);
        let v = integrate_split(g, 0.0, rx + s, &[(rx - s).abs()], REL, 1e-300, SEGMENTS).value;
        v / s.powi(d as i32)
    };
    let f = |r: f64| ball(t * r) * phi(r) * t * r.powi(d as i32 + 1);
    Ok(integrate_split(f, 0.0, 1.0, &[rx / t], REL, 1e-300, SEGMENTS).value)
}
