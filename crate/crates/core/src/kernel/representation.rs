//! Reconstruction of W from ΔW against the Newtonian potential, and the
//! matching Fourier-side estimate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{newtonian, Kernel};
use crate::error::{Error, Result};
use crate::quadrature::{bessel_j0, integrate, integrate_split, sphere_area, sphere_nodes};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub max_segments: usize,
    /// Angular nodes for non-radial kernels (0 = 48 in d = 2, 192 in d = 3).
    pub angular_nodes: usize,
    /// Skip the certificate check (callers that already hold one).
    pub assume_certified: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6, max_segments: 2000, angular_nodes: 0, assume_certified: false }
    }
}

fn nodes_for(d: usize, opts: &QuadratureOptions) -> Vec<Vec<f64>> {
    let n = match (opts.angular_nodes, d) {
        (0, 2) => 48,
        (0, _) => 192,
        (n, _) => n,
    };
    sphere_nodes(d, n)
}

fn require_certified(k: &Kernel, opts: &QuadratureOptions) -> Result<()> {
    if opts.assume_certified || k.is_certified() {
        Ok(())
    } else {
        Err(Error::RepresentationRequiresConvexity)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `∫_a^b f(s) ds` computed in the variable `u = ln s`, split per decade.
fn log_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> (f64, bool) {
    if !(b > a) {
        return (0.0, true);
    }
    let (la, lb) = (a.ln(), b.ln());
    let breaks: Vec<f64> = ((la / std::f64::consts::LN_10).ceil() as i64
        ..=(lb / std::f64::consts::LN_10).floor() as i64)
        .map(|k| k as f64 * std::f64::consts::LN_10)
        .collect();
    let g = |u: f64| {
        let s = u.exp();
        f(s) * s
    };
    let r = integrate_split(g, la, lb, &breaks, opts.rel_tol, 0.0, opts.max_segments);
    (r.value, r.converged)
}

/// `W_{ε,R}(x) = ∫_{ε≤|y|≤R} (N(x) − ½N(x−y) − ½N(x+y)) ΔW(y) dy`.
///
/// Radial kernels use the shell-averaged form
/// `|S^{d−1}| ∫_ε^R (N(x) − N(s))_+ s^{d−1} ΔW(s) ds`; anisotropic kernels
/// use a tensor rule (adaptive in `s`, fixed nodes on the sphere).
pub fn representation_reconstruct(
    k: &Kernel,
    x: &[f64],
    eps: f64,
    r_max: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    let d = k.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let rx = norm(x);
    if !(eps > 0.0 && eps < rx && rx < r_max) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < |x| < R, got eps={eps}, |x|={rx}, R={r_max}")));
    }
    require_certified(k, opts)?;
    let nx = newtonian(d, rx);
    let area = sphere_area(d);
    if k.is_radial() {
        let f = |s: f64| {
            let gap = nx - newtonian(d, s);
            if gap <= 0.0 {
                return 0.0;
            }
            area * gap * s.powi(d as i32 - 1) * k.radial_laplacian(s).unwrap_or(0.0)
        };
        let (inner, _) = log_integral(f, eps, rx, opts);
        let (outer, _) = log_integral(f, rx, r_max, opts);
        return Ok(inner + outer);
    }
    let nodes = nodes_for(d, opts);
    let wgt = area / nodes.len() as f64;
    let f = |s: f64| {
        let mut acc = 0.0;
        let mut ym = vec![0.0; d];
        let mut yp = vec![0.0; d];
        let mut y = vec![0.0; d];
        for th in &nodes {
            for a in 0..d {
                y[a] = s * th[a];
                ym[a] = x[a] - y[a];
                yp[a] = x[a] + y[a];
            }
            let (rm, rp) = (norm(&ym), norm(&yp));
            if rm == 0.0 || rp == 0.0 {
                continue;
            }
            let kern = nx - 0.5 * newtonian(d, rm) - 0.5 * newtonian(d, rp);
            acc += kern * k.laplacian(&y).unwrap_or(0.0);
        }
        wgt * acc * s.powi(d as i32 - 1)
    };
    let (inner, _) = log_integral(f, eps, rx, opts);
    let (outer, _) = log_integral(f, rx, r_max, opts);
    Ok(inner + outer)
}

/// `(1/4π²) ∫_{ε≤|y|≤R} |ξ|^{−2} (1 − cos(2π y·ξ)) ΔW(y) dy`.
pub fn fourier_estimate(k: &Kernel, xi: &[f64], eps: f64, r_max: f64, opts: &QuadratureOptions) -> Result<f64> {
    let d = k.dim();
    if xi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: xi.len() });
    }
    let q = norm(xi);
    if q == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    if !(eps > 0.0 && eps < r_max) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < R, got eps={eps}, R={r_max}")));
    }
    require_certified(k, opts)?;
    let shell: Box<dyn Fn(f64) -> f64 + '_> = if k.is_radial() {
        Box::new(move |s: f64| {
            let t = 2.0 * PI * s * q;
            let ang = match d {
                1 => 2.0 * (1.0 - t.cos()),
                2 => 2.0 * PI * s * (1.0 - bessel_j0(t)),
                3 => {
                    let sinc = if t < 1e-4 { 1.0 - t * t / 6.0 } else { t.sin() / t };
                    4.0 * PI * s * s * (1.0 - sinc)
                }
                _ => {
                    let nodes = sphere_nodes(d, 0);
                    let w = sphere_area(d) / nodes.len() as f64;
                    nodes.iter().map(|th| w * (1.0 - (2.0 * PI * s * th[0] * q).cos())).sum::<f64>()
                        * s.powi(d as i32 - 1)
                }
            };
            ang * k.radial_laplacian(s).unwrap_or(0.0)
        })
    } else {
        let nodes = nodes_for(d, opts);
        let w = sphere_area(d) / nodes.len() as f64;
        Box::new(move |s: f64| {
            let mut acc = 0.0;
            let mut y = vec![0.0; d];
            for th in &nodes {
                let mut dot = 0.0;
                for a in 0..d {
                    y[a] = s * th[a];
                    dot += y[a] * xi[a];
                }
                acc += (1.0 - (2.0 * PI * dot).cos()) * k.laplacian(&y).unwrap_or(0.0);
            }
            w * acc * s.powi(d as i32 - 1)
        })
    };
    // non-oscillatory core in log variables, then one period at a time
    let period = 1.0 / q;
    let knee = period.min(r_max).max(eps);
    let (core, _) = log_integral(&shell, eps, knee, opts);
    let mut tail = 0.0;
    if r_max > knee {
        let chunks = ((r_max - knee) / period).ceil().min(200_000.0) as usize;
        let width = (r_max - knee) / chunks as f64;
        let abs_tol = 1e-3 * opts.rel_tol * core.abs() / chunks as f64;
        for c in 0..chunks {
            let a = knee + c as f64 * width;
            let b = if c + 1 == chunks { r_max } else { a + width };
            tail += integrate(&shell, a, b, opts.rel_tol, abs_tol, 200).value;
        }
    }
    Ok((core + tail) / (4.0 * PI * PI * q * q))
}

#[cfg(test)]
mod tests {
    use super::super::AngularProfile;
    use super::*;

    #[test]
    fn riesz_3d_reconstruction_within_two_percent() {
        let k = Kernel::riesz(3, -2.0).unwrap();
        for &r in &[0.5, 1.0, 2.0] {
            let v = representation_reconstruct(&k, &[r, 0.0, 0.0], 1e-3, 1e3, &QuadratureOptions::default()).unwrap();
            let exact = 0.5 / (r * r);
            assert!((v - exact).abs() / exact < 0.02, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn finite_window_matches_closed_form_truncation() {
        // for b = −2, d = 3 the radial integral is 1/(2r²) − 1/(rR) + 1/(2R²)
        let k = Kernel::riesz(3, -2.0).unwrap();
        let (r, big) = (1.5, 50.0);
        let v = representation_reconstruct(&k, &[0.0, r, 0.0], 1e-2, big, &QuadratureOptions::default()).unwrap();
        let exact = 0.5 / (r * r) - 1.0 / (r * big) + 0.5 / (big * big);
        assert!((v - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn power_sum_reconstruction() {
        let k = Kernel::power_sum(3, vec![(1.0, -2.5), (1.0, -2.2)]).unwrap();
        let x = [2.0, 0.0, 0.0];
        let v = representation_reconstruct(&k, &x, 1e-3, 1e3, &QuadratureOptions::default()).unwrap();
        let exact = k.evaluate(&x);
        assert!((v - exact).abs() / exact < 0.02, "{v} vs {exact}");
    }

    #[test]
    fn anisotropic_reconstruction_is_close() {
        let omega = AngularProfile::first_even_harmonic(2);
        let k = Kernel::anisotropic(2, -1.5, 0.05, omega).unwrap();
        let x = [0.8, 0.6];
        let v = representation_reconstruct(&k, &x, 1e-3, 1e3, &QuadratureOptions::default()).unwrap();
        let exact = k.evaluate(&x);
        assert!((v - exact).abs() / exact < 0.05, "{v} vs {exact}");
    }

    #[test]
    fn non_certified_kernels_are_rejected() {
        let k = Kernel::riesz(3, -0.5).unwrap();
        assert!(matches!(
            representation_reconstruct(&k, &[1.0, 0.0, 0.0], 1e-3, 1e3, &QuadratureOptions::default()),
            Err(Error::RepresentationRequiresConvexity)
        ));
    }

    #[test]
    fn fourier_power_law_in_1d() {
        let k = Kernel::riesz(1, -0.5).unwrap();
        let o = QuadratureOptions::default();
        let a = fourier_estimate(&k, &[1.0], 1e-6, 1e3, &o).unwrap();
        let b = fourier_estimate(&k, &[2.0], 1e-6, 1e3, &o).unwrap();
        assert!((a / b / 2f64.sqrt() - 1.0).abs() < 0.03, "{a} {b}");
        // |x|^{−1/2} is its own transform, so Ŵ(1) ≈ 2
        assert!((a - 2.0).abs() < 0.02, "{a}");
    }

    #[test]
    fn fourier_is_even_and_rejects_zero() {
        let k = Kernel::riesz(3, -2.0).unwrap();
        let o = QuadratureOptions::default();
        let xi = [0.3, -0.4, 0.5];
        let a = fourier_estimate(&k, &xi, 1e-3, 1e2, &o).unwrap();
        let b = fourier_estimate(&k, &[-0.3, 0.4, -0.5], 1e-3, 1e2, &o).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
        assert!(matches!(fourier_estimate(&k, &[0.0; 3], 1e-3, 1e2, &o), Err(Error::ZeroFrequency)));
    }
}
