//! Regularized Fourier transform of a Riesz kernel against `|ξ|^{−d−b}`.
use frostman::kernel::{fourier_estimate, Kernel, QuadratureOptions};

fn main() -> frostman::Result<()> {
    let k = Kernel::riesz(1, -0.5)?;
    let q = QuadratureOptions::default();
    let base = fourier_estimate(&k, &[1.0], 1e-6, 1e3, &q)?;
    for xi in [0.5, 1.0, 2.0, 4.0] {
        let est = fourier_estimate(&k, &[xi], 1e-6, 1e3, &q)?;
        let law = base * xi.powf(-0.5);
        println!("xi = {xi:3}  estimate {est:.6}  power law {law:.6}  rel err {:.1e}", (est - law).abs() / law);
    }
    Ok(())
}
