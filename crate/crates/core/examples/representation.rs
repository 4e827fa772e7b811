//! Rebuild the Newtonian-type kernel from its Laplacian. For a radial kernel
//! the inner cutoff does not matter once it is below `|x|`.
use frostman::kernel::{representation_reconstruct, Kernel, QuadratureOptions};

fn main() -> frostman::Result<()> {
    let k = Kernel::riesz(3, -2.0)?;
    let q = QuadratureOptions::default();
    for eps in [1e-1, 1e-3] {
        for r in [0.5, 1.0, 2.0] {
            let x = [r, 0.0, 0.0];
            let got = representation_reconstruct(&k, &x, eps, 1e3, &q)?;
            let want = k.evaluate(&x);
            println!(
                "eps {eps:.0e}  |x| = {r}  W_eps,R {got:.6}  W {want:.6}  rel err {:.1e}",
                (got - want).abs() / want
            );
        }
    }
    Ok(())
}
