//! Property tests for the invariants the library promises.

use proptest::prelude::*;

use frostman::analysis::{interpolation_convexity_check, verify_euler_lagrange};
use frostman::field::{energy, generated_potential, ExternalPotential, KernelTable};
use frostman::grid::{DiscreteMeasure, Domain, GridSpec};
use frostman::kernel::Kernel;
use frostman::solver::{frank_wolfe_minimize, project_simplex, SolverConfig};

const N: usize = 48;

fn grid() -> GridSpec {
    GridSpec::centered_cube(1, 3.0, N).unwrap()
}

fn table(b: f64) -> KernelTable {
    KernelTable::new(&Kernel::riesz(1, b).unwrap(), &grid()).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, N).prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
}

fn measure(w: Vec<f64>) -> DiscreteMeasure {
    let s: f64 = w.iter().sum();
    DiscreteMeasure::new(&grid(), w.into_iter().map(|v| v / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riesz_kernels_are_even(b in -0.95f64..-0.05, x in prop::collection::vec(-5.0f64..5.0, 3)) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let k = Kernel::riesz(3, b * 2.0).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(k.evaluate(&x), k.evaluate(&neg));
    }

    #[test]
    fn kernel_tables_are_symmetric(b in -0.9f64..-0.1, i in 0..N, j in 0..N) {
        let t = table(b);
        prop_assert_eq!(t.get(i, j), t.get(j, i));
    }

    #[test]
    fn simplex_projection_lands_on_the_simplex(v in prop::collection::vec(-3.0f64..3.0, 1..40)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = project_simplex(&p);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_csv_round_trips(w in weights()) {
        let m = measure(w);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = DiscreteMeasure::read_csv(&grid(), buf.as_slice()).unwrap();
        prop_assert_eq!(back.weights(), m.weights());
    }

    #[test]
    fn mollification_keeps_mass(w in weights(), cells in 2usize..5) {
        let g = GridSpec::centered_cube(1, 3.0, N + 16).unwrap();
        let mut padded = vec![0.0; 8];
        padded.extend(w);
        padded.extend(vec![0.0; 8]);
        let s: f64 = padded.iter().sum();
        let m = DiscreteMeasure::new(&g, padded.into_iter().map(|v| v / s).collect()).unwrap();
        let out = m.mollify(cells as f64 * g.spacing()).unwrap();
        prop_assert!((out.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_is_a_quadratic_along_segments(a in weights(), b in weights(), t in 0.0f64..1.0) {
        let tb = table(-0.5);
        let u = ExternalPotential::bump_well(&grid(), 1.0, 1.0, &[0.0]).unwrap();
        let (ma, mb) = (measure(a), measure(b));
        let mt = ma.interpolate(&mb, t).unwrap();
        let (ea, eb, et) = (energy(&tb, &u, &ma).unwrap(), energy(&tb, &u, &mb).unwrap(), energy(&tb, &u, &mt).unwrap());
        let diff: Vec<f64> = mb.weights().iter().zip(ma.weights()).map(|(x, y)| x - y).collect();
        let q = 0.5 * tb.bilinear(&diff, &diff);
        // E(t) = (1−t)E(0) + tE(1) − t(1−t)·½ΔᵀTΔ
        let want = (1.0 - t) * ea + t * eb - t * (1.0 - t) * q;
        prop_assert!((et - want).abs() < 1e-10 * (1.0 + et.abs()));
        prop_assert!(q >= 0.0);
    }

    #[test]
    fn generated_potential_is_affine(a in weights(), b in weights(), t in 0.0f64..1.0) {
        let tb = table(-0.5);
        let u = ExternalPotential::zero(&grid());
        let (ma, mb) = (measure(a), measure(b));
        let mt = ma.interpolate(&mb, t).unwrap();
        let (va, vb, vt) = (
            generated_potential(&tb, &u, &ma).unwrap(),
            generated_potential(&tb, &u, &mb).unwrap(),
            generated_potential(&tb, &u, &mt).unwrap(),
        );
        for i in 0..N {
            let want = (1.0 - t) * va.values()[i] + t * vb.values()[i];
            prop_assert!((vt.values()[i] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn el_residuals_are_nonnegative(w in weights(), depth in 0.0f64..4.0) {
        let tb = table(-0.5);
        let g = grid();
        let u = ExternalPotential::bump_well(&g, depth, 1.0, &[0.0]).unwrap();
        let r = verify_euler_lagrange(&tb, &u, &Domain::full(&g), &measure(w), 1e-6).unwrap();
        prop_assert!(r.residual_support >= 0.0 && r.residual_domain >= 0.0 && r.rho_ae_residual >= 0.0);
    }

    #[test]
    fn certified_kernels_give_convex_segments(a in weights(), b in weights()) {
        let tb = table(-0.5);
        let u = ExternalPotential::zero(&grid());
        let (ma, mb) = (measure(a), measure(b));
        prop_assume!(ma.l1_distance(&mb).unwrap() > 1e-6);
        let r = interpolation_convexity_check(&tb, &u, &[(ma, mb)], 8).unwrap();
        prop_assert!(r.strictly_convex);
        prop_assert!(r.max_identity_error < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn minimizer_is_a_probability_on_the_domain(depth in 1.0f64..6.0, center in -1.0f64..1.0, seed in 0u64..1000) {
        let g = grid();
        let tb = table(-0.5);
        let u = ExternalPotential::bump_well(&g, depth, 1.0, &[center]).unwrap();
        let d = Domain::full(&g);
        let cfg = SolverConfig { init: frostman::solver::Init::Random, seed, ..Default::default() };
        let (m, tr) = frank_wolfe_minimize(&tb, &u, &d, &cfg).unwrap();
        prop_assert!((m.mass() - 1.0).abs() < 1e-12);
        prop_assert!(m.weights().iter().all(|w| *w >= 0.0));
        // the trace never goes up
        let obj: Vec<f64> = tr.records.iter().map(|r| r.objective).collect();
        prop_assert!(obj.windows(2).all(|p| p[1] <= p[0] + 1e-12 * (1.0 + p[0].abs())));
    }
}
