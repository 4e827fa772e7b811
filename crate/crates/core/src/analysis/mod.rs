//! Euler–Lagrange certificates, convexity along interpolations, and the
//! existence / non-existence / truncation probes.

mod convexity;
mod el;
mod probes;
mod scale_flow;

pub use convexity::{interpolation_convexity_check, ConvexityReport, PairConvexity};
pub use el::{interior_height, verify_euler_lagrange, ELReport};
pub use probes::{
    ball_sweep, candidate_from_minimizer, existence_probe, nonexistence_scenario, truncation_probe, Diagnostic,
    ProbeKind, ProbeOptions, ProbeReport, Verdict, BOUNDARY_MASS_THRESHOLD,
};
pub use scale_flow::{bump_profile, scale_flow_derivative, scaled_convolution};
