use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scale_flow::{bump_profile, scale_flow_derivative};
use crate::error::{Error, Result};
use crate::field::{energy, generated_potential, interaction_energy, ExternalPotential, KernelTable};
use crate::grid::{DiscreteMeasure, Domain, DomainKind, GridSpec};
use crate::kernel::Kernel;
use crate::solver::{frank_wolfe_minimize, SolverConfig};

/// Fraction of mass within `2h` of the ball boundary that signals escape.
pub const BOUNDARY_MASS_THRESHOLD: f64 = 0.01;
/// Margins below this multiple of the probe tolerance are not trusted.
const MARGIN_FACTOR: f64 = 10.0;
/// Captured mass from which truncated energies must match.
const CAPTURED_MASS: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Exist,
    Nonexist,
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exists,
    NotExists,
    Inconclusive,
    /// Truncation probe only.
    Pass,
    /// Truncation probe only.
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    #[serde(rename = "R")]
    pub r: f64,
    pub energy: f64,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: ProbeKind,
    pub verdict: Verdict,
    pub margin: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub diagnostics: Vec<Diagnostic>,
    /// Filled in by whoever writes the witnesses to disk.
    pub witness_files: Vec<String>,
    /// Named witness scalars (sup of V on the candidate, C0, slopes...).
    pub scalars: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub witnesses: Vec<(String, DiscreteMeasure)>,
}

impl ProbeReport {
    fn new(probe: ProbeKind, tol: f64) -> Self {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("tol".to_string(), tol);
        tolerances.insert("inconclusive_below".to_string(), MARGIN_FACTOR * tol);
        Self {
            probe,
            verdict: Verdict::Inconclusive,
            margin: f64::NAN,
            tolerances,
            diagnostics: Vec::new(),
            witness_files: Vec::new(),
            scalars: BTreeMap::new(),
            warnings: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    fn scalar(&mut self, key: &str, v: f64) {
        self.scalars.insert(key.to_string(), v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeOptions {
    pub solver: SolverConfig,
    /// Mollification radius for candidates; `None` means `2h`.
    pub eps: Option<f64>,
    pub tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), eps: None, tol: 1e-6 }
    }
}

/// Mass on cells touching the outer faces of the grid.
fn grid_edge_mass(m: &DiscreteMeasure) -> f64 {
    let g = m.grid();
    m.weights()
        .iter()
        .enumerate()
        .filter(|(i, _)| g.multi_index(*i).iter().zip(g.shape()).any(|(&k, &n)| k == 0 || k + 1 == n))
        .map(|(_, w)| w)
        .sum()
}

/// Support cells whose whole lattice neighbourhood is also in the support.
fn support_interior(m: &DiscreteMeasure) -> Vec<usize> {
    let mask: Vec<bool> = m.weights().iter().map(|w| *w > 0.0).collect();
    match Domain::from_mask(m.grid(), mask) {
        Ok(d) => d.interior().cells(),
        Err(_) => Vec::new(),
    }
}

/// Mollify a (numerical) minimizer and, on half-space domains, push it
/// inward by the lattice ceiling of `eps + ω_Φ(eps)` along the last axis.
pub fn candidate_from_minimizer(domain: &Domain, m: &DiscreteMeasure, eps: f64) -> Result<DiscreteMeasure> {
    domain.grid().ensure_same(m.grid())?;
    let g = domain.grid();
    let h = g.spacing();
    let smooth = m.mollify(eps).map_err(|e| match e {
        Error::MollifierLeavesGrid => Error::EnlargeGrid,
        other => other,
    })?;
    let shift = match domain.kind() {
        DomainKind::HalfLine { .. } | DomainKind::CurvedHalfSpace { .. } => {
            let reach = eps + domain.phi_modulus(eps);
            (reach / h - 1e-9).ceil().max(0.0) as i64
        }
        _ => 0,
    };
    let out = if shift > 0 {
        let mut steps = vec![0i64; g.dim()];
        steps[g.dim() - 1] = shift;
        smooth.translate_cells(&steps).map_err(|e| match e {
            Error::TranslationOutOfBounds => Error::EnlargeGrid,
            other => other,
        })?
    } else {
        smooth
    };
    if !out.is_supported_in(domain) {
        return Err(Error::CandidateInfeasible);
    }
    Ok(out)
}

/// Sufficient conditions for existence on `(k, U, D)`.
///
/// The candidate test compares `sup_S V[ρ♯]` over the interior of the
/// candidate's support with `U_∞`; it only counts for certified kernels with
/// `W ≥ 0` on the whole space, a half-line (d = 1) or a half-space. The two
/// energy tests compare the best available energy with
/// `½(U_∞ + inf U + inf W)` and, when `U ≡ 0`, with `½W_∞`; they count on
/// the whole space only.
pub fn existence_probe(
    k: &Kernel,
    table: &KernelTable,
    u: &ExternalPotential,
    domain: &Domain,
    candidate: Option<&DiscreteMeasure>,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    let g = table.grid();
    g.ensure_same(u.grid())?;
    g.ensure_same(domain.grid())?;
    if k.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: k.dim() });
    }
    let mut rep = ProbeReport::new(ProbeKind::Exist, opts.tol);
    let threshold = MARGIN_FACTOR * opts.tol;
    let u_inf = u.u_infty();

    let (cand, minimizer, has_candidate) = match candidate {
        Some(c) => {
            g.ensure_same(c.grid())?;
            if !c.is_supported_in(domain) {
                return Err(Error::CandidateInfeasible);
            }
            (c.clone(), None, true)
        }
        None => {
            let (m, trace) = frank_wolfe_minimize(table, u, domain, &opts.solver)?;
            if !trace.converged() {
                rep.warnings.push("solver did not converge; candidate built from the last iterate".into());
            }
            let eps = opts.eps.unwrap_or(2.0 * g.spacing());
            match candidate_from_minimizer(domain, &m, eps) {
                Ok(c) => (c, Some(m), true),
                Err(Error::EnlargeGrid | Error::CandidateInfeasible) => {
                    rep.warnings.push("minimizer reaches the grid edge; no candidate, only energy tests".into());
                    (m.clone(), Some(m), false)
                }
                Err(e) => return Err(e),
            }
        }
    };

    // candidate test
    let v = generated_potential(table, u, &cand)?;
    let mut s = support_interior(&cand);
    if s.is_empty() {
        rep.warnings.push("candidate support has no interior cells; using the whole support".into());
        s = cand.support();
    }
    let sup_v = s.iter().map(|&i| v.values()[i]).fold(f64::NEG_INFINITY, f64::max);
    let cand_margin = u_inf - sup_v;
    rep.scalar("candidate_sup_v", sup_v);
    rep.scalar("u_infty", u_inf);
    rep.scalar("candidate_margin", cand_margin);

    let cert = k.certificate().ok();
    let certified = cert.as_ref().is_some_and(|c| c.is_essentially_convex && c.nonnegative);
    let covered = match domain.kind() {
        DomainKind::FullSpace => true,
        DomainKind::HalfLine { .. } => g.dim() == 1,
        DomainKind::CurvedHalfSpace { .. } => g.dim() >= 2,
        _ => false,
    };
    if domain.beyond_stated_theorem() {
        rep.warnings.push("curved half-space in d >= 3: existence from the candidate test is not established".into());
    }
    if !certified {
        rep.warnings.push("kernel is not certified essentially convex with W >= 0; candidate test not counted".into());
    }
    if !covered {
        rep.warnings.push("domain is not a whole space or half-space; candidate test not counted".into());
    }
    let mut counted = Vec::new();
    if certified && covered && has_candidate {
        counted.push(cand_margin);
    }

    // energy tests on the best available measure
    let whole = matches!(domain.kind(), DomainKind::FullSpace);
    let mut e_best = energy(table, u, &cand)?;
    let mut witness = &cand;
    if let Some(m) = &minimizer {
        let e = energy(table, u, m)?;
        if e < e_best {
            e_best = e;
            witness = m;
        }
    }
    rep.scalar("energy", e_best);
    let inf_u = u.minimum().min(u_inf);
    let inf_w = k.infimum();
    let bound = 0.5 * (u_inf + inf_u + inf_w);
    let energy_margin = bound - e_best;
    if energy_margin.is_finite() {
        rep.scalar("energy_bound", bound);
        rep.scalar("energy_bound_margin", energy_margin);
        if whole {
            counted.push(energy_margin);
        }
    }
    let u_zero = u_inf == 0.0 && u.values().iter().all(|v| *v == 0.0);
    if let (true, Some(w_inf)) = (u_zero, k.limit_at_infinity()) {
        let e_w = interaction_energy(table, witness)?;
        let free_margin = 0.5 * w_inf - e_w;
        rep.scalar("free_energy_margin", free_margin);
        if whole {
            counted.push(free_margin);
        }
    }
    if !whole && energy_margin.is_finite() {
        rep.warnings.push("energy tests are stated on the whole space; reported but not counted".into());
    }

    if let Some(m) = &minimizer {
        let vm = generated_potential(table, u, m)?;
        let c0: f64 = m.weights().iter().zip(vm.values()).map(|(a, b)| a * b).sum();
        rep.scalar("minimizer_c0", c0);
        if (c0 - u_inf).abs() <= threshold {
            rep.warnings.push("C0 is within tolerance of U_inf: borderline case, left inconclusive".into());
        }
    }

    rep.margin = counted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !rep.margin.is_finite() {
        rep.margin = cand_margin;
    }
    rep.verdict = if counted.iter().any(|m| *m > threshold) { Verdict::Exists } else { Verdict::Inconclusive };
    rep.diagnostics.push(Diagnostic {
        r: g.circumradius(),
        energy: e_best,
        boundary_mass: grid_edge_mass(minimizer.as_ref().unwrap_or(&cand)),
    });
    if has_candidate {
        rep.witnesses.push(("candidate".into(), cand.clone()));
    }
    if let Some(m) = minimizer {
        rep.witnesses.push(("minimizer".into(), m));
    }
    Ok(rep)
}

/// Distance from the origin to the nearest outer face of the grid.
fn inradius(g: &GridSpec) -> f64 {
    (0..g.dim())
        .map(|a| {
            let lo = g.origin()[a];
            let hi = lo + g.shape()[a] as f64 * g.spacing();
            (-lo).min(hi)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimize over `D = B(0;R)` for each `R`, recording the energy and the
/// mass within `2h` of the sphere `|x| = R`.
pub fn ball_sweep(
    table: &KernelTable,
    u: &ExternalPotential,
    r_list: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<(Diagnostic, DiscreteMeasure)>> {
    let g = table.grid();
    let h = g.spacing();
    let reach = inradius(g);
    let mut out = Vec::with_capacity(r_list.len());
    for &r in r_list {
        if !(r > 0.0) || r > reach + 1e-12 {
            return Err(Error::InvalidParameter(format!("ball radius {r} must lie in (0, {reach}]")));
        }
        let domain = Domain::new(DomainKind::Ball { center: vec![0.0; g.dim()], radius: r }, g)?;
        let (m, _) = frank_wolfe_minimize(table, u, &domain, cfg)?;
        let e = energy(table, u, &m)?;
        let mut c = vec![0.0; g.dim()];
        let boundary_mass = m
            .weights()
            .iter()
            .enumerate()
            .filter(|(i, w)| {
                if **w == 0.0 {
                    return false;
                }
                g.center_into(*i, &mut c);
                r - c.iter().map(|v| v * v).sum::<f64>().sqrt() <= 2.0 * h
            })
            .map(|(_, w)| w)
            .sum();
        out.push((Diagnostic { r, energy: e, boundary_mass }, m));
    }
    Ok(out)
}

/// Escaping-mass signature for `U = −α W*φ` with a superharmonic kernel.
pub fn nonexistence_scenario(
    k: &Kernel,
    table: &KernelTable,
    alpha: f64,
    phi: &DiscreteMeasure,
    r_list: &[f64],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if r_list.is_empty() {
        return Err(Error::InvalidParameter("R_list is empty".into()));
    }
    let d = k.dim();
    let mut far = vec![0.0; d];
    far[0] = 10.0;
    let far_superharmonic = k.laplacian(&far).is_ok_and(|l| l < 0.0);
    if k.is_certified() || !far_superharmonic {
        return Err(Error::RequiresSuperharmonic);
    }
    table.grid().ensure_same(phi.grid())?;
    let u = ExternalPotential::balayage(table, &phi.scaled(alpha)?)?;
    let mut rep = ProbeReport::new(ProbeKind::Nonexist, opts.tol);
    rep.tolerances.insert("boundary_mass_threshold".into(), BOUNDARY_MASS_THRESHOLD);
    rep.scalar("alpha", alpha);
    let sweep = ball_sweep(table, &u, r_list, &opts.solver)?;
    let drops: Vec<f64> = sweep.windows(2).map(|w| w[0].0.energy - w[1].0.energy).collect();
    let min_drop = drops.iter().copied().fold(f64::INFINITY, f64::min);
    let min_boundary = sweep.iter().map(|s| s.0.boundary_mass).fold(f64::INFINITY, f64::min);
    rep.scalar("min_energy_drop", min_drop);
    rep.scalar("min_boundary_mass", min_boundary);
    if sweep.len() < 2 {
        rep.warnings.push("a single radius cannot show a decreasing energy sequence".into());
    }

    if k.is_radial() && k.is_derivable() {
        let p = bump_profile(d);
        let mut max_rate = f64::NEG_INFINITY;
        for r in [0.0, 1.0, 2.0] {
            let mut x = vec![0.0; d];
            x[0] = r;
            max_rate = max_rate.max(scale_flow_derivative(k, &x, 1.5, &p)?);
        }
        rep.scalar("scale_flow_max_derivative", max_rate);
        if max_rate >= 0.0 {
            rep.warnings.push("scale-flow derivative is not negative on |x| <= 2".into());
        }
    }

    rep.margin = if sweep.len() < 2 { f64::NAN } else { min_drop };
    let escaping = sweep.len() >= 2 && min_drop > MARGIN_FACTOR * opts.tol && min_boundary >= BOUNDARY_MASS_THRESHOLD;
    rep.verdict = if escaping { Verdict::NotExists } else { Verdict::Inconclusive };
    for (diag, m) in sweep {
        rep.witnesses.push((format!("minimizer_R{}", diag.r), m));
        rep.diagnostics.push(diag);
    }
    Ok(rep)
}

/// Energies of `m χ_{B(0;R)} / m(B(0;R))` against `E[m]`.
///
/// After shifting `T` and `U` by their minima the truncated energy obeys
/// `E_R ≤ E/m(B(0;R))²`; once the captured mass reaches 0.999 the energies
/// must agree within `tol`.
pub fn truncation_probe(
    table: &KernelTable,
    u: &ExternalPotential,
    m: &DiscreteMeasure,
    r_list: &[f64],
    tol: f64,
) -> Result<ProbeReport> {
    if (m.mass() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("truncation probe needs mass 1, got {}", m.mass())));
    }
    let e = energy(table, u, m)?;
    if !e.is_finite() {
        return Err(Error::InvalidParameter("energy of m is not finite".into()));
    }
    let shift = 0.5 * table.min_value() + u.minimum();
    let e_shift = e - shift;
    let mut rep = ProbeReport::new(ProbeKind::Truncate, tol);
    rep.tolerances.insert("bound_slack".into(), 1e-12);
    rep.tolerances.insert("captured_mass".into(), CAPTURED_MASS);
    rep.scalar("energy", e);
    rep.scalar("inf_shift", shift);
    let mut bound_ok = true;
    let mut worst: Option<f64> = None;
    for &r in r_list {
        let captured = m.mass_in_ball(r);
        let er = match m.truncate_rescale(r) {
            Ok(t) => energy(table, u, &t)?,
            Err(Error::EmptyTruncation) => {
                rep.diagnostics.push(Diagnostic { r, energy: f64::NAN, boundary_mass: 1.0 });
                continue;
            }
            Err(err) => return Err(err),
        };
        if er - shift > e_shift / (captured * captured) + 1e-12 {
            bound_ok = false;
            rep.warnings.push(format!("bound violated at R = {r}"));
        }
        if captured >= CAPTURED_MASS {
            let dev = (er - e).abs();
            worst = Some(worst.map_or(dev, |w: f64| w.max(dev)));
        }
        rep.diagnostics.push(Diagnostic { r, energy: er, boundary_mass: 1.0 - captured });
    }
    rep.margin = worst.map_or(f64::NAN, |w| tol - w);
    rep.verdict = match (bound_ok, worst) {
        (false, _) => Verdict::Fail,
        (true, None) => Verdict::Inconclusive,
        (true, Some(w)) if w <= tol => Verdict::Pass,
        _ => Verdict::Fail,
    };
    Ok(rep)
}
