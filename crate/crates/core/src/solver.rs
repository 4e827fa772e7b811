//! Frank–Wolfe energy minimization, supergradient height ascent and the
//! microscopic-diffusion move.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExternalPotential, KernelTable};
use crate::grid::{ball_stencil, DiscreteMeasure, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `γ_k = 2/(k+2)`.
    Classic,
    /// Minimize the quadratic along the Frank–Wolfe direction.
    #[default]
    ExactLineSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    /// Uniform over the feasible cells.
    #[default]
    Uniform,
    /// Independent uniform(0,1) weights, normalized; drawn from a ChaCha8
    /// stream seeded by [`SolverConfig::seed`].
    Random,
    /// All mass on one cell.
    PointMass { cell: usize },
}

/// Step sizes for height ascent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightStep {
    /// `c/√k` along the normalized supergradient.
    Diminishing { c: f64 },
    /// Polyak steps toward `best + δ`; `δ` halves after `patience` iterations
    /// without improvement and grows by 1.5 on success.
    AdaptivePolyak { delta0: f64, patience: usize },
}

impl Default for HeightStep {
    fn default() -> Self {
        HeightStep::AdaptivePolyak { delta0: 0.1, patience: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Relative Frank–Wolfe gap `gap / (1 + |∫V dρ|)` at which to stop.
    pub gap_tol: f64,
    pub step_rule: StepRule,
    pub init: Init,
    pub seed: u64,
    /// Finish with an active-set solve of the KKT system on the support.
    pub polish: bool,
    /// Largest support on which the active-set solve is attempted.
    pub polish_max_support: usize,
    /// Active-set iterations reserved out of `max_iters`.
    pub polish_iters: usize,
    /// Frank–Wolfe iterations between polish attempts.
    pub polish_every: usize,
    pub height_step: HeightStep,
    /// Height ascent stops after this many non-improving iterations.
    pub height_patience: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            gap_tol: 1e-7,
            step_rule: StepRule::ExactLineSearch,
            init: Init::Uniform,
            seed: 0,
            polish: true,
            polish_max_support: 512,
            polish_iters: 200,
            polish_every: 500,
            height_step: HeightStep::default(),
            height_patience: 500,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.gap_tol > 0.0) {
            return Err(Error::InvalidParameter("max_iters and gap_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub gap: f64,
    pub step: f64,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub status: Status,
    /// Whether the returned measure came from the active-set solve.
    pub polished: bool,
}

impl SolveTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// CSV `iteration,objective,gap,step`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,objective,gap,step")?;
        for r in &self.records {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.iteration, r.objective, r.gap, r.step)?;
        }
        Ok(())
    }
}

fn initial_weights(domain: &Domain, cfg: &SolverConfig, cells: &[usize]) -> Result<Vec<f64>> {
    let n = cells.len();
    let w: Vec<f64> = match cfg.init {
        Init::Uniform => vec![1.0 / n as f64; n],
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        }
        Init::PointMass { cell } => {
            if cell >= domain.grid().len() || !domain.mask()[cell] {
                return Err(Error::BadInitialization);
            }
            cells.iter().map(|&c| if c == cell { 1.0 } else { 0.0 }).collect()
        }
    };
    Ok(w)
}

fn scatter(domain: &Domain, cells: &[usize], w: &[f64]) -> DiscreteMeasure {
    let mut full = vec![0.0; domain.grid().len()];
    for (&c, &v) in cells.iter().zip(w) {
        full[c] = v;
    }
    DiscreteMeasure::partial(domain.grid(), full).expect("solver weights are nonnegative")
}

/// Minimize `E = ½ρᵀTρ + Uᵀρ` over probability vectors on the masked cells.
pub fn frank_wolfe_minimize(
    table: &KernelTable,
    u: &ExternalPotential,
    domain: &Domain,
    cfg: &SolverConfig,
) -> Result<(DiscreteMeasure, SolveTrace)> {
    cfg.validate()?;
    table.grid().ensure_same(u.grid())?;
    table.grid().ensure_same(domain.grid())?;
    let cells = domain.cells();
    if cells.is_empty() {
        return Err(Error::InfeasibleDomain);
    }
    let n = cells.len();
    let uc: Vec<f64> = cells.iter().map(|&c| u.values()[c]).collect();
    let mut w = initial_weights(domain, cfg, &cells)?;
    let mut g = table.convolve(&scatter(domain, &cells, &w).into_weights(), Some(&cells));
    let t0 = table.diagonal();
    let objective =
        |w: &[f64], g: &[f64]| -> f64 { w.iter().zip(g).zip(&uc).map(|((a, b), c)| a * (0.5 * b + c)).sum() };
    let e0 = objective(&w, &g);
    if !e0.is_finite() {
        return Err(Error::BadInitialization);
    }

    let polish_budget = if cfg.polish { cfg.polish_iters.min(cfg.max_iters / 2) } else { 0 };
    let fw_budget = cfg.max_iters - polish_budget;
    let mut polish_left = polish_budget;
    let mut records = Vec::new();
    let mut status = Status::MaxIters;
    let mut polished = false;
    let mut polish_tried_at = usize::MAX;

    let mut k = 0;
    loop {
        // linear minimization oracle: smallest V, ties to the smallest cell index
        let mut best = 0;
        let mut vbest = f64::INFINITY;
        let mut rho_v = 0.0;
        let mut rho_g = 0.0;
        for i in 0..n {
            let v = g[i] + uc[i];
            rho_v += w[i] * v;
            rho_g += w[i] * g[i];
            if v < vbest {
                vbest = v;
                best = i;
            }
        }
        let gap = (rho_v - vbest).max(0.0);
        let rel = gap / (1.0 + rho_v.abs());
        let e = objective(&w, &g);
        if rel <= cfg.gap_tol {
            records.push(TraceRecord { iteration: k, objective: e, gap, step: 0.0, cell: cells[best] });
            status = Status::Converged;
            break;
        }
        let vmax = w.iter().copied().fold(0.0, f64::max);
        let want_polish = cfg.polish
            && polish_left > 0
            && k > 0
            && k != polish_tried_at
            && (k % cfg.polish_every.max(1) == 0 || k == fw_budget)
            && w.iter().filter(|v| **v > 1e-6 * vmax).count() <= cfg.polish_max_support.max(1);
        if want_polish {
            polish_tried_at = k;
            if let Some((wp, used)) = active_set_polish(table, &cells, &uc, &w, cfg.polish_max_support, polish_left) {
                polish_left -= used.min(polish_left);
                let gp = table.convolve(&scatter(domain, &cells, &wp).into_weights(), Some(&cells));
                let ep = objective(&wp, &gp);
                if ep <= e + 1e-12 * (1.0 + e.abs()) {
                    w = wp;
                    g = gp;
                    polished = true;
                    continue;
                }
            } else {
                polish_left = polish_left.saturating_sub(1);
            }
        }
        if k >= fw_budget {
            records.push(TraceRecord { iteration: k, objective: e, gap, step: 0.0, cell: cells[best] });
            break;
        }
        let gamma = match cfg.step_rule {
            StepRule::Classic => 2.0 / (k as f64 + 2.0),
            StepRule::ExactLineSearch => {
                let curv = t0 - 2.0 * g[best] + rho_g;
                if curv > 0.0 {
                    (gap / curv).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            }
        };
        records.push(TraceRecord { iteration: k, objective: e, gap, step: gamma, cell: cells[best] });
        let cb = cells[best];
        for i in 0..n {
            w[i] *= 1.0 - gamma;
            g[i] = (1.0 - gamma) * g[i] + gamma * table.get(cells[i], cb);
        }
        w[best] += gamma;
        k += 1;
    }
    Ok((scatter(domain, &cells, &w), SolveTrace { records, status, polished }))
}

/// Primal active-set method for `min ½wᵀTw + Uᵀw` on the simplex, started
/// from the support of `w0`. Returns the KKT point and the number of cells
/// added, or `None` if more than `budget` additions were needed or the
/// support outgrew `max_support`. Drops are free: each one shrinks the set.
fn active_set_polish(
    table: &KernelTable,
    cells: &[usize],
    uc: &[f64],
    w0: &[f64],
    max_support: usize,
    budget: usize,
) -> Option<(Vec<f64>, usize)> {
    let n = cells.len();
    let wmax = w0.iter().copied().fold(0.0, f64::max);
    let mut set: Vec<usize> = (0..n).filter(|&i| w0[i] > 1e-6 * wmax).collect();
    if set.len() > max_support {
        return None;
    }
    let mass: f64 = set.iter().map(|&i| w0[i]).sum();
    let mut w: Vec<f64> = set.iter().map(|&i| w0[i] / mass).collect();
    let mut added = 0;
    while added <= budget {
        let (wn, lambda) = kkt_solve(table, cells, uc, &set)?;
        if let Some(t) = blocking_step(&w, &wn) {
            // move toward the KKT point until a weight hits zero, then drop it
            for (a, b) in w.iter_mut().zip(&wn) {
                *a += t * (b - *a);
            }
            let keep: Vec<bool> = w.iter().map(|v| *v > 1e-14).collect();
            let mut k = 0;
            set.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let mut k = 0;
            w.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            if set.is_empty() {
                return None;
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            continue;
        }
        w = wn;
        // most violated cell outside the set
        let mut full = vec![0.0; table.grid().len()];
        for (&i, &v) in set.iter().zip(&w) {
            full[cells[i]] = v;
        }
        let g = table.convolve(&full, Some(cells));
        let scale = 1.0 + g.iter().zip(uc).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        let mut worst = None;
        let mut wv = -1e-12 * scale;
        for i in 0..n {
            let r = g[i] + uc[i] - lambda;
            if r < wv && set.binary_search(&i).is_err() {
                wv = r;
                worst = Some(i);
            }
        }
        match worst {
            None => {
                let mut out = vec![0.0; n];
                for (&i, &v) in set.iter().zip(&w) {
                    out[i] = v;
                }
                return Some((out, added + 1));
            }
            Some(j) => {
                if set.len() >= max_support {
                    return None;
                }
                let pos = set.binary_search(&j).unwrap_err();
                set.insert(pos, j);
                w.insert(pos, 0.0);
                added += 1;
            }
        }
    }
    None
}

/// Largest `t ∈ [0,1)` keeping `w + t(wn − w) ≥ 0`, or `None` if `wn ≥ 0`.
fn blocking_step(w: &[f64], wn: &[f64]) -> Option<f64> {
    let mut t = f64::INFINITY;
    for (&a, &b) in w.iter().zip(wn) {
        if b < 0.0 {
            t = t.min(a / (a - b));
        }
    }
    t.is_finite().then_some(t.clamp(0.0, 1.0))
}

/// Solve `T_SS w + U_S = λ1`, `Σw = 1`.
fn kkt_solve(table: &KernelTable, cells: &[usize], uc: &[f64], set: &[usize]) -> Option<(Vec<f64>, f64)> {
    let s = set.len();
    let t = DMatrix::from_fn(s, s, |a, b| table.get(cells[set[a]], cells[set[b]]));
    let rhs = DVector::from_fn(s, |a, _| -uc[set[a]]);
    let ones = DVector::from_element(s, 1.0);
    if let Some(ch) = t.clone().cholesky() {
        let b = ch.solve(&rhs);
        let a = ch.solve(&ones);
        let lambda = (1.0 - b.sum()) / a.sum();
        let w = b + a * lambda;
        return Some((w.iter().copied().collect(), lambda));
    }
    let mut m = DMatrix::zeros(s + 1, s + 1);
    m.view_mut((0, 0), (s, s)).copy_from(&t);
    for a in 0..s {
        m[(a, s)] = -1.0;
        m[(s, a)] = 1.0;
    }
    let mut r = DVector::zeros(s + 1);
    r.rows_mut(0, s).copy_from(&rhs);
    r[s] = 1.0;
    let sol = m.lu().solve(&r)?;
    Some((sol.rows(0, s).iter().copied().collect(), sol[s]))
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Maximize `H_S[ρ] = min_S (Tρ + U)` over probability vectors on `S` by
/// projected supergradient ascent; returns the best iterate.
pub fn height_ascent(
    table: &KernelTable,
    u: &ExternalPotential,
    s: &Domain,
    cfg: &SolverConfig,
) -> Result<(DiscreteMeasure, SolveTrace)> {
    cfg.validate()?;
    table.grid().ensure_same(u.grid())?;
    table.grid().ensure_same(s.grid())?;
    let cells = s.cells();
    if cells.is_empty() {
        return Err(Error::InfeasibleDomain);
    }
    let n = cells.len();
    let uc: Vec<f64> = cells.iter().map(|&c| u.values()[c]).collect();
    let mut w = initial_weights(s, cfg, &cells)?;
    let eval = |w: &[f64]| -> (f64, usize) {
        let g = table.convolve(&scatter(s, &cells, w).into_weights(), Some(&cells));
        let mut best = (f64::INFINITY, 0);
        for i in 0..n {
            let v = g[i] + uc[i];
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    };
    let (mut h, mut at) = eval(&w);
    let mut best_h = h;
    let mut best_w = w.clone();
    let mut stale = 0;
    let mut records = Vec::new();
    let mut delta = match cfg.height_step {
        HeightStep::AdaptivePolyak { delta0, .. } => delta0,
        _ => 0.0,
    };
    let mut since_drop = 0;
    for k in 0..cfg.max_iters {
        let col: Vec<f64> = cells.iter().map(|&c| table.get(c, cells[at])).collect();
        let norm2: f64 = col.iter().map(|v| v * v).sum();
        let step = match cfg.height_step {
            HeightStep::Diminishing { c } => c / ((k + 1) as f64).sqrt() / norm2.sqrt(),
            HeightStep::AdaptivePolyak { patience, .. } => {
                if since_drop >= patience {
                    delta *= 0.5;
                    since_drop = 0;
                }
                (best_h + delta - h) / norm2
            }
        };
        records.push(TraceRecord { iteration: k, objective: h, gap: best_h - h, step, cell: cells[at] });
        let moved: Vec<f64> = w.iter().zip(&col).map(|(a, b)| a + step * b).collect();
        w = project_simplex(&moved);
        let (hn, an) = eval(&w);
        h = hn;
        at = an;
        if h > best_h {
            if let HeightStep::AdaptivePolyak { .. } = cfg.height_step {
                if h >= best_h + 0.5 * delta {
                    delta *= 1.5;
                }
            }
            best_h = h;
            best_w.clone_from(&w);
            stale = 0;
            since_drop = 0;
        } else {
            stale += 1;
            since_drop += 1;
            if stale >= cfg.height_patience {
                records.push(TraceRecord {
                    iteration: k + 1,
                    objective: h,
                    gap: best_h - h,
                    step: 0.0,
                    cell: cells[at],
                });
                return Ok((
                    scatter(s, &cells, &best_w),
                    SolveTrace { records, status: Status::Converged, polished: false },
                ));
            }
        }
    }
    Ok((scatter(s, &cells, &best_w), SolveTrace { records, status: Status::MaxIters, polished: false }))
}

/// Far-field report of a microscopic-diffusion move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionReport {
    pub sigma_mass: f64,
    /// `(cell, (W*μ)(y))` for masked cells with `|y − x| ≥ 3δ`.
    pub far_field: Vec<(usize, f64)>,
    pub min_far_field: f64,
}

/// Replace `σ = m·χ_{B(x;δ)}` by `σ * uniform(B(0;δ))` and report `W*μ`,
/// `μ = σ*uniform − σ`, away from the ball.
pub fn microscopic_diffusion(
    table: &KernelTable,
    domain: &Domain,
    m: &DiscreteMeasure,
    x: usize,
    delta: f64,
) -> Result<(DiscreteMeasure, DiffusionReport)> {
    let g = table.grid();
    g.ensure_same(m.grid())?;
    g.ensure_same(domain.grid())?;
    let h = g.spacing();
    if delta < 2.0 * h {
        return Err(Error::InvalidParameter(format!("δ = {delta} must be ≥ 2h = {}", 2.0 * h)));
    }
    let xc = g.center(x);
    let dist = |i: usize| g.center(i).iter().zip(&xc).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let sigma: Vec<f64> =
        m.weights().iter().enumerate().map(|(i, &w)| if w > 0.0 && dist(i) < delta { w } else { 0.0 }).collect();
    let sigma_mass: f64 = sigma.iter().sum();
    if !(sigma_mass > 0.0) {
        return Err(Error::EmptySigma);
    }
    let sigma = DiscreteMeasure::partial(g, sigma)?;
    let spread = sigma.spread(&ball_stencil(g.dim(), delta, h)).ok_or(Error::DiffusionLeavesGrid)?;
    let mu: Vec<f64> = spread.weights().iter().zip(sigma.weights()).map(|(a, b)| a - b).collect();
    let out: Vec<f64> = m.weights().iter().zip(&mu).map(|(a, b)| (a + b).max(0.0)).collect();
    let far: Vec<usize> = domain.cells().into_iter().filter(|&i| dist(i) >= 3.0 * delta).collect();
    let vals = table.convolve(&mu, Some(&far));
    let min_far_field = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let far_field = far.into_iter().zip(vals).collect();
    Ok((DiscreteMeasure::partial(g, out)?, DiffusionReport { sigma_mass, far_field, min_far_field }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{energy, generated_potential, height};
    use crate::grid::GridSpec;
    use crate::kernel::Kernel;

    fn balayage_setup(n: usize) -> (GridSpec, KernelTable, DiscreteMeasure, ExternalPotential) {
        let g = GridSpec::centered_cube(1, 2.0, n).unwrap();
        let k = Kernel::riesz(1, -0.5).unwrap();
        let t = KernelTable::new(&k, &g).unwrap();
        let phi = DiscreteMeasure::point_mass(&g, n / 2).mollify(0.5).unwrap();
        let u = ExternalPotential::balayage(&t, &phi).unwrap();
        (g, t, phi, u)
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.3, -0.2, 0.9, 0.1]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15 && p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn single_cell_domain_is_immediate() {
        let (g, t, _, u) = balayage_setup(16);
        let mut mask = vec![false; g.len()];
        mask[5] = true;
        let d = Domain::from_mask(&g, mask).unwrap();
        let (m, tr) = frank_wolfe_minimize(&t, &u, &d, &SolverConfig::default()).unwrap();
        assert_eq!(m.weights()[5], 1.0);
        assert!(tr.converged());
        assert_eq!(tr.records.len(), 1);
    }

    #[test]
    fn energy_is_nonincreasing_with_exact_line_search() {
        let (g, t, _, u) = balayage_setup(64);
        let cfg = SolverConfig { polish: false, max_iters: 300, ..Default::default() };
        let (_, tr) = frank_wolfe_minimize(&t, &u, &Domain::full(&g), &cfg).unwrap();
        for w in tr.records.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-13);
            assert!(w[0].gap >= -1e-12);
        }
    }

    #[test]
    fn balayage_is_recovered() {
        let (g, t, phi, u) = balayage_setup(128);
        let (m, tr) = frank_wolfe_minimize(&t, &u, &Domain::full(&g), &SolverConfig::default()).unwrap();
        assert!(tr.converged(), "{:?}", tr.last());
        assert!(m.l1_distance(&phi).unwrap() < 0.05);
        let (h, _) = height(&t, &u, &m, &Domain::full(&g)).unwrap();
        assert!(h.abs() < 1e-3);
    }

    #[test]
    fn random_and_uniform_starts_agree() {
        let (g, t, _, u) = balayage_setup(96);
        let d = Domain::full(&g);
        let a = frank_wolfe_minimize(&t, &u, &d, &SolverConfig::default()).unwrap().0;
        let cfg = SolverConfig { init: Init::Random, seed: 7, ..Default::default() };
        let b = frank_wolfe_minimize(&t, &u, &d, &cfg).unwrap().0;
        assert!(a.l1_distance(&b).unwrap() < 0.1);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let (g, t, _, u) = balayage_setup(64);
        let cfg = SolverConfig { max_iters: 1, ..Default::default() };
        let (_, tr) = frank_wolfe_minimize(&t, &u, &Domain::full(&g), &cfg).unwrap();
        assert_eq!(tr.status, Status::MaxIters);
    }

    #[test]
    fn attractive_kernel_concentrates() {
        let g = GridSpec::centered_cube(1, 2.0, 32).unwrap();
        let k = Kernel::attractive(1, 1.0).unwrap();
        let t = KernelTable::new(&k, &g).unwrap();
        let u = ExternalPotential::zero(&g);
        let (m, _) = frank_wolfe_minimize(&t, &u, &Domain::full(&g), &SolverConfig::default()).unwrap();
        let e = energy(&t, &u, &m).unwrap();
        assert!(e < 1e-6, "{e}");
        assert!(m.support_diameter() <= g.spacing());
    }

    #[test]
    fn bad_point_mass_init() {
        let (g, t, _, u) = balayage_setup(16);
        let cfg = SolverConfig { init: Init::PointMass { cell: 99 }, ..Default::default() };
        assert!(matches!(frank_wolfe_minimize(&t, &u, &Domain::full(&g), &cfg), Err(Error::BadInitialization)));
    }

    #[test]
    fn single_cell_height_ascent() {
        let (g, t, _, u) = balayage_setup(16);
        let mut mask = vec![false; g.len()];
        mask[3] = true;
        let d = Domain::from_mask(&g, mask).unwrap();
        let (m, tr) = height_ascent(&t, &u, &d, &SolverConfig::default()).unwrap();
        assert_eq!(m.weights()[3], 1.0);
        let v = generated_potential(&t, &u, &m).unwrap();
        assert!(tr.records.iter().all(|r| r.objective == v.values()[3]));
    }

    #[test]
    fn diffusion_raises_far_field() {
        let g = GridSpec::centered_cube(1, 4.0, 128).unwrap();
        let k = Kernel::riesz(1, -0.5).unwrap();
        let t = KernelTable::new(&k, &g).unwrap();
        let d = Domain::full(&g);
        let m = DiscreteMeasure::point_mass(&g, 64);
        let (out, rep) = microscopic_diffusion(&t, &d, &m, 64, 4.0 * g.spacing()).unwrap();
        assert!((out.mass() - 1.0).abs() < 1e-12);
        assert!(rep.min_far_field > 0.0);
        let far = DiscreteMeasure::point_mass(&g, 10);
        assert!(matches!(microscopic_diffusion(&t, &d, &far, 64, 4.0 * g.spacing()), Err(Error::EmptySigma)));
    }

    #[test]
    fn height_ascent_reaches_zero_for_balayage() {
        let (g, t, phi, u) = balayage_setup(128);
        let d = Domain::full(&g);
        let (m, tr) = height_ascent(&t, &u, &d, &SolverConfig::default()).unwrap();
        let (h, _) = height(&t, &u, &m, &d).unwrap();
        assert!((-1e-3..=1e-9).contains(&h), "{h}");
        assert_eq!(tr.records.iter().map(|r| r.objective).fold(f64::NEG_INFINITY, f64::max), h);
        let cfg = SolverConfig { init: Init::Random, seed: 3, ..Default::default() };
        let (m2, _) = height_ascent(&t, &u, &d, &cfg).unwrap();
        let (h2, _) = height(&t, &u, &m2, &d).unwrap();
        assert!((h - h2).abs() < 1e-3);
        assert!(m.l1_distance(&phi).unwrap() < 0.5);
    }
}
