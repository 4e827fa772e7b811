//! Command-line front end. Exit codes: 0 pass, 1 error, 2 refuted or
//! not_exists, 3 inconclusive or not converged.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    existence_probe, interior_height, nonexistence_scenario, truncation_probe, verify_euler_lagrange, ELReport,
    ProbeOptions, ProbeReport, Verdict,
};
use crate::config::{centered_bump, LoadedConfig};
use crate::error::{Error, Result};
use crate::field::{ExternalPotential, KernelTable};
use crate::grid::{DiscreteMeasure, Domain, GridSpec};
use crate::kernel::{fourier_estimate, representation_reconstruct, Kernel};
use crate::solver::{frank_wolfe_minimize, height_ascent, SolveTrace, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "frostman", version, about = "Interaction-energy minimization experiments")]
pub struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the cell-parallel loops.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Certify essential convexity of the kernel.
    KernelCheck,
    /// Frank–Wolfe minimization followed by the Euler–Lagrange check.
    Minimize,
    /// Height ascent with a duality report against the minimizer.
    Height,
    /// Existence, non-existence and truncation probes.
    Probe {
        #[command(subcommand)]
        kind: ProbeCommand,
    },
    /// Reconstruct W from ΔW and compare with the closed form.
    Repr,
    /// Fourier-side estimate and its power law.
    Fourier,
    /// Euler–Lagrange residuals of a measure read from disk.
    ElVerify,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ProbeCommand {
    Exist,
    Nonexist,
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Error = 1,
    Refuted = 2,
    Inconclusive = 3,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::KernelCheck => "kernel-check",
            Command::Minimize => "minimize",
            Command::Height => "height",
            Command::Probe { kind: ProbeCommand::Exist } => "probe exist",
            Command::Probe { kind: ProbeCommand::Nonexist } => "probe nonexist",
            Command::Probe { kind: ProbeCommand::Truncate } => "probe truncate",
            Command::Repr => "repr",
            Command::Fourier => "fourier",
            Command::ElVerify => "el-verify",
        }
    }
}

/// Artifacts of one command, written temp-then-rename.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_vec_pretty(value)?;
        s.push(b'\n');
        self.write(name, &s)
    }

    fn measure(&mut self, name: &str, m: &DiscreteMeasure) -> Result<()> {
        let mut buf = Vec::new();
        m.write_csv(&mut buf)?;
        self.write(name, &buf)
    }

    fn trace(&mut self, name: &str, t: &SolveTrace) -> Result<()> {
        let mut buf = Vec::new();
        t.write_csv(&mut buf)?;
        self.write(name, &buf)
    }
}

/// Everything a command needs from the config.
struct Setup {
    cfg: LoadedConfig,
    solver: SolverConfig,
}

impl Setup {
    fn grid(&self) -> Result<GridSpec> {
        self.cfg.grid()
    }
    fn problem(&self) -> Result<(Kernel, GridSpec, KernelTable, ExternalPotential, Domain)> {
        let k = self.cfg.kernel()?;
        let g = self.grid()?;
        let t = KernelTable::new(&k, &g)?;
        let u = self.cfg.potential(&t)?;
        let d = self.cfg.domain(&g)?;
        Ok((k, g, t, u, d))
    }
}

fn el_with_default_tol(
    setup: &Setup,
    t: &KernelTable,
    u: &ExternalPotential,
    d: &Domain,
    m: &DiscreteMeasure,
) -> Result<ELReport> {
    let tol = match setup.cfg.config.el.tol {
        Some(tol) => tol,
        None => 1e-3 * verify_euler_lagrange(t, u, d, m, 0.0)?.c0.abs() + 1e-9,
    };
    verify_euler_lagrange(t, u, d, m, tol)
}

fn verdict_exit(v: Verdict) -> Exit {
    match v {
        Verdict::Exists | Verdict::Pass => Exit::Pass,
        Verdict::NotExists | Verdict::Fail => Exit::Refuted,
        Verdict::Inconclusive => Exit::Inconclusive,
    }
}

fn write_probe(out: &mut Outputs, mut rep: ProbeReport) -> Result<(Exit, String)> {
    for (name, m) in std::mem::take(&mut rep.witnesses) {
        let file = format!("witness_{name}.csv");
        out.measure(&file, &m)?;
        rep.witness_files.push(file);
    }
    out.json("probe.json", &rep)?;
    let exit = verdict_exit(rep.verdict);
    let v = serde_json::to_value(rep.verdict)?;
    Ok((exit, format!("{:?} verdict {} margin {:e}", rep.probe, v.as_str().unwrap_or("?"), rep.margin)))
}

fn kernel_check(setup: &Setup, out: &mut Outputs) -> Result<(Exit, String)> {
    let k = setup.cfg.kernel()?;
    let cert = k.certificate()?;
    out.json("certificate.json", &cert)?;
    let exit = if cert.is_essentially_convex { Exit::Pass } else { Exit::Refuted };
    Ok((
        exit,
        format!("essentially convex: {} (min ΔW sample {:e})", cert.is_essentially_convex, cert.min_laplacian_samples),
    ))
}

fn minimize(setup: &Setup, out: &mut Outputs) -> Result<(Exit, String)> {
    let (_, g, t, u, d) = setup.problem()?;
    let (m, trace) = frank_wolfe_minimize(&t, &u, &d, &setup.solver)?;
    let el = el_with_default_tol(setup, &t, &u, &d, &m)?;
    let energy = crate::field::energy(&t, &u, &m)?;
    let l1 = match setup.cfg.omega(&g)? {
        Some(w) if (w.mass() - 1.0).abs() < 1e-12 => Some(m.l1_distance(&w)?),
        _ => None,
    };
    out.measure("measure.csv", &m)?;
    out.trace("trace.csv", &trace)?;
    out.json(
        "report.json",
        &json!({
            "status": trace.status,
            "iterations": trace.records.len(),
            "polished": trace.polished,
            "energy": energy,
            "el": el,
            "l1_to_omega": l1,
        }),
    )?;
    if !trace.converged() {
        return Ok((Exit::Inconclusive, "not converged".into()));
    }
    let exit = if el.pass { Exit::Pass } else { Exit::Inconclusive };
    Ok((exit, format!("energy {energy:e}, C0 {:e}, EL pass: {}", el.c0, el.pass)))
}

fn height_cmd(setup: &Setup, out: &mut Outputs) -> Result<(Exit, String)> {
    let (_, _, t, u, d) = setup.problem()?;
    let (hm, htrace) = height_ascent(&t, &u, &d, &setup.solver)?;
    let (fm, _) = frank_wolfe_minimize(&t, &u, &d, &setup.solver)?;
    let el = el_with_default_tol(setup, &t, &u, &d, &fm)?;
    let h = crate::field::height(&t, &u, &hm, &d)?.0;
    let h_int = interior_height(&t, &u, &d, &hm).unwrap_or(h);
    let h_fw = interior_height(&t, &u, &d, &fm).unwrap_or(f64::NAN);
    let gap = (h_int - el.c0).abs();
    let tol = 1e-3 * (1.0 + el.c0.abs());
    out.measure("height_measure.csv", &hm)?;
    out.trace("height_trace.csv", &htrace)?;
    out.json(
        "duality.json",
        &json!({
            "height": h,
            "interior_height": h_int,
            "minimizer_interior_height": h_fw,
            "c0": el.c0,
            "duality_gap": gap,
            "tolerance": tol,
            "l1_between": hm.l1_distance(&fm)?,
            "pass": gap <= tol,
        }),
    )?;
    let exit = if gap <= tol { Exit::Pass } else { Exit::Inconclusive };
    Ok((exit, format!("height {h:e}, C0 {:e}, gap {gap:e}", el.c0)))
}

fn probe_options(setup: &Setup) -> ProbeOptions {
    let p = &setup.cfg.config.probe;
    ProbeOptions { solver: setup.solver.clone(), eps: p.eps, tol: p.tol }
}

fn probe(setup: &Setup, kind: ProbeCommand, out: &mut Outputs) -> Result<(Exit, String)> {
    let p = &setup.cfg.config.probe;
    match kind {
        ProbeCommand::Exist => {
            let (k, g, t, u, d) = setup.problem()?;
            let cand = if let Some(f) = &p.candidate_file {
                Some(setup.cfg.read_measure(&g, f)?)
            } else {
                match p.candidate.as_str() {
                    "minimizer" => None,
                    "omega" => Some(
                        setup
                            .cfg
                            .omega(&g)?
                            .ok_or_else(|| {
                                Error::InvalidParameter("candidate = \"omega\" needs a balayage potential".into())
                            })?
                            .normalize()?,
                    ),
                    other => return Err(Error::InvalidParameter(format!("unknown candidate source '{other}'"))),
                }
            };
            let rep = existence_probe(&k, &t, &u, &d, cand.as_ref(), &probe_options(setup))?;
            write_probe(out, rep)
        }
        ProbeCommand::Nonexist => {
            let k = setup.cfg.kernel()?;
            let g = setup.grid()?;
            let t = KernelTable::new(&k, &g)?;
            let phi = centered_bump(&g, p.eps.unwrap_or(1.0))?;
            let rep = nonexistence_scenario(&k, &t, p.alpha, &phi, &p.r_list, &probe_options(setup))?;
            write_probe(out, rep)
        }
        ProbeCommand::Truncate => {
            let (_, g, t, u, _) = setup.problem()?;
            let m = match &p.measure_file {
                Some(f) => setup.cfg.read_measure(&g, f)?,
                None => {
                    let s2 = 2.0 * p.sigma * p.sigma;
                    DiscreteMeasure::from_density(&g, |x| (-x.iter().map(|v| v * v).sum::<f64>() / s2).exp())?
                }
            };
            let rep = truncation_probe(&t, &u, &m, &p.r_list, p.truncation_tol)?;
            write_probe(out, rep)
        }
    }
}

fn axis_point(d: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[0] = r;
    x
}

fn error_table(header: &str, rows: &[[f64; 4]]) -> Vec<u8> {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", r[0], r[1], r[2], r[3]));
    }
    s.into_bytes()
}

fn repr(setup: &Setup, out: &mut Outputs) -> Result<(Exit, String)> {
    let k = setup.cfg.kernel()?;
    let c = &setup.cfg.config.repr;
    let mut rows = Vec::new();
    for &r in &c.radii {
        let x = axis_point(k.dim(), r);
        let v = representation_reconstruct(&k, &x, c.eps, c.r_max, &c.quadrature)?;
        let exact = k.evaluate(&x);
        rows.push([r, v, exact, (v - exact).abs() / exact.abs()]);
    }
    out.write("repr.csv", &error_table("x,reconstructed,reference,relative_error", &rows))?;
    let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let exit = if worst <= c.max_rel_error { Exit::Pass } else { Exit::Inconclusive };
    Ok((exit, format!("max relative error {worst:e}")))
}

fn fourier(setup: &Setup, out: &mut Outputs) -> Result<(Exit, String)> {
    let k = setup.cfg.kernel()?;
    let c = &setup.cfg.config.fourier;
    if c.frequencies.is_empty() {
        return Err(Error::InvalidParameter("no frequencies".into()));
    }
    let d = k.dim() as f64;
    // only pure power laws have a reference: the ratio law anchored at the first frequency
    let power = k.declared_exponents().filter(|(a, b)| a == b).map(|(b, _)| -d - b);
    let mut rows = Vec::new();
    let mut anchor = None;
    for &q in &c.frequencies {
        let est = fourier_estimate(&k, &axis_point(k.dim(), q), c.eps, c.r_max, &c.quadrature)?;
        let (q0, e0) = *anchor.get_or_insert((q, est));
        let reference = power.map_or(f64::NAN, |p| e0 * (q / q0).powf(p));
        rows.push([q, est, reference, (est - reference).abs() / reference.abs()]);
    }
    out.write("fourier.csv", &error_table("xi,estimate,reference,relative_error", &rows))?;
    let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let exit = if power.is_some() && worst <= c.max_rel_error { Exit::Pass } else { Exit::Inconclusive };
    Ok((exit, format!("max relative error against the power law {worst:e}")))
}

fn el_verify(setup: &Setup, out: &mut Outputs) -> Result<(Exit, String)> {
    let (_, g, t, u, d) = setup.problem()?;
    let f = setup
        .cfg
        .config
        .el
        .measure_file
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("[el] measure_file is required".into()))?;
    let m = setup.cfg.read_measure(&g, f)?;
    let el = el_with_default_tol(setup, &t, &u, &d, &m)?;
    out.json("el_report.json", &el)?;
    let exit = if el.pass { Exit::Pass } else { Exit::Refuted };
    Ok((
        exit,
        format!("C0 {:e}, support residual {:e}, domain residual {:e}", el.c0, el.residual_support, el.residual_domain),
    ))
}

fn dispatch(cli: &Cli, out: &mut Outputs) -> Result<(Exit, String)> {
    let path = cli.config.as_ref().ok_or_else(|| Error::InvalidParameter("--config is required".into()))?;
    let cfg = LoadedConfig::read(path)?;
    let mut solver = cfg.config.solver.clone();
    if let Some(s) = cli.seed {
        solver.seed = s;
    }
    let setup = Setup { cfg, solver };
    match cli.command {
        Command::KernelCheck => kernel_check(&setup, out),
        Command::Minimize => minimize(&setup, out),
        Command::Height => height_cmd(&setup, out),
        Command::Probe { kind } => probe(&setup, kind, out),
        Command::Repr => repr(&setup, out),
        Command::Fourier => fourier(&setup, out),
        Command::ElVerify => el_verify(&setup, out),
    }
}

/// Parse arguments, run one command, return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Error as i32 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // a global pool may already exist when called from tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let mut out = match Outputs::new(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Error as i32;
        }
    };
    let (exit, message) = match dispatch(&cli, &mut out) {
        Ok(r) => r,
        Err(e) => (Exit::Error, e.to_string()),
    };
    if exit == Exit::Error {
        eprintln!("error: {message}");
    } else {
        println!("{}: {message}", cli.command.name());
    }
    let manifest = json!({
        "command": cli.command.name(),
        "config_path": cli.config,
        "config": cli.config.as_ref().and_then(|p| fs::read_to_string(p).ok()),
        "seed": cli.seed,
        "threads": cli.threads,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "exit_code": exit as i32,
        "outputs": out.files.clone(),
    });
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("error: could not write manifest: {e}");
        return Exit::Error as i32;
    }
    exit as i32
}
