//! TOML experiment files.
//!
//! ```toml
//! [kernel]
//! dim = 1
//! variant = "riesz"
//! b = -0.5
//!
//! [domain]
//! kind = "full_space"
//! half_width = 2.0
//! n = 256
//!
//! [potential]
//! builder = "balayage"
//! omega_mass = 1.0
//! eps = 0.5
//!
//! [solver]
//! max_iters = 5000
//! ```
//!
//! Relative file paths are resolved against the directory of the config.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExternalPotential, KernelTable};
use crate::grid::{bump, DiscreteMeasure, Domain, DomainKind, GridSpec};
use crate::kernel::{Kernel, KernelVariant, QuadratureOptions};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSection,
    #[serde(default)]
    pub domain: Option<DomainSection>,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub el: ElSection,
    #[serde(default)]
    pub repr: ReprSection,
    #[serde(default)]
    pub fourier: FourierSection,
}

/// `dim` plus either the fields of a kernel variant or `table_file`
/// (two-column `radius,value` CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSection {
    pub dim: usize,
    #[serde(default)]
    pub table_file: Option<PathBuf>,
    #[serde(flatten)]
    pub params: toml::Table,
}

/// Grid extents, either `half_width` + `n` (centered cube) or
/// `origin` + `spacing` + `shape`, and the domain kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSection {
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default)]
    pub shape: Option<Vec<usize>>,
    /// One Φ value per line, for `curved_half_space`.
    #[serde(default)]
    pub phi_file: Option<PathBuf>,
    #[serde(flatten)]
    pub kind: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSection {
    #[default]
    Zero,
    BumpWell {
        depth: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `U = −W*ω`, `ω = omega_mass · (normalized bump of radius eps)`.
    Balayage {
        omega_mass: f64,
        #[serde(default = "default_omega_eps")]
        eps: f64,
    },
    /// CSV as written for potential fields (`i..,x..,value`).
    Tabulated {
        file: PathBuf,
        #[serde(default)]
        u_infty: f64,
    },
}

fn default_omega_eps() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub r_list: Vec<f64>,
    pub alpha: f64,
    /// Mollifier radius (candidates, and φ in the non-existence scenario).
    pub eps: Option<f64>,
    pub tol: f64,
    /// `"minimizer"` (default) or `"omega"` (the normalized balayage source).
    pub candidate: String,
    pub candidate_file: Option<PathBuf>,
    /// Measure for the truncation probe; a Gaussian of width `sigma` if unset.
    pub measure_file: Option<PathBuf>,
    pub sigma: f64,
    /// Truncation agreement tolerance.
    pub truncation_tol: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            r_list: vec![2.0, 3.0, 4.0],
            alpha: 0.9,
            eps: None,
            tol: 1e-6,
            candidate: "minimizer".into(),
            candidate_file: None,
            measure_file: None,
            sigma: 1.0,
            truncation_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ElSection {
    /// Absolute tolerance; `1e−3·|C0| + 1e−9` if unset.
    pub tol: Option<f64>,
    /// Measure checked by `el-verify`.
    pub measure_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReprSection {
    /// Radii sampled along the first axis.
    pub radii: Vec<f64>,
    pub eps: f64,
    pub r_max: f64,
    pub max_rel_error: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for ReprSection {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 0.75, 1.0, 1.5, 2.0],
            eps: 1e-3,
            r_max: 1e3,
            max_rel_error: 0.02,
            quadrature: QuadratureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierSection {
    /// Frequencies sampled along the first axis.
    pub frequencies: Vec<f64>,
    pub eps: f64,
    pub r_max: f64,
    pub max_rel_error: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for FourierSection {
    fn default() -> Self {
        Self {
            frequencies: vec![1.0, 2.0],
            eps: 1e-6,
            r_max: 1e3,
            max_rel_error: 0.03,
            quadrature: QuadratureOptions::default(),
        }
    }
}

/// A parsed config with its location, for resolving relative paths.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base: PathBuf,
    pub text: String,
}

fn toml_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(toml_err)
    }
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let config = ExperimentConfig::from_toml(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let me = Self { config, base, text };
        me.validate()?;
        Ok(me)
    }

    pub fn from_str(text: &str, base: &Path) -> Result<Self> {
        let me = Self { config: ExperimentConfig::from_toml(text)?, base: base.to_path_buf(), text: text.to_string() };
        me.validate()?;
        Ok(me)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Referenced files exist and the kernel parameters are admissible.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        let mut files: Vec<&PathBuf> = Vec::new();
        files.extend(c.kernel.table_file.iter());
        if let Some(d) = &c.domain {
            files.extend(d.phi_file.iter());
        }
        if let PotentialSection::Tabulated { file, .. } = &c.potential {
            files.push(file);
        }
        files.extend(c.probe.candidate_file.iter());
        files.extend(c.probe.measure_file.iter());
        files.extend(c.el.measure_file.iter());
        for f in files {
            let p = self.resolve(f);
            if !p.is_file() {
                return Err(Error::InvalidParameter(format!("referenced file not found: {}", p.display())));
            }
        }
        self.kernel()?;
        c.solver.validate()
    }

    pub fn kernel(&self) -> Result<Kernel> {
        let k = &self.config.kernel;
        if let Some(f) = &k.table_file {
            let file = fs::File::open(self.resolve(f))?;
            return Kernel::tabulated_from_csv(k.dim, BufReader::new(file));
        }
        let variant: KernelVariant = k.params.clone().try_into().map_err(toml_err)?;
        Kernel::new(k.dim, variant)
    }

    fn domain_section(&self) -> Result<&DomainSection> {
        self.config.domain.as_ref().ok_or_else(|| Error::InvalidParameter("missing [domain] section".into()))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let d = self.domain_section()?;
        let dim = self.config.kernel.dim;
        match (d.half_width, d.n, &d.origin, d.spacing, &d.shape) {
            (Some(hw), Some(n), None, None, None) => GridSpec::centered_cube(dim, hw, n),
            (None, None, Some(o), Some(h), Some(s)) => GridSpec::new(o.clone(), h, s.clone()),
            _ => Err(Error::InvalidParameter(
                "[domain] needs either half_width and n, or origin, spacing and shape".into(),
            )),
        }
    }

    pub fn domain(&self, grid: &GridSpec) -> Result<Domain> {
        let d = self.domain_section()?;
        let mut kind_table = d.kind.clone();
        if !kind_table.contains_key("kind") {
            kind_table.insert("kind".into(), toml::Value::String("full_space".into()));
        }
        if let Some(f) = &d.phi_file {
            let text = fs::read_to_string(self.resolve(f))?;
            let phi = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.parse::<f64>().map_err(toml_err))
                .collect::<Result<Vec<f64>>>()?;
            kind_table.insert("phi".into(), toml::Value::Array(phi.into_iter().map(toml::Value::Float).collect()));
        }
        let kind: DomainKind = kind_table.try_into().map_err(toml_err)?;
        Domain::new(kind, grid)
    }

    /// `ω` of a balayage potential (with its mass), or `None`.
    pub fn omega(&self, grid: &GridSpec) -> Result<Option<DiscreteMeasure>> {
        match &self.config.potential {
            PotentialSection::Balayage { omega_mass, eps } => {
                if !(*omega_mass > 0.0) {
                    return Err(Error::InvalidParameter("omega_mass must be > 0".into()));
                }
                Ok(Some(centered_bump(grid, *eps)?.scaled(*omega_mass)?))
            }
            _ => Ok(None),
        }
    }

    pub fn potential(&self, table: &KernelTable) -> Result<ExternalPotential> {
        let grid = table.grid();
        match &self.config.potential {
            PotentialSection::Zero => Ok(ExternalPotential::zero(grid)),
            PotentialSection::BumpWell { depth, radius, center } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; grid.dim()]);
                ExternalPotential::bump_well(grid, *depth, *radius, &c)
            }
            PotentialSection::Balayage { .. } => {
                let omega = self.omega(grid)?.expect("balayage section has ω");
                ExternalPotential::balayage(table, &omega)
            }
            PotentialSection::Tabulated { file, u_infty } => {
                let f = fs::File::open(self.resolve(file))?;
                ExternalPotential::read_csv(grid, BufReader::new(f), *u_infty)
            }
        }
    }

    /// Measure CSV referenced by the config.
    pub fn read_measure(&self, grid: &GridSpec, path: &Path) -> Result<DiscreteMeasure> {
        let f = fs::File::open(self.resolve(path))?;
        DiscreteMeasure::read_csv(grid, BufReader::new(f))
    }
}

/// Normalized `bump(|x|/eps)` sampled at cell centers.
pub fn centered_bump(grid: &GridSpec, eps: f64) -> Result<DiscreteMeasure> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be > 0".into()));
    }
    DiscreteMeasure::from_density(grid, |x| bump(x.iter().map(|v| v * v).sum::<f64>().sqrt() / eps))
        .map_err(|_| Error::MollifierUnderResolved { eps, h: grid.spacing() })
}
