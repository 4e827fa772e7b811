//! Lattice convolution engine, external potentials, generated potentials,
//! energies and the height functional.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{bump, DiscreteMeasure, Domain, GridSpec};
use crate::kernel::Kernel;
use crate::quadrature::box_average;

/// How table entries are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    /// Cell averages on the 3^d near field of singular kernels, midpoint
    /// values elsewhere and for bounded kernels.
    #[default]
    Auto,
    /// Midpoint values everywhere (bounded kernels only).
    Midpoint,
    /// Cell averages on the 3^d near field regardless of singularity.
    Averaged,
}

/// Relative tolerance of the near-field cell averages.
pub const CELL_AVERAGE_TOL: f64 = 1e-6;
const CELL_AVERAGE_MAX_REGIONS: usize = 400_000;

/// `T[Δk]` for every lattice offset with `|Δk_a| < n_a`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: GridSpec,
    tshape: Vec<usize>,
    values: Vec<f64>,
    /// Table position of each grid cell; `T[i − j] = values[pos[i] − pos[j] + center]`.
    pos: Vec<usize>,
    center: usize,
}

impl KernelTable {
    pub fn new(k: &Kernel, grid: &GridSpec) -> Result<Self> {
        Self::with_mode(k, grid, TableMode::Auto)
    }

    pub fn with_mode(k: &Kernel, grid: &GridSpec, mode: TableMode) -> Result<Self> {
        if k.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: k.dim() });
        }
        if !k.locally_integrable() {
            return Err(Error::NotLocallyIntegrable);
        }
        let d = grid.dim();
        let h = grid.spacing();
        let tshape: Vec<usize> = grid.shape().iter().map(|n| 2 * n - 1).collect();
        let tgrid = GridSpec::new(vec![0.0; d], h, tshape.clone())?;
        let len = tgrid.len();
        let averaged = match mode {
            TableMode::Auto => k.is_singular(),
            TableMode::Midpoint => {
                if k.is_singular() {
                    return Err(Error::InvalidParameter("midpoint tables need a bounded kernel".into()));
                }
                false
            }
            TableMode::Averaged => true,
        };
        let offsets = |t: usize| -> Vec<i64> {
            tgrid.multi_index(t).iter().zip(grid.shape()).map(|(&i, &n)| i as i64 - (n as i64 - 1)).collect()
        };
        let values: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|t| {
                let off = offsets(t);
                let x: Vec<f64> = off.iter().map(|&o| o as f64 * h).collect();
                let near = off.iter().all(|o| o.abs() <= 1);
                if averaged && near {
                    let lo: Vec<f64> = x.iter().map(|c| c - 0.5 * h).collect();
                    let hi: Vec<f64> = x.iter().map(|c| c + 0.5 * h).collect();
                    box_average(|y| k.evaluate(y), &lo, &hi, CELL_AVERAGE_TOL, CELL_AVERAGE_MAX_REGIONS).value
                } else {
                    k.evaluate(&x)
                }
            })
            .collect();
        // enforce T[Δk] = T[−Δk] bitwise (the table is centrally symmetric)
        let mut values = values;
        for t in 0..len / 2 {
            let mirror = len - 1 - t;
            values[mirror] = values[t];
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotLocallyIntegrable);
        }
        let tstrides = tgrid.strides();
        let pos =
            (0..grid.len()).map(|i| grid.multi_index(i).iter().zip(&tstrides).map(|(k, s)| k * s).sum()).collect();
        let center = grid.shape().iter().zip(&tstrides).map(|(n, s)| (n - 1) * s).sum();
        Ok(Self { grid: grid.clone(), tshape, values, pos, center })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn table_shape(&self) -> &[usize] {
        &self.tshape
    }

    /// `T[i − j]` for grid cells `i, j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.pos[i] + self.center - self.pos[j]]
    }

    /// `T` at a signed lattice offset, `None` outside the table.
    pub fn at_offset(&self, off: &[i64]) -> Option<f64> {
        let mut t = 0usize;
        let mut stride = 1usize;
        for a in (0..self.tshape.len()).rev() {
            let n = self.grid.shape()[a] as i64;
            let k = off[a] + n - 1;
            if k < 0 || k >= self.tshape[a] as i64 {
                return None;
            }
            t += k as usize * stride;
            stride *= self.tshape[a];
        }
        Some(self.values[t])
    }

    /// Smallest tabulated entry.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn diagonal(&self) -> f64 {
        self.values[self.center]
    }

    /// `Σ_j T[i−j] w_j` at every cell in `targets` (all cells if `None`).
    pub fn convolve(&self, w: &[f64], targets: Option<&[usize]>) -> Vec<f64> {
        let support: Vec<(usize, f64)> = w.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        let row = |i: usize| support.iter().map(|&(j, v)| self.get(i, j) * v).sum::<f64>();
        match targets {
            None => (0..self.grid.len()).into_par_iter().map(row).collect(),
            Some(t) => t.par_iter().map(|&i| row(i)).collect(),
        }
    }

    /// `Σ_{i,j} T[i−j] a_i b_j`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let sb: Vec<(usize, f64)> = b.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        a.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(i, &ai)| ai * sb.iter().map(|&(j, bj)| self.get(i, j) * bj).sum::<f64>())
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }
}

/// Provenance of an external potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum PotentialBuilder {
    Zero,
    Tabulated,
    /// `U = −depth·e·exp(−1/(1 − |x−c|²/radius²))` inside the ball, 0 outside.
    BumpWell {
        depth: f64,
        radius: f64,
        center: Vec<f64>,
    },
    /// `U = −W*ω` with `ω` of total mass `omega_mass`.
    Balayage {
        omega_mass: f64,
    },
}

/// `U` tabulated on the grid, with its declared limit at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalPotential {
    grid: GridSpec,
    values: Vec<f64>,
    u_infty: f64,
    builder: PotentialBuilder,
}

impl ExternalPotential {
    pub fn tabulated(grid: &GridSpec, values: Vec<f64>, u_infty: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) || !u_infty.is_finite() {
            return Err(Error::InvalidParameter("U must be finite (bounded from below)".into()));
        }
        Ok(Self { grid: grid.clone(), values, u_infty, builder: PotentialBuilder::Tabulated })
    }

    pub fn zero(grid: &GridSpec) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()], u_infty: 0.0, builder: PotentialBuilder::Zero }
    }

    pub fn bump_well(grid: &GridSpec, depth: f64, radius: f64, center: &[f64]) -> Result<Self> {
        if center.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: center.len() });
        }
        if !(depth >= 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidParameter("bump well needs depth ≥ 0 and radius > 0".into()));
        }
        let mut c = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.center_into(i, &mut c);
                let r = c.iter().zip(center).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() / radius;
                -depth * std::f64::consts::E * bump(r)
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            values,
            u_infty: 0.0,
            builder: PotentialBuilder::BumpWell { depth, radius, center: center.to_vec() },
        })
    }

    /// `U = −W*ω` through the lattice convolution; `ω` may have any mass.
    pub fn balayage(table: &KernelTable, omega: &DiscreteMeasure) -> Result<Self> {
        table.grid().ensure_same(omega.grid())?;
        let values = table.convolve(omega.weights(), None).into_iter().map(|v| -v).collect();
        Ok(Self {
            grid: table.grid().clone(),
            values,
            u_infty: 0.0,
            builder: PotentialBuilder::Balayage { omega_mass: omega.mass() },
        })
    }

    /// Two-column-plus CSV as written by [`PotentialField::write_csv`]
    /// (`i0..,x0..,value`); `u_infty` is supplied separately.
    pub fn read_csv<R: BufRead>(grid: &GridSpec, input: R, u_infty: f64) -> Result<Self> {
        let d = grid.dim();
        let mut values = vec![f64::NAN; grid.len()];
        let mut lines = input.lines();
        lines.next().ok_or_else(|| Error::Parse("empty potential CSV".into()))??;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 2 * d + 1 {
                return Err(Error::Parse(format!("bad row '{line}'")));
            }
            let idx = f[..d]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let cell = grid.checked_flat(&idx).ok_or_else(|| Error::Parse(format!("index off grid in '{line}'")))?;
            values[cell] = f[2 * d].parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("potential CSV does not cover every cell".into()));
        }
        Self::tabulated(grid, values, u_infty)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn u_infty(&self) -> f64 {
        self.u_infty
    }
    pub fn builder(&self) -> &PotentialBuilder {
        &self.builder
    }

    pub fn minimum(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `a·U + c` (keeps `U_∞` consistent).
    pub fn affine(&self, a: f64, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v + c).collect(),
            u_infty: a * self.u_infty + c,
            builder: self.builder.clone(),
        }
    }

    pub fn as_field(&self) -> PotentialField {
        PotentialField { grid: self.grid.clone(), values: self.values.clone() }
    }
}

/// Values of `V[ρ] = W*ρ + U` at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Minimum over masked cells, ties to the smallest index.
    pub fn min_over(&self, mask: &[bool]) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (i, (&v, &m)) in self.values.iter().zip(mask).enumerate() {
            if m && best.is_none_or(|(b, _)| v < b) {
                best = Some((v, i));
            }
        }
        best
    }

    /// CSV `i0..,x0..,V` over all cells.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.grid.dim();
        let header: Vec<String> =
            (0..d).map(|a| format!("i{a}")).chain((0..d).map(|a| format!("x{a}"))).chain(["V".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        let mut c = vec![0.0; d];
        for (i, v) in self.values.iter().enumerate() {
            self.grid.center_into(i, &mut c);
            let mut row: Vec<String> = self.grid.multi_index(i).iter().map(|k| k.to_string()).collect();
            row.extend(c.iter().map(|x| format!("{x:.16e}")));
            row.push(format!("{v:.16e}"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn ensure_grids(table: &KernelTable, u: &ExternalPotential, m: &DiscreteMeasure) -> Result<()> {
    table.grid().ensure_same(u.grid())?;
    table.grid().ensure_same(m.grid())
}

/// `V[m] = W*m + U` by direct summation over the support of `m`.
pub fn generated_potential(table: &KernelTable, u: &ExternalPotential, m: &DiscreteMeasure) -> Result<PotentialField> {
    ensure_grids(table, u, m)?;
    let mut v = table.convolve(m.weights(), None);
    for (x, ui) in v.iter_mut().zip(u.values()) {
        *x += ui;
    }
    Ok(PotentialField { grid: table.grid().clone(), values: v })
}

/// `E = ½ Σ T[i−j] w_i w_j + Σ U_i w_i`.
pub fn energy(table: &KernelTable, u: &ExternalPotential, m: &DiscreteMeasure) -> Result<f64> {
    ensure_grids(table, u, m)?;
    let w = m.weights();
    let inter = table.bilinear(w, w);
    let ext: f64 = w.iter().zip(u.values()).map(|(a, b)| a * b).sum();
    Ok(0.5 * inter + ext)
}

/// Interaction part `½ Σ T[i−j] w_i w_j` alone.
pub fn interaction_energy(table: &KernelTable, m: &DiscreteMeasure) -> Result<f64> {
    table.grid().ensure_same(m.grid())?;
    Ok(0.5 * table.bilinear(m.weights(), m.weights()))
}

/// `H_S[m] = min_{S} V[m]` with its witness cell.
pub fn height(table: &KernelTable, u: &ExternalPotential, m: &DiscreteMeasure, s: &Domain) -> Result<(f64, usize)> {
    table.grid().ensure_same(s.grid())?;
    if s.count() == 0 {
        return Err(Error::EmptyS);
    }
    let v = generated_potential(table, u, m)?;
    v.min_over(s.mask()).ok_or(Error::EmptyS)
}
