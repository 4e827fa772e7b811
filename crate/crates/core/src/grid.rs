//! Uniform lattices, feasibility masks and discrete probability measures.
//!
//! A cell belongs to a set (the domain `D`, a ball, a support) iff its
//! center does. Every measure-level operation below works on cell weights
//! and keeps them on the same lattice.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass tolerance for probability measures.
pub const MASS_TOL: f64 = 1e-12;

/// Weight threshold used by [`DiscreteMeasure::support_diameter`].
pub const DIAMETER_THRESHOLD: f64 = 1e-10;

/// Axis-aligned uniform lattice. Cell `k` has center `origin + (k + ½)·h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("grid dimension must be ≥ 1".into()));
        }
        if shape.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: shape.len() });
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!("spacing must be > 0, got {spacing}")));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidParameter("every shape entry must be ≥ 1".into()));
        }
        Ok(Self { dim, origin, spacing, shape })
    }

    /// Cube `[-half_width, half_width]^d` split into `n` cells per axis.
    pub fn centered_cube(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        Self::new(vec![-half_width; dim], h, vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim];
        for a in (0..self.dim.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Flat index for a signed multi-index, or `None` off the grid.
    pub fn checked_flat(&self, idx: &[i64]) -> Option<usize> {
        let mut acc = 0usize;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            if i < 0 || i as usize >= n {
                return None;
            }
            acc = acc * n + i as usize;
        }
        Some(acc)
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        self.center_into(flat, &mut c);
        c
    }

    pub fn center_into(&self, mut flat: usize, out: &mut [f64]) {
        for a in (0..self.dim).rev() {
            let k = flat % self.shape[a];
            flat /= self.shape[a];
            out[a] = self.origin[a] + (k as f64 + 0.5) * self.spacing;
        }
    }

    /// Cell centers of the whole grid, flattened `[x_0 .. x_{d-1}]` per cell.
    pub fn centers(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; self.len() * d];
        for (i, chunk) in out.chunks_mut(d).enumerate() {
            self.center_into(i, chunk);
        }
        out
    }

    /// Distance from the origin to the farthest cell center.
    pub fn circumradius(&self) -> f64 {
        (0..self.dim)
            .map(|a| {
                let lo = self.origin[a] + 0.5 * self.spacing;
                let hi = self.origin[a] + (self.shape[a] as f64 - 0.5) * self.spacing;
                lo.abs().max(hi.abs()).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Number of (d−1)-dimensional columns, i.e. samples needed for Φ.
    pub fn column_count(&self) -> usize {
        self.shape[..self.dim - 1].iter().product()
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids)
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Shape of the feasible set `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    FullSpace,
    /// `D = [x0, ∞)` (d = 1).
    HalfLine {
        x0: f64,
    },
    /// `D = {x_d ≥ Φ(x̂)}` with Φ sampled once per column.
    CurvedHalfSpace {
        phi: Vec<f64>,
    },
    /// Open ball `B(center; radius)`.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Explicit mask supplied by the caller.
    Custom,
}

/// Lattice with a feasibility mask.
#[derive(Debug, Clone)]
pub struct Domain {
    grid: GridSpec,
    mask: Vec<bool>,
    kind: DomainKind,
}

impl Domain {
    pub fn new(kind: DomainKind, grid: &GridSpec) -> Result<Self> {
        let d = grid.dim();
        let mut c = vec![0.0; d];
        let mut mask = vec![false; grid.len()];
        match &kind {
            DomainKind::FullSpace => mask.fill(true),
            DomainKind::HalfLine { x0 } => {
                if d != 1 {
                    return Err(Error::InvalidParameter("half_line requires d = 1".into()));
                }
                for (i, m) in mask.iter_mut().enumerate() {
                    grid.center_into(i, &mut c);
                    *m = c[0] >= *x0;
                }
            }
            DomainKind::CurvedHalfSpace { phi } => {
                let cols = grid.column_count();
                if phi.len() != cols {
                    return Err(Error::BadPhiTable { expected: cols, got: phi.len() });
                }
                let last = grid.shape()[d - 1];
                for (i, m) in mask.iter_mut().enumerate() {
                    grid.center_into(i, &mut c);
                    *m = c[d - 1] >= phi[i / last];
                }
            }
            DomainKind::Ball { center, radius } => {
                if center.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: center.len() });
                }
                for (i, m) in mask.iter_mut().enumerate() {
                    grid.center_into(i, &mut c);
                    let r2: f64 = c.iter().zip(center).map(|(x, y)| (x - y).powi(2)).sum();
                    *m = r2.sqrt() < *radius;
                }
            }
            DomainKind::Custom => return Err(Error::InvalidParameter("use Domain::from_mask for custom masks".into())),
        }
        Self::finish(grid.clone(), mask, kind)
    }

    pub fn from_mask(grid: &GridSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: mask.len() });
        }
        Self::finish(grid.clone(), mask, DomainKind::Custom)
    }

    pub fn full(grid: &GridSpec) -> Self {
        Self { grid: grid.clone(), mask: vec![true; grid.len()], kind: DomainKind::FullSpace }
    }

    fn finish(grid: GridSpec, mask: Vec<bool>, kind: DomainKind) -> Result<Self> {
        if !mask.iter().any(|&m| m) {
            return Err(Error::InfeasibleDomain);
        }
        Ok(Self { grid, mask, kind })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn cells(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// The translated-candidate argument for curved half-spaces is known in d = 2;
    /// higher-dimensional ones still run but carry this flag.
    pub fn beyond_stated_theorem(&self) -> bool {
        matches!(self.kind, DomainKind::CurvedHalfSpace { .. }) && self.grid.dim() >= 3
    }

    /// Masked cells whose whole 3^d lattice neighbourhood is on the grid and masked.
    pub fn interior(&self) -> Domain {
        let g = &self.grid;
        let d = g.dim();
        let offsets = neighbour_offsets(d);
        let mut mask = vec![false; g.len()];
        let mut idx = vec![0i64; d];
        for (i, m) in mask.iter_mut().enumerate() {
            if !self.mask[i] {
                continue;
            }
            let base = g.multi_index(i);
            *m = offsets.iter().all(|off| {
                for a in 0..d {
                    idx[a] = base[a] as i64 + off[a];
                }
                g.checked_flat(&idx).is_some_and(|j| self.mask[j])
            });
        }
        Domain { grid: g.clone(), mask, kind: DomainKind::Custom }
    }

    /// Sampled modulus of continuity of Φ at scale `eps`: the largest
    /// |Φ(x̂) − Φ(ŷ)| over column centers with |x̂ − ŷ| ≤ eps. Zero for
    /// domains without a curved boundary.
    pub fn phi_modulus(&self, eps: f64) -> f64 {
        let DomainKind::CurvedHalfSpace { phi } = &self.kind else {
            return 0.0;
        };
        let g = &self.grid;
        let d = g.dim();
        if d == 1 {
            return 0.0;
        }
        let col_shape = &g.shape()[..d - 1];
        let col_grid = GridSpec::new(g.origin()[..d - 1].to_vec(), g.spacing(), col_shape.to_vec())
            .expect("column grid inherits a valid grid");
        let reach = (eps / g.spacing()).floor() as i64;
        let mut worst = 0.0f64;
        for i in 0..col_grid.len() {
            let bi = col_grid.multi_index(i);
            for off in box_offsets(d - 1, reach) {
                let dist = off.iter().map(|&k| (k as f64 * g.spacing()).powi(2)).sum::<f64>().sqrt();
                if dist > eps {
                    continue;
                }
                let j: Vec<i64> = bi.iter().zip(&off).map(|(&b, &o)| b as i64 + o).collect();
                if let Some(j) = col_grid.checked_flat(&j) {
                    worst = worst.max((phi[i] - phi[j]).abs());
                }
            }
        }
        worst
    }
}

/// All offsets in `{-1, 0, 1}^d`.
pub fn neighbour_offsets(d: usize) -> Vec<Vec<i64>> {
    box_offsets(d, 1)
}

/// All offsets in `{-r..=r}^d`.
pub fn box_offsets(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(d as u32))
        .map(|mut flat| {
            let mut v = vec![0i64; d];
            for a in (0..d).rev() {
                v[a] = (flat % side) as i64 - r;
                flat /= side;
            }
            v
        })
        .collect()
}

/// Nonnegative weights on the cells of a grid.
///
/// Constructed through [`DiscreteMeasure::new`] the weights form a
/// probability vector; [`DiscreteMeasure::partial`] admits total mass ≤ 1
/// for the few places (scaled candidates, truncations before rescaling)
/// that need it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    grid: GridSpec,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(grid: &GridSpec, weights: Vec<f64>) -> Result<Self> {
        let m = Self::partial(grid, weights)?;
        if (m.mass() - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {} (expected 1)", m.mass())));
        }
        Ok(m)
    }

    /// Nonnegative measure of arbitrary finite mass.
    pub fn partial(grid: &GridSpec, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("negative or non-finite weight {w}")));
        }
        Ok(Self { grid: grid.clone(), weights })
    }

    pub fn point_mass(grid: &GridSpec, cell: usize) -> Self {
        let mut w = vec![0.0; grid.len()];
        w[cell] = 1.0;
        Self { grid: grid.clone(), weights: w }
    }

    /// Uniform probability over the masked cells of `domain`.
    pub fn uniform(domain: &Domain) -> Self {
        let n = domain.count() as f64;
        let w = domain.mask().iter().map(|&m| if m { 1.0 / n } else { 0.0 }).collect();
        Self { grid: domain.grid().clone(), weights: w }
    }

    /// Sample a nonnegative density at cell centers and normalize.
    pub fn from_density<F: Fn(&[f64]) -> f64>(grid: &GridSpec, density: F) -> Result<Self> {
        let mut c = vec![0.0; grid.dim()];
        let w = (0..grid.len())
            .map(|i| {
                grid.center_into(i, &mut c);
                density(&c)
            })
            .collect();
        Self::partial(grid, w)?.normalize()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i).collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::partial(&self.grid, self.weights.iter().map(|w| w * factor).collect())
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).sum())
    }

    /// `(1 − t)·self + t·other`.
    pub fn interpolate(&self, other: &Self, t: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Ok(Self { grid: self.grid.clone(), weights: w })
    }

    pub fn is_supported_in(&self, domain: &Domain) -> bool {
        self.weights.iter().zip(domain.mask()).all(|(&w, &m)| w == 0.0 || m)
    }

    /// Rescale to unit mass.
    pub fn normalize(&self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::CannotNormalize);
        }
        let w = self.weights.iter().map(|w| w / m).collect();
        Ok(Self { grid: self.grid.clone(), weights: w })
    }

    /// Mass of cells whose center lies in the open ball `B(0; r)`.
    pub fn mass_in_ball(&self, r: f64) -> f64 {
        let mut c = vec![0.0; self.grid.dim()];
        let mut m = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                self.grid.center_into(i, &mut c);
                if norm(&c) < r {
                    m += w;
                }
            }
        }
        m
    }

    /// `m·χ_{B(0;R)} / m(B(0;R))`.
    pub fn truncate_rescale(&self, r: f64) -> Result<Self> {
        let mut c = vec![0.0; self.grid.dim()];
        let w: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                self.grid.center_into(i, &mut c);
                if norm(&c) < r {
                    w
                } else {
                    0.0
                }
            })
            .collect();
        let inside: f64 = w.iter().sum();
        if !(inside > 0.0) {
            return Err(Error::EmptyTruncation);
        }
        if inside == self.mass() {
            return Ok(self.clone());
        }
        Self::partial(&self.grid, w)?.normalize()
    }

    /// Convolution with the normalized bump `exp(−1/(1 − |x/ε|²))` sampled on
    /// the lattice offsets strictly inside radius `eps`.
    pub fn mollify(&self, eps: f64) -> Result<Self> {
        let h = self.grid.spacing();
        if eps < h {
            return Err(Error::MollifierUnderResolved { eps, h });
        }
        let stencil = bump_stencil(self.grid.dim(), eps, h);
        self.spread(&stencil).ok_or(Error::MollifierLeavesGrid)
    }

    /// Push every weight through a normalized stencil; `None` if any
    /// stencil cell falls off the grid.
    pub(crate) fn spread(&self, stencil: &[(Vec<i64>, f64)]) -> Option<Self> {
        let g = &self.grid;
        let d = g.dim();
        let mut out = vec![0.0; g.len()];
        let mut idx = vec![0i64; d];
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let base = g.multi_index(i);
            for (off, s) in stencil {
                for a in 0..d {
                    idx[a] = base[a] as i64 + off[a];
                }
                let j = g.checked_flat(&idx)?;
                out[j] += w * s;
            }
        }
        Some(Self { grid: g.clone(), weights: out })
    }

    /// Move weights by a lattice vector.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        let g = &self.grid;
        if shift.len() != g.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), got: shift.len() });
        }
        let h = g.spacing();
        let mut steps = Vec::with_capacity(shift.len());
        for &s in shift {
            let k = s / h;
            if (k - k.round()).abs() > 1e-9 {
                return Err(Error::NonLatticeShift);
            }
            steps.push(k.round() as i64);
        }
        self.translate_cells(&steps)
    }

    pub fn translate_cells(&self, steps: &[i64]) -> Result<Self> {
        let g = &self.grid;
        let d = g.dim();
        let mut out = vec![0.0; g.len()];
        let mut idx = vec![0i64; d];
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let base = g.multi_index(i);
            for a in 0..d {
                idx[a] = base[a] as i64 + steps[a];
            }
            let j = g.checked_flat(&idx).ok_or(Error::TranslationOutOfBounds)?;
            out[j] = w;
        }
        Ok(Self { grid: g.clone(), weights: out })
    }

    /// `m·χ_{B(0;R1)} + (1 − m(B(0;R1)))·uniform(B(0;R2))`.
    pub fn compactify(&self, r1: f64, r2: f64) -> Result<Self> {
        if !(r2 > 0.0) {
            return Err(Error::InvalidParameter("R2 must be > 0".into()));
        }
        let g = &self.grid;
        let mut c = vec![0.0; g.dim()];
        let mut kept = vec![0.0; g.len()];
        let mut target = Vec::new();
        for (i, &w) in self.weights.iter().enumerate() {
            g.center_into(i, &mut c);
            let r = norm(&c);
            if r < r1 {
                kept[i] = w;
            }
            if r < r2 {
                target.push(i);
            }
        }
        let excess = self.mass() - kept.iter().sum::<f64>();
        if excess > 0.0 {
            if target.is_empty() {
                return Err(Error::CannotPlaceExcessMass);
            }
            let share = excess / target.len() as f64;
            for &i in &target {
                kept[i] += share;
            }
        }
        Self::partial(g, kept)
    }

    /// Largest distance between centers of cells with weight above
    /// [`DIAMETER_THRESHOLD`].
    pub fn support_diameter(&self) -> f64 {
        let pts: Vec<Vec<f64>> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > DIAMETER_THRESHOLD)
            .map(|(i, _)| self.grid.center(i))
            .collect();
        let mut best = 0.0f64;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                let d2: f64 = p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }

    /// CSV with one row per cell of positive weight:
    /// `i0..i{d-1}, x0..x{d-1}, w`, weights in 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.grid.dim();
        let header: Vec<String> =
            (0..d).map(|a| format!("i{a}")).chain((0..d).map(|a| format!("x{a}"))).chain(["w".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        let mut c = vec![0.0; d];
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                let idx = self.grid.multi_index(i);
                self.grid.center_into(i, &mut c);
                let mut row: Vec<String> = idx.iter().map(|k| k.to_string()).collect();
                row.extend(c.iter().map(|x| format!("{x:.16e}")));
                row.push(format!("{w:.16e}"));
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv). Coordinates are ignored;
    /// the indices place each weight on `grid`.
    pub fn read_csv<R: BufRead>(grid: &GridSpec, input: R) -> Result<Self> {
        let d = grid.dim();
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty measure CSV".into()))??;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() != 2 * d + 1 || cols[0] != "i0" || cols[2 * d] != "w" {
            return Err(Error::Parse(format!("unexpected measure CSV header '{header}'")));
        }
        let mut w = vec![0.0; grid.len()];
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 * d + 1 {
                return Err(Error::Parse(format!("bad row '{line}'")));
            }
            let idx = fields[..d]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let cell = grid.checked_flat(&idx).ok_or_else(|| Error::Parse(format!("index off grid in '{line}'")))?;
            w[cell] = fields[2 * d].parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
        }
        Self::partial(grid, w)
    }
}

/// Standard bump `exp(−1/(1 − r²))` for `r < 1`, zero otherwise.
pub fn bump(r: f64) -> f64 {
    if r < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Lattice offsets with `|k·h| < eps` and normalized bump weights.
pub fn bump_stencil(d: usize, eps: f64, h: f64) -> Vec<(Vec<i64>, f64)> {
    let reach = (eps / h).ceil() as i64;
    let mut st: Vec<(Vec<i64>, f64)> = box_offsets(d, reach)
        .into_iter()
        .filter_map(|off| {
            let r = off.iter().map(|&k| (k as f64 * h).powi(2)).sum::<f64>().sqrt() / eps;
            let v = bump(r);
            (v > 0.0).then_some((off, v))
        })
        .collect();
    let total: f64 = st.iter().map(|(_, v)| v).sum();
    for (_, v) in &mut st {
        *v /= total;
    }
    st
}

/// Lattice offsets with `|k·h| < radius` and equal weights.
pub fn ball_stencil(d: usize, radius: f64, h: f64) -> Vec<(Vec<i64>, f64)> {
    let reach = (radius / h).ceil() as i64;
    let offs: Vec<Vec<i64>> = box_offsets(d, reach)
        .into_iter()
        .filter(|off| off.iter().map(|&k| (k as f64 * h).powi(2)).sum::<f64>().sqrt() < radius)
        .collect();
    let w = 1.0 / offs.len() as f64;
    offs.into_iter().map(|o| (o, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line4() -> GridSpec {
        GridSpec::new(vec![-1.0], 0.5, vec![4]).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(vec![0.0], 0.0, vec![3]).is_err());
        assert!(GridSpec::new(vec![0.0], 1.0, vec![0]).is_err());
        assert!(GridSpec::new(vec![0.0, 0.0], 1.0, vec![3]).is_err());
    }

    #[test]
    fn centers_follow_half_offset_convention() {
        let g = line4();
        let cs: Vec<f64> = (0..4).map(|i| g.center(i)[0]).collect();
        assert_eq!(cs, vec![-0.75, -0.25, 0.25, 0.75]);
        let g2 = GridSpec::new(vec![0.0, 10.0], 2.0, vec![2, 3]).unwrap();
        assert_eq!(g2.center(g2.flat_index(&[1, 2])), vec![3.0, 15.0]);
        assert_eq!(g2.multi_index(5), vec![1, 2]);
    }

    #[test]
    fn full_space_mask_is_all_true() {
        let g = GridSpec::centered_cube(2, 1.0, 5).unwrap();
        let d = Domain::new(DomainKind::FullSpace, &g).unwrap();
        assert!(d.mask().iter().all(|&m| m));
    }

    #[test]
    fn half_line_mask_uses_cell_centers() {
        let d = Domain::new(DomainKind::HalfLine { x0: 0.0 }, &line4()).unwrap();
        assert_eq!(d.mask(), &[false, false, true, true]);
    }

    #[test]
    fn flat_curved_half_space() {
        let g = GridSpec::centered_cube(2, 1.0, 4).unwrap();
        let d = Domain::new(DomainKind::CurvedHalfSpace { phi: vec![0.0; 4] }, &g).unwrap();
        for i in 0..g.len() {
            assert_eq!(d.mask()[i], g.center(i)[1] >= 0.0);
        }
    }

    #[test]
    fn domain_errors() {
        let g = line4();
        assert!(matches!(Domain::new(DomainKind::HalfLine { x0: 5.0 }, &g), Err(Error::InfeasibleDomain)));
        let g2 = GridSpec::centered_cube(2, 1.0, 4).unwrap();
        assert!(matches!(
            Domain::new(DomainKind::CurvedHalfSpace { phi: vec![0.0; 3] }, &g2),
            Err(Error::BadPhiTable { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn curved_3d_is_flagged() {
        let g = GridSpec::centered_cube(3, 1.0, 4).unwrap();
        let d = Domain::new(DomainKind::CurvedHalfSpace { phi: vec![0.0; 16] }, &g).unwrap();
        assert!(d.beyond_stated_theorem());
    }

    #[test]
    fn normalize_examples() {
        let g = GridSpec::new(vec![0.0], 1.0, vec![2]).unwrap();
        let m = DiscreteMeasure::partial(&g, vec![2.0, 2.0]).unwrap().normalize().unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert_eq!(m.normalize().unwrap(), m);
        let g3 = GridSpec::new(vec![0.0], 1.0, vec![3]).unwrap();
        let m = DiscreteMeasure::partial(&g3, vec![1.0, 0.0, 3.0]).unwrap().normalize().unwrap();
        assert_eq!(m.weights(), &[0.25, 0.0, 0.75]);
        let z = DiscreteMeasure::partial(&g3, vec![0.0; 3]).unwrap();
        assert!(matches!(z.normalize(), Err(Error::CannotNormalize)));
    }

    #[test]
    fn truncate_rescale_examples() {
        let g = line4();
        let u = DiscreteMeasure::uniform(&Domain::full(&g));
        let t = u.truncate_rescale(0.5).unwrap();
        assert_eq!(t.weights(), &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(u.truncate_rescale(10.0).unwrap(), u);
        assert!(matches!(u.truncate_rescale(0.1), Err(Error::EmptyTruncation)));
    }

    #[test]
    fn mollify_point_mass() {
        let g = GridSpec::centered_cube(1, 1.0, 41).unwrap();
        let h = g.spacing();
        let m = DiscreteMeasure::point_mass(&g, 20).mollify(3.0 * h).unwrap();
        assert!((m.mass() - 1.0).abs() < MASS_TOL);
        let w = m.weights();
        assert!(w[20] > w[21] && w[21] > w[22] && w[22] == w[18]);
        assert_eq!(m.support().len(), 5);
        assert!(matches!(
            DiscreteMeasure::point_mass(&g, 20).mollify(0.5 * h),
            Err(Error::MollifierUnderResolved { .. })
        ));
        assert!(matches!(DiscreteMeasure::point_mass(&g, 0).mollify(3.0 * h), Err(Error::MollifierLeavesGrid)));
    }

    #[test]
    fn translate_examples() {
        let g = GridSpec::centered_cube(2, 1.0, 8).unwrap();
        let h = g.spacing();
        let m = DiscreteMeasure::point_mass(&g, g.flat_index(&[3, 3]));
        assert_eq!(m.translate(&[0.0, 0.0]).unwrap(), m);
        let s = m.translate(&[0.0, 2.0 * h]).unwrap();
        assert_eq!(s.weights()[g.flat_index(&[3, 5])], 1.0);
        assert!(matches!(m.translate(&[0.0, 10.0 * h]), Err(Error::TranslationOutOfBounds)));
        assert!(matches!(m.translate(&[0.3 * h, 0.0]), Err(Error::NonLatticeShift)));
    }

    #[test]
    fn compactify_examples() {
        let g = GridSpec::centered_cube(1, 2.0, 8).unwrap();
        let inner = DiscreteMeasure::point_mass(&g, 4);
        assert_eq!(inner.compactify(1.0, 1.0).unwrap(), inner);
        let outer = DiscreteMeasure::point_mass(&g, 0);
        let c = outer.compactify(1.0, 0.5).unwrap();
        assert_eq!(c.weights(), &[0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0]);
        assert!(matches!(outer.compactify(1.0, 0.1), Err(Error::CannotPlaceExcessMass)));
    }

    #[test]
    fn support_diameter_examples() {
        let g = GridSpec::new(vec![0.0], 1.0, vec![3]).unwrap();
        assert_eq!(DiscreteMeasure::point_mass(&g, 1).support_diameter(), 0.0);
        let two = DiscreteMeasure::new(&g, vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(two.support_diameter(), 1.0);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = GridSpec::centered_cube(2, 1.0, 5).unwrap();
        let m = DiscreteMeasure::from_density(&g, |x| (1.0 + x[0] * 3.7 + x[1]).exp()).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = DiscreteMeasure::read_csv(&g, buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i0,i1,x0,x1,w\n"));
    }

    #[test]
    fn phi_modulus_for_lipschitz_profile() {
        let g = GridSpec::centered_cube(2, 2.0, 16).unwrap();
        let h = g.spacing();
        let phi: Vec<f64> = (0..16).map(|i| -2.0 + (i as f64 + 0.5) * h).map(|x: f64| x.abs() - 1.0).collect();
        let d = Domain::new(DomainKind::CurvedHalfSpace { phi }, &g).unwrap();
        assert!((d.phi_modulus(2.0 * h) - 2.0 * h).abs() < 1e-12);
    }
}
