//! Uniform phase-space grids and fields sampled on them.
//!
//! Axes are periodic-style: `n` nodes at `min + i·(max - min)/n`, so the
//! upper bound is excluded. This matches the FFT conventions used by the
//! spectral module. Fields are stored x-major (`index = i·nk + j`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub const MIN_AXIS_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    min: f64,
    max: f64,
    n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        ensure_finite("axis min", min)?;
        ensure_finite("axis max", max)?;
        if max <= min {
            return Err(Error::InvalidInput(format!(
                "axis max ({max}) must exceed min ({min})"
            )));
        }
        if n < MIN_AXIS_POINTS {
            return Err(Error::InvalidInput(format!(
                "axis needs at least {MIN_AXIS_POINTS} points, got {n}"
            )));
        }
        Ok(Self { min, max, n })
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }

    /// Same interval with twice the nodes.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    x: Axis,
    k: Axis,
}

impl PhaseSpaceGrid {
    pub fn new(x: Axis, k: Axis) -> Self {
        Self { x, k }
    }

    /// `[-x_max, x_max) × [-k_max, k_max)` with `nx × nk` nodes.
    pub fn symmetric(x_max: f64, k_max: f64, nx: usize, nk: usize) -> Result<Self> {
        Ok(Self {
            x: Axis::symmetric(x_max, nx)?,
            k: Axis::symmetric(k_max, nk)?,
        })
    }

    /// Default phase-space grid: `[-8, 8)²`, 256 × 256.
    pub fn default_phase_space() -> Self {
        Self::symmetric(8.0, 8.0, 256, 256).expect("static grid is valid")
    }

    pub fn x(&self) -> &Axis {
        &self.x
    }

    pub fn k(&self) -> &Axis {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.k.len() + j
    }

    pub fn node(&self, index: usize) -> (f64, f64) {
        let (i, j) = (index / self.k.len(), index % self.k.len());
        (self.x.point(i), self.k.point(j))
    }

    /// Grid with both spacings halved over the same intervals.
    pub fn refined(&self) -> Self {
        Self {
            x: self.x.refined(),
            k: self.k.refined(),
        }
    }
}

/// Real values on a grid; masked nodes hold NaN and are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
    masked: Vec<bool>,
}

impl ScalarField {
    pub fn from_options(grid: PhaseSpaceGrid, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let masked = values.iter().map(Option::is_none).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Ok(Self {
            grid,
            values,
            masked,
        })
    }

    pub fn from_values(grid: PhaseSpaceGrid, values: Vec<f64>) -> Result<Self> {
        Self::from_options(grid, values.into_iter().map(Some).collect())
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let idx = self.grid.index(i, j);
        (!self.masked[idx]).then(|| self.values[idx])
    }

    pub fn is_masked(&self, index: usize) -> bool {
        self.masked[index]
    }

    pub fn masked_count(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }

    /// `max |value|` over unmasked nodes, with the node where it occurs.
    pub fn max_abs(&self) -> Option<(f64, (f64, f64))> {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.masked[*i])
            .map(|(i, v)| (v.abs(), i))
            .fold(None, |best: Option<(f64, usize)>, (v, i)| match best {
                Some((b, _)) if b >= v => best,
                _ => Some((v, i)),
            })
            .map(|(v, i)| (v, self.grid.node(i)))
    }

    /// Trapezoid-free sum times cell area; exact for periodic-style grids of
    /// rapidly decaying functions.
    pub fn integral(&self) -> f64 {
        let cell = self.grid.x().spacing() * self.grid.k().spacing();
        self.values
            .iter()
            .zip(&self.masked)
            .filter(|(_, &m)| !m)
            .map(|(v, _)| v)
            .sum::<f64>()
            * cell
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: PhaseSpaceGrid,
    values: Vec<(f64, f64)>,
}

impl VectorField {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<(f64, f64)>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[(f64, f64)] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        self.values[self.grid.index(i, j)]
    }

    /// Second-order centered-difference divergence; boundary nodes are masked.
    pub fn divergence(&self) -> ScalarField {
        let (nx, nk) = (self.grid.x().len(), self.grid.k().len());
        let (hx, hk) = (self.grid.x().spacing(), self.grid.k().spacing());
        let values = (0..self.grid.len())
            .map(|idx| {
                let (i, j) = (idx / nk, idx % nk);
                if i == 0 || j == 0 || i == nx - 1 || j == nk - 1 {
                    return None;
                }
                let dx = (self.get(i + 1, j).0 - self.get(i - 1, j).0) / (2.0 * hx);
                let dk = (self.get(i, j + 1).1 - self.get(i, j - 1).1) / (2.0 * hk);
                Some(dx + dk)
            })
            .collect();
        ScalarField::from_options(self.grid, values).expect("sizes match")
    }
}

/// Evaluates `f` at every node (in parallel, x-major order preserved).
/// `None` marks a masked node.
pub fn field_sweep<F>(grid: &PhaseSpaceGrid, f: F) -> ScalarField
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    let values: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, k) = grid.node(idx);
            f(x, k)
        })
        .collect();
    ScalarField::from_options(*grid, values).expect("sizes match")
}

/// Vector-valued counterpart of [`field_sweep`].
pub fn vector_sweep<F>(grid: &PhaseSpaceGrid, f: F) -> VectorField
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, k) = grid.node(idx);
            f(x, k)
        })
        .collect();
    VectorField::new(*grid, values).expect("sizes match")
}

/// Fallible sweep producing arbitrary per-node records, in x-major order.
pub fn try_sweep<T, F>(grid: &PhaseSpaceGrid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64, f64) -> Result<T> + Sync,
{
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, k) = grid.node(idx);
            f(x, k)
        })
        .collect()
}
