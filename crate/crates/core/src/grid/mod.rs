//! Discrete geometry and measure layer.
//!
//! Every grid covers the unit cube `[0,1)^d` with `N` cells per axis. All
//! kernels work in cell units: a cube is an integer anchor plus an integer
//! side, and physical coordinates only show up when generators sample a
//! closed form at cell centers.
//!
//! A 1-d grid is stored as an `N x 1` array so that the same row-major code
//! path serves both dimensions; cubes in 1-d have extent 1 along the second
//! axis.

mod cube;
pub mod io;
mod prefix;

pub use cube::{enumerate_cubes, triple, CubeFamily, CubeSelection, GridCube};
pub use prefix::{PrefixTable, WeightedMeasure};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positivity floor applied to weights on ingestion.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Dimension and cells per axis of a (sub)grid.
///
/// Unlike [`GridFunction`], a `Shape` does not require a power-of-two side,
/// so kernels can run on the sub-grid covered by an arbitrary cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub dim: usize,
    pub n: usize,
}

impl Shape {
    pub fn new(dim: usize, n: usize) -> Self {
        debug_assert!(dim == 1 || dim == 2);
        Shape { dim, n }
    }

    /// Cells along `axis` in the row-major storage (`1` for the padding axis of 1-d grids).
    #[inline]
    pub fn extent(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.n
        } else {
            1
        }
    }

    #[inline]
    pub fn extents(&self) -> [usize; 2] {
        [self.extent(0), self.extent(1)]
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn index(&self, cell: [usize; 2]) -> usize {
        cell[0] * self.extent(1) + cell[1]
    }

    #[inline]
    pub fn cell(&self, index: usize) -> [usize; 2] {
        let e1 = self.extent(1);
        [index / e1, index % e1]
    }

    /// Cell count of a cube with the given side.
    #[inline]
    pub fn cube_cells(&self, side: usize) -> usize {
        side.pow(self.dim as u32)
    }

    /// Extent of a cube of the given side along `axis`.
    #[inline]
    pub fn cube_extent(&self, side: usize, axis: usize) -> usize {
        if axis < self.dim {
            side
        } else {
            1
        }
    }
}

/// A real step function on the uniform grid over `[0,1)^d`, constant on each cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    shape: Shape,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dim: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "resolution must be a power of two, got {n}"
            )));
        }
        let shape = Shape::new(dim, n);
        if values.len() != shape.cells() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for a {dim}-d grid with N = {n}, got {}",
                shape.cells(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value {} at cell {i}",
                values[i]
            )));
        }
        Ok(GridFunction { shape, values })
    }

    pub fn constant(dim: usize, n: usize, value: f64) -> Result<Self> {
        let cells = if dim == 2 { n * n } else { n };
        GridFunction::new(dim, n, vec![value; cells])
    }

    /// Builds a grid by evaluating `f` at every cell index `[i, j]` (`j = 0` in 1-d).
    pub fn from_cells(dim: usize, n: usize, mut f: impl FnMut([usize; 2]) -> f64) -> Result<Self> {
        let shape = Shape::new(dim, n);
        let values = (0..shape.cells()).map(|i| f(shape.cell(i))).collect();
        GridFunction::new(dim, n, values)
    }

    #[inline]
    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.shape.n
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.shape.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.shape.dim as i32)
    }

    #[inline]
    pub fn at(&self, cell: [usize; 2]) -> f64 {
        self.values[self.shape.index(cell)]
    }

    /// Physical coordinates of the center of the cell with flat index `index`.
    pub fn cell_center(&self, index: usize) -> [f64; 2] {
        let c = self.shape.cell(index);
        let h = self.cell_width();
        let y = if self.shape.dim == 2 { (c[1] as f64 + 0.5) * h } else { 0.0 };
        [(c[0] as f64 + 0.5) * h, y]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(
            self.shape.dim,
            self.shape.n,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.shape != other.shape {
            return Err(Error::InvalidGrid(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        GridFunction::new(
            self.shape.dim,
            self.shape.n,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction {
            shape: self.shape,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Values on the cells covered by `q`, row-major over the cube's own sub-grid.
    pub fn restrict(&self, q: &GridCube) -> Result<Vec<f64>> {
        q.check_within(self.shape)?;
        Ok(q.cell_indices(self.shape).map(|i| self.values[i]).collect())
    }

    /// Same grid with every cell outside `q` set to zero.
    pub fn mask_outside(&self, q: &GridCube) -> Result<GridFunction> {
        q.check_within(self.shape)?;
        let mut values = vec![0.0; self.values.len()];
        for i in q.cell_indices(self.shape) {
            values[i] = self.values[i];
        }
        Ok(GridFunction {
            shape: self.shape,
            values,
        })
    }
}

/// A positive grid function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(GridFunction);

impl Weight {
    /// Accepts `g` if every entry is positive; entries below [`WEIGHT_FLOOR`] are raised to it.
    pub fn new(g: GridFunction) -> Result<Self> {
        let bad: Vec<usize> = g
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= 0.0)
            .map(|(i, _)| i)
            .collect();
        if let Some(&first) = bad.first() {
            return Err(Error::NonPositiveWeight {
                count: bad.len(),
                first,
            });
        }
        Ok(Weight::floored(g))
    }

    /// Clamps every entry to at least [`WEIGHT_FLOOR`].
    pub fn floored(mut g: GridFunction) -> Self {
        for v in &mut g.values {
            if *v < WEIGHT_FLOOR {
                *v = WEIGHT_FLOOR;
            }
        }
        Weight(g)
    }

    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Ok(Weight(GridFunction::constant(dim, n, 1.0)?))
    }

    pub fn as_grid(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_grid(self) -> GridFunction {
        self.0
    }

    /// `lambda w`, without re-applying the floor.
    pub fn scaled(&self, lambda: f64) -> Result<Weight> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight scale must be positive, got {lambda}"
            )));
        }
        // the floor applies on ingestion only, so scaling stays exact
        let g = self.0.map(|v| v * lambda)?;
        if g.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "scaling by {lambda} leaves the positive finite range"
            )));
        }
        Ok(Weight(g))
    }
}

impl std::ops::Deref for Weight {
    type Target = GridFunction;

    fn deref(&self) -> &GridFunction {
        &self.0
    }
}

/// Exact minimum cell value over `q` (the essential infimum of a step function).
pub fn cube_min(f: &GridFunction, q: &GridCube) -> Result<f64> {
    q.check_within(f.shape())?;
    Ok(q
        .cell_indices(f.shape())
        .map(|i| f.values()[i])
        .fold(f64::INFINITY, f64::min))
}

/// Exact maximum cell value over `q`.
pub fn cube_max(f: &GridFunction, q: &GridCube) -> Result<f64> {
    q.check_within(f.shape())?;
    Ok(q
        .cell_indices(f.shape())
        .map(|i| f.values()[i])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Lebesgue measure `(L/N)^d` of `q`.
pub fn cube_measure(q: &GridCube, n: usize) -> f64 {
    (q.side() as f64 / n as f64).powi(q.dim() as i32)
}
