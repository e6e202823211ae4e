//! Symmetric uniform grids on `(-a, a)` and complex fields sampled on them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_REFINEMENT: u32 = 3;
pub const MAX_REFINEMENT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
    /// The two endpoint nodes are the same point; `2^K` distinct unknowns.
    Periodic,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary condition '{other}'"
            ))),
        }
    }
}

/// Uniform grid with `2^K + 1` nodes `x_j = -a + j h`, both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_width: f64,
    refinement: u32,
    h: f64,
    nodes: Vec<f64>,
    bc: BoundaryCondition,
}

impl Grid {
    pub fn new(half_width: f64, refinement: u32, bc: BoundaryCondition) -> Result<Arc<Self>> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if !(MIN_REFINEMENT..=MAX_REFINEMENT).contains(&refinement) {
            return Err(Error::InvalidParameter(format!(
                "refinement K must lie in {MIN_REFINEMENT}..={MAX_REFINEMENT}, got {refinement}"
            )));
        }
        let cells = 1usize << refinement;
        let h = 2.0 * half_width / cells as f64;
        let n = cells + 1;
        let center = cells / 2;
        // Build from the center outward so that x_j = -x_{n-1-j} holds bit for bit.
        let mut nodes = vec![0.0; n];
        for k in 1..=center {
            let x = k as f64 * h;
            nodes[center + k] = x;
            nodes[center - k] = -x;
        }
        Ok(Arc::new(Grid {
            half_width,
            refinement,
            h,
            nodes,
            bc,
        }))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn refinement(&self) -> u32 {
        self.refinement
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Number of nodes, `2^K + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of cells, `2^K`.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn center(&self) -> usize {
        self.cells() / 2
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn x(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// Same geometry with a different boundary condition.
    pub fn with_bc(&self, bc: BoundaryCondition) -> Arc<Grid> {
        Arc::new(Grid { bc, ..self.clone() })
    }

    /// Plain-sum quadrature weight `h` at every node.
    pub fn plain_weight(&self, _j: usize) -> f64 {
        self.h
    }

    /// Trapezoid weight: `h/2` at the endpoints, `h` elsewhere.
    pub fn trapezoid_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.cells() {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

/// Complex samples, one per node of the owning grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "field value",
                index: j,
            });
        }
        Ok(Field { grid, values })
    }

    /// Used by internal kernels whose outputs are finite by construction.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Field::from_parts(grid, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(grid: Arc<Grid>, c: Complex64) -> Self {
        let n = grid.len();
        Field::from_parts(grid, vec![c; n])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Field {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| f(x, v))
            .collect();
        Field::from_parts(self.grid.clone(), values)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        debug_assert_eq!(self.len(), other.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::from_parts(self.grid.clone(), values)
    }

    pub fn scale(&self, s: Complex64) -> Field {
        self.map(|_, v| v * s)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Same values re-attached to a grid of identical geometry (e.g. a
    /// different boundary tag).
    pub fn on_grid(&self, grid: Arc<Grid>) -> Result<Field> {
        if grid.len() != self.grid.len() || grid.spacing() != self.grid.spacing() {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_parts(grid, self.values.clone()))
    }
}

/// Samples a real function at every node.
pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Field> {
    sample_complex(grid, |x| Complex64::new(f(x), 0.0))
}

pub fn sample_complex(grid: &Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Result<Field> {
    let values = grid.nodes().iter().map(|&x| f(x)).collect();
    Field::new(grid.clone(), values)
}

/// `max_j |u(x_j) + u(-x_j)|`; zero exactly when the samples are odd.
pub fn odd_defect(u: &Field) -> f64 {
    let v = u.values();
    let n = v.len();
    (0..=n / 2)
        .map(|j| (v[j] + v[n - 1 - j]).norm())
        .fold(0.0, f64::max)
}
