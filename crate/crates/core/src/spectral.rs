//! Discrete Laplacian `Δ_h`, its exact diagonalisation and the linear
//! propagator `e^{itΔ_h}`.
//!
//! Boundary closures:
//!
//! * Neumann: ghost-node mirror `u_{-1} = u_1`, `u_{N+1} = u_{N-1}`. The
//!   resulting matrix is self-adjoint for the trapezoid-weighted inner product
//!   and is diagonalised by a type-I cosine transform.
//! * Dirichlet: endpoints are pinned to zero; the interior operator is
//!   diagonalised by a type-I sine transform.
//! * Periodic: the endpoints alias; `2^K` unknowns, discrete Fourier basis.
//!
//! Mode coefficients returned by [`ModeBasis::decompose`] are orthonormal for
//! the trapezoid inner product, so Parseval holds in that norm.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Field, Grid};

/// Largest node count accepted by the dense (matrix) paths.
pub const DENSE_LIMIT: usize = 4097;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// `h Σ u_j conj(v_j)` over all nodes.
    Plain,
    /// Trapezoid rule: half weight at the two endpoints.
    Trapezoid,
}

pub fn inner_product(u: &Field, v: &Field, weighting: Weighting) -> Complex64 {
    let grid = u.grid();
    let mut acc = ZERO;
    for (j, (a, b)) in u.values().iter().zip(v.values()).enumerate() {
        let w = match weighting {
            Weighting::Plain => grid.plain_weight(j),
            Weighting::Trapezoid => grid.trapezoid_weight(j),
        };
        acc += a * b.conj() * w;
    }
    acc
}

pub fn l2_norm(u: &Field, weighting: Weighting) -> f64 {
    inner_product(u, u, weighting).re.max(0.0).sqrt()
}

/// Three-point stencil with the boundary closure of the grid's tag.
pub fn apply_laplacian(u: &Field) -> Field {
    let grid = u.grid();
    let v = u.values();
    let n = v.len();
    let last = n - 1;
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut out = vec![ZERO; n];
    for j in 1..last {
        out[j] = (v[j + 1] + v[j - 1] - v[j] * 2.0) * inv_h2;
    }
    match grid.bc() {
        BoundaryCondition::Neumann => {
            out[0] = (v[1] - v[0]) * (2.0 * inv_h2);
            out[last] = (v[last - 1] - v[last]) * (2.0 * inv_h2);
        }
        BoundaryCondition::Dirichlet => {
            // Endpoint samples are treated as the pinned zero boundary.
            out[1] = (v[2] - v[1] * 2.0) * inv_h2;
            out[last - 1] = (v[last - 2] - v[last - 1] * 2.0) * inv_h2;
        }
        BoundaryCondition::Periodic => {
            let edge = (v[1] + v[last - 1] - v[0] * 2.0) * inv_h2;
            out[0] = edge;
            out[last] = edge;
        }
    }
    Field::from_parts(grid.clone(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    CosineI,
    SineI,
    Fourier,
}

/// Exact eigenbasis of `Δ_h` for one grid.
#[derive(Clone)]
pub struct ModeBasis {
    grid: Arc<Grid>,
    kind: TransformKind,
    eigenvalues: Vec<f64>,
    norms: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Option<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for ModeBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeBasis")
            .field("kind", &self.kind)
            .field("modes", &self.eigenvalues.len())
            .finish()
    }
}

impl ModeBasis {
    pub fn new(grid: &Arc<Grid>) -> Self {
        let cells = grid.cells();
        let h = grid.spacing();
        let scale = 4.0 / (h * h);
        let mut planner = FftPlanner::new();
        let n_f = cells as f64;
        match grid.bc() {
            BoundaryCondition::Neumann => {
                let eigenvalues = (0..=cells)
                    .map(|k| -scale * (PI * k as f64 / (2.0 * n_f)).sin().powi(2))
                    .collect();
                let norms = (0..=cells)
                    .map(|k| {
                        if k == 0 || k == cells {
                            (h * n_f).sqrt()
                        } else {
                            (0.5 * h * n_f).sqrt()
                        }
                    })
                    .collect();
                ModeBasis {
                    grid: grid.clone(),
                    kind: TransformKind::CosineI,
                    eigenvalues,
                    norms,
                    fft: planner.plan_fft_forward(2 * cells),
                    ifft: None,
                }
            }
            BoundaryCondition::Dirichlet => {
                let eigenvalues = (1..cells)
                    .map(|k| -scale * (PI * k as f64 / (2.0 * n_f)).sin().powi(2))
                    .collect();
                let norms = vec![(0.5 * h * n_f).sqrt(); cells - 1];
                ModeBasis {
                    grid: grid.clone(),
                    kind: TransformKind::SineI,
                    eigenvalues,
                    norms,
                    fft: planner.plan_fft_forward(2 * cells),
                    ifft: None,
                }
            }
            BoundaryCondition::Periodic => {
                let eigenvalues = (0..cells)
                    .map(|k| -scale * (PI * k as f64 / n_f).sin().powi(2))
                    .collect();
                let norms = vec![(h * n_f).sqrt(); cells];
                ModeBasis {
                    grid: grid.clone(),
                    kind: TransformKind::Fourier,
                    eigenvalues,
                    norms,
                    fft: planner.plan_fft_forward(cells),
                    ifft: Some(planner.plan_fft_inverse(cells)),
                }
            }
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    /// Eigenvalues `λ_k ≤ 0` in coefficient order.
    ///
    /// Neumann: index `k` is `cos(πkj/N)`, `k = 0..=N`. Dirichlet: index `i`
    /// is `sin(π(i+1)j/N)`. Periodic: index `k` is `exp(2πikj/N)`, FFT order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn num_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    fn check(&self, u: &Field) -> Result<()> {
        let g = u.grid();
        if g.bc() != self.grid.bc() || g.len() != self.grid.len() || g.spacing() != self.grid.spacing() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Unnormalised transform of the raw samples. Cosine-I and sine-I are
    /// their own inverses up to a factor `2N` and `N/2` respectively.
    fn raw_forward(&self, v: &[Complex64]) -> Vec<Complex64> {
        let cells = self.grid.cells();
        match self.kind {
            TransformKind::CosineI => {
                let mut buf = vec![ZERO; 2 * cells];
                buf[..=cells].copy_from_slice(&v[..=cells]);
                for j in 1..cells {
                    buf[2 * cells - j] = v[j];
                }
                self.fft.process(&mut buf);
                buf.truncate(cells + 1);
                buf
            }
            TransformKind::SineI => {
                let mut buf = vec![ZERO; 2 * cells];
                for j in 1..cells {
                    buf[j] = v[j];
                    buf[2 * cells - j] = -v[j];
                }
                self.fft.process(&mut buf);
                // Y_k = -2i Σ x_j sin(πjk/N)
                (1..cells).map(|k| buf[k] * Complex64::new(0.0, 0.5)).collect()
            }
            TransformKind::Fourier => {
                let mut buf = v[..cells].to_vec();
                self.fft.process(&mut buf);
                buf
            }
        }
    }

    /// Inverse of [`raw_forward`] (exact, including normalisation).
    fn raw_inverse(&self, c: &[Complex64]) -> Vec<Complex64> {
        let cells = self.grid.cells();
        match self.kind {
            TransformKind::CosineI => {
                let mut v = self.raw_forward(c);
                let s = 1.0 / (2.0 * cells as f64);
                v.iter_mut().for_each(|x| *x *= s);
                v
            }
            TransformKind::SineI => {
                let mut padded = vec![ZERO; cells + 1];
                padded[1..cells].copy_from_slice(c);
                let s = self.raw_forward(&padded);
                let f = 2.0 / cells as f64;
                let mut v = vec![ZERO; cells + 1];
                for (j, x) in s.into_iter().enumerate() {
                    v[j + 1] = x * f;
                }
                v
            }
            TransformKind::Fourier => {
                let mut buf = c.to_vec();
                self.ifft.as_ref().expect("periodic basis has an inverse plan").process(&mut buf);
                let s = 1.0 / cells as f64;
                buf.iter_mut().for_each(|x| *x *= s);
                buf.push(buf[0]);
                buf
            }
        }
    }

    /// Coefficients in the trapezoid-orthonormal eigenbasis.
    pub fn decompose(&self, u: &Field) -> Result<Vec<Complex64>> {
        self.check(u)?;
        let raw = self.raw_forward(u.values());
        let h = self.grid.spacing();
        // Cosine-I raw sums count interior nodes twice, endpoints once.
        let w = match self.kind {
            TransformKind::CosineI => 0.5 * h,
            TransformKind::SineI | TransformKind::Fourier => h,
        };
        Ok(raw
            .into_iter()
            .zip(&self.norms)
            .map(|(c, &nu)| c * (w / nu))
            .collect())
    }

    pub fn reconstruct(&self, coeffs: &[Complex64]) -> Result<Field> {
        if coeffs.len() != self.num_modes() {
            return Err(Error::LengthMismatch {
                expected: self.num_modes(),
                found: coeffs.len(),
            });
        }
        let raw = self.coeffs_to_raw(coeffs);
        Ok(Field::from_parts(self.grid.clone(), self.raw_inverse(&raw)))
    }

    fn coeffs_to_raw(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let h = self.grid.spacing();
        let w = match self.kind {
            TransformKind::CosineI => 0.5 * h,
            TransformKind::SineI | TransformKind::Fourier => h,
        };
        coeffs
            .iter()
            .zip(&self.norms)
            .map(|(&c, &nu)| c * (nu / w))
            .collect()
    }

    /// Multiplies mode `k` by `m(λ_k)`.
    pub fn apply_multiplier(&self, u: &Field, m: impl Fn(f64) -> Complex64) -> Result<Field> {
        self.check(u)?;
        let mut raw = self.raw_forward(u.values());
        for (c, &lam) in raw.iter_mut().zip(&self.eigenvalues) {
            *c *= m(lam);
        }
        Ok(Field::from_parts(self.grid.clone(), self.raw_inverse(&raw)))
    }

    /// `e^{itΔ_h} u`.
    pub fn propagate(&self, u: &Field, t: f64) -> Result<Field> {
        if t == 0.0 {
            self.check(u)?;
            return Ok(u.clone());
        }
        self.apply_multiplier(u, |lam| Complex64::from_polar(1.0, t * lam))
    }

    /// `Δ_h u` through the eigenbasis; agrees with [`apply_laplacian`].
    pub fn laplacian(&self, u: &Field) -> Result<Field> {
        self.apply_multiplier(u, |lam| Complex64::new(lam, 0.0))
    }
}

/// `e^{itΔ_h} u` with a freshly planned basis.
pub fn linear_propagator(u: &Field, t: f64) -> Result<Field> {
    ModeBasis::new(u.grid()).propagate(u, t)
}

/// Dense matrix of `Δ_h` on the grid's unknowns, the oracle for the
/// fast-transform path.
#[derive(Debug, Clone)]
pub struct DenseLaplacian {
    grid: Arc<Grid>,
    matrix: DMatrix<f64>,
    /// Node index of the first unknown.
    offset: usize,
    /// Quadrature weights of the unknowns; `diag(weights) * matrix` is symmetric.
    weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DenseEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors in node coordinates, orthonormal in the
    /// weighted inner product.
    pub eigenvectors: DMatrix<f64>,
}

pub fn dense_laplacian_matrix(grid: &Arc<Grid>) -> Result<DenseLaplacian> {
    let n = grid.len();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            nodes: n,
            limit: DENSE_LIMIT,
        });
    }
    let cells = grid.cells();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let (m, offset, weights) = match grid.bc() {
        BoundaryCondition::Neumann => (n, 0, (0..n).map(|j| grid.trapezoid_weight(j)).collect()),
        BoundaryCondition::Dirichlet => (cells - 1, 1, vec![h; cells - 1]),
        BoundaryCondition::Periodic => (cells, 0, vec![h; cells]),
    };
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = -2.0 * inv_h2;
        if i + 1 < m {
            a[(i, i + 1)] = inv_h2;
            a[(i + 1, i)] = inv_h2;
        }
    }
    match grid.bc() {
        BoundaryCondition::Neumann => {
            a[(0, 1)] = 2.0 * inv_h2;
            a[(m - 1, m - 2)] = 2.0 * inv_h2;
        }
        BoundaryCondition::Periodic => {
            a[(0, m - 1)] += inv_h2;
            a[(m - 1, 0)] += inv_h2;
        }
        BoundaryCondition::Dirichlet => {}
    }
    Ok(DenseLaplacian {
        grid: grid.clone(),
        matrix: a,
        offset,
        weights,
    })
}

impl DenseLaplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `max |W M - (W M)^T|`, zero when the operator is self-adjoint for the
    /// weighted inner product.
    pub fn weighted_symmetry_defect(&self) -> f64 {
        let m = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..i {
                let a = self.weights[i] * self.matrix[(i, j)];
                let b = self.weights[j] * self.matrix[(j, i)];
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    fn unknowns(&self, u: &Field) -> DVector<Complex64> {
        let m = self.matrix.nrows();
        DVector::from_iterator(m, u.values()[self.offset..self.offset + m].iter().copied())
    }

    fn to_field(&self, x: &DVector<Complex64>) -> Field {
        let n = self.grid.len();
        let m = x.len();
        let mut out = vec![ZERO; n];
        out[self.offset..self.offset + m].copy_from_slice(x.as_slice());
        if self.grid.bc() == BoundaryCondition::Periodic {
            out[n - 1] = out[0];
        }
        Field::from_parts(self.grid.clone(), out)
    }

    pub fn apply(&self, u: &Field) -> Field {
        let x = self.unknowns(u);
        let y = self.matrix.map(|v| Complex64::new(v, 0.0)) * x;
        self.to_field(&y)
    }

    /// Eigendecomposition through the symmetrised matrix `W^{1/2} M W^{-1/2}`.
    pub fn eigen(&self) -> DenseEigen {
        let m = self.matrix.nrows();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let s = DMatrix::from_fn(m, m, |i, j| sw[i] * self.matrix[(i, j)] / sw[j]);
        // Exact symmetrisation removes roundoff asymmetry before the solver.
        let s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors =
            DMatrix::from_fn(m, m, |i, c| eig.eigenvectors[(i, order[c])] / sw[i]);
        DenseEigen {
            eigenvalues,
            eigenvectors,
        }
    }

    /// `e^{itΔ_h} u` through the dense eigendecomposition.
    pub fn propagate(&self, eig: &DenseEigen, u: &Field, t: f64) -> Field {
        let x = self.unknowns(u);
        let m = x.len();
        let mut y = DVector::<Complex64>::zeros(m);
        for k in 0..m {
            let mut c = ZERO;
            for i in 0..m {
                c += x[i] * (eig.eigenvectors[(i, k)] * self.weights[i]);
            }
            c *= Complex64::from_polar(1.0, t * eig.eigenvalues[k]);
            for i in 0..m {
                y[i] += c * eig.eigenvectors[(i, k)];
            }
        }
        self.to_field(&y)
    }
}
