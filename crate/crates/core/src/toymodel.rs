//! Linear toy model `A_κ = -Δ + λ log|χ|² + κ` with Dirichlet conditions.
//!
//! The operator is assembled as a dense symmetric matrix on the interior
//! nodes and diagonalised once; every evolution is an eigen-expansion.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functionals::{chi, DiagnosticsRecord};
use crate::grid::{BoundaryCondition, Field, Grid};
use crate::solver::Trajectory;
use crate::spectral::{dense_laplacian_matrix, ModeBasis, DENSE_LIMIT};

/// Lattice resolution of [`choose_kappa`].
pub const KAPPA_RESOLUTION: f64 = 1e-3;
/// Eigenvalues above `-POSITIVITY_TOL` count as nonnegative.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Frozen values at `a = 16`, `K = 8`, from a tridiagonal eigensolver and a
/// generalized symmetric eigensolver run outside this crate.
pub mod reference {
    pub const KAPPA_K8: f64 = 1.565;
    /// `λ = -1`, `κ = 0`.
    pub const FOCUSING_C1: f64 = 3.683_766_096_899e-2;
    pub const FOCUSING_BIG_C1: f64 = 1.770_711_925_066;
    /// `λ = 1`, `κ = KAPPA_K8`.
    pub const DEFOCUSING_C1: f64 = 2.857_576_414_534e-4;
    pub const DEFOCUSING_BIG_C1: f64 = 1.543_541_683_636;
    pub const RELATIVE_TOL: f64 = 1e-9;
}

/// Value of the potential at the node `x = 0`, where `log|χ|²` is `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterPotential {
    /// `log|χ(h/2)|²`, the value at the midpoint of the neighbouring cell.
    #[default]
    Midpoint,
    /// `log|χ(h)|²`.
    Neighbor,
}

#[derive(Debug, Clone)]
pub struct ToyOperator {
    grid: Arc<Grid>,
    lambda: f64,
    kappa: f64,
    /// `λ log|χ(x_j)|²` on the interior nodes.
    potential: Vec<f64>,
    /// `A_κ` on the interior nodes.
    matrix: DMatrix<f64>,
    /// `-Δ_h` on the interior nodes.
    neg_laplacian: DMatrix<f64>,
    /// Ascending eigenvalues of `A_κ`.
    eigenvalues: Vec<f64>,
    /// Euclidean-orthonormal eigenvectors (columns).
    eigenvectors: DMatrix<f64>,
}

fn check_grid(grid: &Arc<Grid>) -> Result<()> {
    if grid.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::WrongBoundary {
            expected: BoundaryCondition::Dirichlet,
            found: grid.bc(),
        });
    }
    if grid.len() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            nodes: grid.len(),
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

fn potential(grid: &Grid, lambda: f64, center: CenterPotential) -> Vec<f64> {
    let h = grid.spacing();
    let c = grid.center();
    (1..grid.cells())
        .map(|j| {
            let x = if j == c {
                match center {
                    CenterPotential::Midpoint => 0.5 * h,
                    CenterPotential::Neighbor => h,
                }
            } else {
                grid.x(j)
            };
            lambda * chi(x).powi(2).ln()
        })
        .collect()
}

impl ToyOperator {
    pub fn build(grid: &Arc<Grid>, lambda: f64, kappa: f64) -> Result<Self> {
        Self::build_with(grid, lambda, kappa, CenterPotential::default())
    }

    pub fn build_with(
        grid: &Arc<Grid>,
        lambda: f64,
        kappa: f64,
        center: CenterPotential,
    ) -> Result<Self> {
        check_grid(grid)?;
        let neg_laplacian = -dense_laplacian_matrix(grid)?.matrix().clone();
        let potential = potential(grid, lambda, center);
        let mut matrix = neg_laplacian.clone();
        for (i, p) in potential.iter().enumerate() {
            matrix[(i, i)] += p + kappa;
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let m = matrix.nrows();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(m, m, |i, c| eig.eigenvectors[(i, order[c])]);
        Ok(ToyOperator {
            grid: grid.clone(),
            lambda,
            kappa,
            potential,
            matrix,
            neg_laplacian,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigenvalues of `A_κ`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// `max |⟨e_k, e_l⟩_h - δ_kl|` for the `⟨·,·⟩_h`-normalised eigenvectors.
    pub fn orthonormality_defect(&self) -> f64 {
        // Columns scaled by 1/√h have unit ⟨·,·⟩_h norm, so the Gram matrix
        // is QᵀQ itself.
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let m = gram.nrows();
        (gram - DMatrix::<f64>::identity(m, m)).amax()
    }

    fn interior(&self, v: &Field) -> DVector<Complex64> {
        let m = self.matrix.nrows();
        DVector::from_iterator(m, v.values()[1..=m].iter().copied())
    }

    fn to_field(&self, x: &DVector<Complex64>) -> Field {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        out[1..=x.len()].copy_from_slice(x.as_slice());
        Field::from_parts(self.grid.clone(), out)
    }

    fn check(&self, v: &Field) -> Result<()> {
        if v.len() != self.grid.len() || v.grid().spacing() != self.grid.spacing() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn real_times(m: &DMatrix<f64>, x: &DVector<Complex64>) -> DVector<Complex64> {
        let re = m * x.map(|z| z.re);
        let im = m * x.map(|z| z.im);
        DVector::from_iterator(x.len(), re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)))
    }

    /// `A_κ v`.
    pub fn apply(&self, v: &Field) -> Result<Field> {
        self.check(v)?;
        Ok(self.to_field(&Self::real_times(&self.matrix, &self.interior(v))))
    }

    /// `-Δ_h v` with Dirichlet closure.
    pub fn apply_neg_laplacian(&self, v: &Field) -> Result<Field> {
        self.check(v)?;
        Ok(self.to_field(&Self::real_times(&self.neg_laplacian, &self.interior(v))))
    }

    /// Euclidean eigen-coefficients `Qᵀ v` of the interior values.
    pub fn to_modes(&self, v: &Field) -> DVector<Complex64> {
        Self::real_times(&self.eigenvectors.transpose(), &self.interior(v))
    }

    pub fn from_modes(&self, c: &DVector<Complex64>) -> Field {
        self.to_field(&Self::real_times(&self.eigenvectors, c))
    }

    /// Eigenvalues of the unshifted `A`.
    pub fn unshifted_eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k] - self.kappa
    }

    /// `e^{-itA} v` (the `κ` shift removed).
    pub fn propagate(&self, v: &Field, t: f64) -> Result<Field> {
        self.propagate_with_shift(v, t, 0.0)
    }

    /// `e^{-itA_κ} v`.
    pub fn propagate_shifted(&self, v: &Field, t: f64) -> Result<Field> {
        self.propagate_with_shift(v, t, self.kappa)
    }

    fn propagate_with_shift(&self, v: &Field, t: f64, shift: f64) -> Result<Field> {
        self.check(v)?;
        let mut c = self.to_modes(v);
        for (k, z) in c.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -t * (self.eigenvalues[k] - self.kappa + shift));
        }
        Ok(self.from_modes(&c))
    }

    /// `‖v‖²_{H¹_h} = ‖v‖²_{L²_h} + ⟨-Δ_h v, v⟩_h`.
    pub fn h1_norm(&self, v: &Field) -> f64 {
        let x = self.interior(v);
        let lx = Self::real_times(&self.neg_laplacian, &x);
        let q: f64 = x.iter().zip(lx.iter()).map(|(a, b)| (a.conj() * b).re + a.norm_sqr()).sum();
        (self.grid.spacing() * q).max(0.0).sqrt()
    }
}

/// `-min eig(A)`, rounded up to the [`KAPPA_RESOLUTION`] lattice by bisection.
pub fn choose_kappa(grid: &Arc<Grid>, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "choose_kappa expects lambda > 0, got {lambda}"
        )));
    }
    let base = ToyOperator::build(grid, lambda, 0.0)?.min_eigenvalue();
    // A + κ has spectrum shifted exactly by κ.
    let admissible = |k: u64| base + k as f64 * KAPPA_RESOLUTION >= -POSITIVITY_TOL;
    let mut lo = 0u64;
    if admissible(lo) {
        return Ok(0.0);
    }
    let mut hi = ((-base) / KAPPA_RESOLUTION).ceil() as u64 + 1;
    while !admissible(hi) {
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if admissible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 * KAPPA_RESOLUTION)
}

/// Empirical constants of the norm equivalences for `A_κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Extremes of `⟨A_κ v, v⟩ / ‖v‖²_{H¹}` over all discrete `v`.
    pub c1_hat: f64,
    pub big_c1_hat: f64,
    /// Smallest `c₂` with `‖Δv‖ - c₂‖v‖_{H¹} ≤ ‖A_κ v‖` for every `v`.
    pub c2_hat: f64,
    /// Smallest `C₂` with `‖A_κ v‖ ≤ C₂ ‖v‖_{H²}` for every `v`.
    pub big_c2_hat: f64,
    /// Extremes of the H¹ Rayleigh ratio over the random samples.
    pub sample_range: (f64, f64),
    pub n_samples: usize,
}

/// Extreme eigenvalues of the pencil `(A, B)` with `B` symmetric positive
/// definite.
fn pencil_extremes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = Cholesky::new(b.clone())
        .ok_or_else(|| Error::Numerical("Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let ev = SymmetricEigen::new(c).eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Smooth random Dirichlet fields: low sine modes with decaying amplitudes.
pub fn random_smooth_dirichlet(grid: &Arc<Grid>, rng: &mut impl Rng) -> Field {
    const MODES: usize = 12;
    let coeffs: Vec<Complex64> = (1..=MODES)
        .map(|k| {
            let amp = 1.0 / (k * k) as f64;
            Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp))
        })
        .collect();
    let a = grid.half_width();
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            if j == 0 || j == grid.cells() {
                return Complex64::new(0.0, 0.0);
            }
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * ((i + 1) as f64 * std::f64::consts::PI * (x + a) / (2.0 * a)).sin())
                .sum()
        })
        .collect();
    Field::from_parts(grid.clone(), values)
}

pub fn equivalence_probe(op: &ToyOperator, n_samples: usize, seed: u64) -> Result<EquivalenceReport> {
    let m = op.matrix.nrows();
    let identity = DMatrix::<f64>::identity(m, m);
    let l = &op.neg_laplacian;
    let b1 = &identity + l;
    let (c1_hat, big_c1_hat) = pencil_extremes(&op.matrix, &b1)?;

    let mut w2 = DMatrix::<f64>::zeros(m, m);
    for (i, p) in op.potential.iter().enumerate() {
        w2[(i, i)] = (p + op.kappa).powi(2);
    }
    let (_, c2_sq) = pencil_extremes(&w2, &b1)?;
    let b2 = &b1 + l * l;
    let a2 = &op.matrix * &op.matrix;
    let (_, big_c2_sq) = pencil_extremes(&a2, &b2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample_range = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..n_samples {
        let v = random_smooth_dirichlet(&op.grid, &mut rng);
        let r = rayleigh_h1(op, &v)?;
        sample_range = (sample_range.0.min(r), sample_range.1.max(r));
    }
    Ok(EquivalenceReport {
        c1_hat,
        big_c1_hat,
        c2_hat: c2_sq.max(0.0).sqrt(),
        big_c2_hat: big_c2_sq.max(0.0).sqrt(),
        sample_range,
        n_samples,
    })
}

/// `⟨A_κ v, v⟩_h / ‖v‖²_{H¹_h}`.
pub fn rayleigh_h1(op: &ToyOperator, v: &Field) -> Result<f64> {
    let av = op.apply(v)?;
    let h = op.grid.spacing();
    let q: f64 = av.values().iter().zip(v.values()).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * h;
    Ok(q / op.h1_norm(v).powi(2))
}

/// Exact-in-time evolution `v(t_j) = e^{-i t_j A} v0` at `t_j = j T / J`.
pub fn toy_evolve(op: &ToyOperator, v0: &Field, final_time: f64, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidParameter("J must be at least 1".into()));
    }
    let basis = ModeBasis::new(&op.grid);
    let v0 = v0.on_grid(op.grid.clone())?;
    let modes = op.to_modes(&v0);
    let tau = final_time / steps as f64;
    let mut traj = Trajectory::default();
    for j in 0..=steps {
        let t = j as f64 * tau;
        let c = DVector::from_iterator(
            modes.len(),
            modes
                .iter()
                .enumerate()
                .map(|(k, z)| z * Complex64::from_polar(1.0, -t * op.unshifted_eigenvalue(k))),
        );
        let v = op.from_modes(&c);
        traj.times.push(t);
        traj.steps.push(j);
        traj.records.push(DiagnosticsRecord::compute(&basis, &v, op.lambda, t));
        traj.states.push(v);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inner_product, l2_norm, Weighting};

    fn grid(k: u32) -> Arc<Grid> {
        Grid::new(16.0, k, BoundaryCondition::Dirichlet).unwrap()
    }

    #[test]
    fn plain_laplacian_when_lambda_zero() {
        let g = grid(6);
        let op = ToyOperator::build(&g, 0.0, 0.0).unwrap();
        let oracle = dense_laplacian_matrix(&g).unwrap().eigen();
        let mut expected: Vec<f64> = oracle.eigenvalues.iter().map(|l| -l).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in op.eigenvalues().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn focusing_is_nonnegative_without_shift() {
        let op = ToyOperator::build(&grid(8), -1.0, 0.0).unwrap();
        assert!(op.min_eigenvalue() >= 0.0);
    }

    #[test]
    fn rejects_non_dirichlet() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        assert!(matches!(
            ToyOperator::build(&g, 1.0, 0.0),
            Err(Error::WrongBoundary { .. })
        ));
        let g = grid(13);
        assert!(matches!(ToyOperator::build(&g, 1.0, 0.0), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn regression_constants() {
        use super::reference::*;
        let g = Grid::new(16.0, 8, BoundaryCondition::Dirichlet).unwrap();
        let kappa = choose_kappa(&g, 1.0).unwrap();
        assert!((kappa - KAPPA_K8).abs() < 1e-12, "{kappa}");
        let close = |a: f64, b: f64| (a - b).abs() <= RELATIVE_TOL * b.abs();
        let r = equivalence_probe(&ToyOperator::build(&g, -1.0, 0.0).unwrap(), 16, 3).unwrap();
        assert!(close(r.c1_hat, FOCUSING_C1) && close(r.big_c1_hat, FOCUSING_BIG_C1), "{r:?}");
        let r = equivalence_probe(&ToyOperator::build(&g, 1.0, kappa).unwrap(), 16, 3).unwrap();
        assert!(close(r.c1_hat, DEFOCUSING_C1) && close(r.big_c1_hat, DEFOCUSING_BIG_C1), "{r:?}");
    }

    #[test]
    fn kappa_examples() {
        let g = grid(8);
        assert!(choose_kappa(&g, 1e-6).unwrap().abs() < 1e-2);
        let kappa = choose_kappa(&g, 1.0).unwrap();
        let op = ToyOperator::build(&g, 1.0, kappa).unwrap();
        assert!(op.min_eigenvalue() >= -POSITIVITY_TOL);
        let below = ToyOperator::build(&g, 1.0, kappa - 0.1).unwrap();
        assert!(below.min_eigenvalue() < 0.0);
        let just_below = ToyOperator::build(&g, 1.0, kappa - KAPPA_RESOLUTION).unwrap();
        assert!(just_below.min_eigenvalue() < -POSITIVITY_TOL);
        assert!(choose_kappa(&g, -1.0).is_err());
    }

    #[test]
    fn structure_and_group_laws() {
        let g = grid(7);
        let kappa = choose_kappa(&g, 1.0).unwrap();
        let op = ToyOperator::build(&g, 1.0, kappa).unwrap();
        assert!(op.symmetry_defect() <= 1e-12 * op.matrix().amax());
        assert!(op.orthonormality_defect() <= 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_smooth_dirichlet(&g, &mut rng);
        let v = random_smooth_dirichlet(&g, &mut rng);
        let a = inner_product(&op.apply(&u).unwrap(), &v, Weighting::Plain);
        let b = inner_product(&u, &op.apply(&v).unwrap(), Weighting::Plain);
        assert!((a - b).norm() <= 1e-11 * a.norm().max(1.0));

        assert!(op.propagate(&u, 0.0).unwrap().sub(&u).max_abs() < 1e-13);
        let n0 = l2_norm(&u, Weighting::Plain);
        let n1 = l2_norm(&op.propagate(&u, 1.0).unwrap(), Weighting::Plain);
        assert!((n0 - n1).abs() <= 1e-10 * n0);

        let ab = op.propagate(&op.propagate(&u, 0.4).unwrap(), 0.9).unwrap();
        let direct = op.propagate(&u, 1.3).unwrap();
        assert!(ab.sub(&direct).max_abs() <= 1e-10);

        let t = 0.7;
        let shifted = op.propagate_shifted(&u, t).unwrap();
        let rotated = op.propagate(&u, t).unwrap().scale(Complex64::from_polar(1.0, -t * kappa));
        assert!(shifted.sub(&rotated).max_abs() <= 1e-10);
    }

    #[test]
    fn equivalence_for_pure_laplacian() {
        let op = ToyOperator::build(&grid(6), 0.0, 0.0).unwrap();
        let r = equivalence_probe(&op, 20, 1).unwrap();
        assert!(r.c1_hat > 0.0 && r.big_c1_hat <= 1.0 + 1e-12);
        assert!(r.sample_range.0 >= r.c1_hat - 1e-12 && r.sample_range.1 <= r.big_c1_hat + 1e-12);
    }

    #[test]
    fn c2_bound_holds_on_holdout() {
        let g = grid(7);
        let op = ToyOperator::build(&g, -1.0, 0.0).unwrap();
        let r = equivalence_probe(&op, 10, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let v = random_smooth_dirichlet(&g, &mut rng);
            let lap = l2_norm(&op.apply_neg_laplacian(&v).unwrap(), Weighting::Plain);
            let av = l2_norm(&op.apply(&v).unwrap(), Weighting::Plain);
            assert!(lap - r.c2_hat * op.h1_norm(&v) <= av * (1.0 + 1e-12));
        }
    }

    #[test]
    fn evolve_eigenvector_rotates() {
        let g = grid(6);
        let op = ToyOperator::build(&g, 1.0, 2.0).unwrap();
        let mut c = DVector::from_element(op.eigenvalues().len(), Complex64::new(0.0, 0.0));
        c[3] = Complex64::new(1.0, 0.0);
        let e3 = op.from_modes(&c);
        let traj = toy_evolve(&op, &e3, 1.0, 10).unwrap();
        let mu = op.unshifted_eigenvalue(3);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let expected = e3.scale(Complex64::from_polar(1.0, -t * mu));
            assert!(s.sub(&expected).max_abs() < 1e-12);
        }
        let m0 = traj.records[0].mass;
        assert!(traj.records.iter().all(|r| (r.mass - m0).abs() <= 1e-10 * m0));
    }
}
