//! Splitting of the differentiated nonlinearity into the four terms
//! `V₁ … V₄` and the discrete residual of the identity
//!
//! `∂ₓ(λ u log|u|²) = λ log|χ|² v + V₁[v] + V₂[v] + V₃[v] + V₄[v]`,  `v = ∂ₓu`,
//!
//! valid for odd `u` with `u(0) = 0` as long as `𝒱[v]` stays away from zero.

use num_complex::Complex64;

use super::averaging::{derivative, v_average};
use super::cutoff::{chi, chi_prime, xfrak, xfrak_prime};
use crate::error::{Error, Result};
use crate::grid::{odd_defect, Field};
use crate::solver::phi_log;

/// Relative floor below which `min |𝒱[v]|` counts as vanishing.
pub const VANISHING_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct VTerms {
    pub v1: Field,
    pub v2: Field,
    pub v3: Field,
    pub v4: Field,
}

impl VTerms {
    pub fn sum(&self) -> Field {
        self.v1.add(&self.v2).add(&self.v3).add(&self.v4)
    }
}

/// Nodewise cutoff data, shared by every evaluation on one grid.
#[derive(Debug, Clone)]
pub struct CutoffTable {
    /// `χ'/𝔛 - 1 - x 𝔛'/𝔛`
    pub v1_profile: Vec<f64>,
    /// `log 𝔛`
    pub log_xfrak: Vec<f64>,
}

impl CutoffTable {
    pub fn new(nodes: &[f64]) -> Self {
        let v1_profile = nodes
            .iter()
            .map(|&x| {
                let xf = xfrak(x);
                chi_prime(x) / xf - 1.0 - x * xfrak_prime(x) / xf
            })
            .collect();
        let log_xfrak = nodes.iter().map(|&x| xfrak(x).ln()).collect();
        CutoffTable {
            v1_profile,
            log_xfrak,
        }
    }
}

pub fn vj_terms(v: &Field, lambda: f64) -> Result<VTerms> {
    let table = CutoffTable::new(v.grid().nodes());
    vj_terms_with(&table, v, lambda)
}

pub fn vj_terms_with(table: &CutoffTable, v: &Field, lambda: f64) -> Result<VTerms> {
    let avg = v_average(v);
    let min_abs = avg.values().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let floor = VANISHING_FLOOR * v.max_abs();
    if !(min_abs > floor) {
        return Err(Error::VanishingAverage { min_abs, floor });
    }
    let grid = v.grid().clone();
    let n = grid.len();
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    let mut v3 = Vec::with_capacity(n);
    let mut v4 = Vec::with_capacity(n);
    for j in 0..n {
        let a = avg.values()[j];
        let f = v.values()[j];
        let a2 = a.norm_sqr();
        v1.push(a * (2.0 * lambda * table.v1_profile[j]));
        v2.push(f * (lambda * a2.ln()));
        v3.push(a * (2.0 * lambda * (f * a.conj()).re / a2));
        v4.push(f * (-2.0 * lambda * table.log_xfrak[j]));
    }
    Ok(VTerms {
        v1: Field::from_parts(grid.clone(), v1),
        v2: Field::from_parts(grid.clone(), v2),
        v3: Field::from_parts(grid.clone(), v3),
        v4: Field::from_parts(grid, v4),
    })
}

/// Exclusion radius used by [`decomposition_residual`], in physical units.
///
/// The difference error of `u log|u|²` behaves like `h²/x²`, so a radius
/// proportional to `h` never converges.
pub const RESIDUAL_EXCLUSION: f64 = 1.0;

/// `max_{|x_j| ≥ r} |D_h(λ u log|u|²) - (λ log|χ|² v + Σ V_j[v])|` with
/// `v = D_h u` and `r = max(2h, RESIDUAL_EXCLUSION)`; the endpoints are
/// excluded as well.
pub fn decomposition_residual(u: &Field, lambda: f64) -> Result<f64> {
    let h = u.grid().spacing();
    decomposition_residual_outside(u, lambda, (2.0 * h).max(RESIDUAL_EXCLUSION))
}

pub fn decomposition_residual_outside(u: &Field, lambda: f64, radius: f64) -> Result<f64> {
    let v = derivative(u);
    let terms = vj_terms(&v, lambda)?;
    let sum = terms.sum();
    let nonlinear = u.map(|_, w| w * (lambda * phi_log(w)));
    let lhs = derivative(&nonlinear);
    let grid = u.grid();
    let last = grid.len() - 1;
    let mut worst = 0.0f64;
    for j in 1..last {
        let x = grid.x(j);
        if x.abs() < radius {
            continue;
        }
        let potential = lambda * chi(x).powi(2).ln();
        let rhs = v.values()[j] * potential + sum.values()[j];
        worst = worst.max((lhs.values()[j] - rhs).norm());
    }
    Ok(worst)
}

/// Scalar diagnostics of membership in the class of odd data with a single
/// first-order zero at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReport {
    pub odd_defect: f64,
    /// `min_{x_j ≠ 0} |u(x_j)|`.
    pub min_offcenter_abs: f64,
    /// `D_h u(0)`.
    pub center_slope: Complex64,
    /// `min_j |𝒱[D_h u](x_j)|`, the candidate lower bound `α`.
    pub min_abs_v: f64,
}

pub fn membership_d(u: &Field) -> MembershipReport {
    let c = u.grid().center();
    let min_offcenter_abs = u
        .values()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != c)
        .map(|(_, z)| z.norm())
        .fold(f64::INFINITY, f64::min);
    let d = derivative(u);
    let avg = v_average(&d);
    MembershipReport {
        odd_defect: odd_defect(u),
        min_offcenter_abs,
        center_slope: d.values()[c],
        min_abs_v: avg.values().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::loglog_slope;
    use crate::grid::{sample, BoundaryCondition, Grid};

    #[test]
    fn constant_input() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        let c = 0.8f64;
        let lambda = 1.3;
        let t = vj_terms(&Field::constant(g.clone(), Complex64::new(c, 0.0)), lambda).unwrap();
        for (j, &x) in g.nodes().iter().enumerate() {
            assert!((t.v2.values()[j].re - lambda * c * (c * c).ln()).abs() < 1e-14);
            assert!((t.v3.values()[j].re - 2.0 * lambda * c).abs() < 1e-14);
            let v4 = -2.0 * lambda * c * xfrak(x).ln();
            assert!((t.v4.values()[j].re - v4).abs() < 1e-14);
        }
    }

    #[test]
    fn v1_vanishes_outside_two() {
        let g = Grid::new(16.0, 8, BoundaryCondition::Neumann).unwrap();
        let u = sample(&g, f64::tanh).unwrap();
        let t = vj_terms(&derivative(&u), 1.0).unwrap();
        for (&x, z) in g.nodes().iter().zip(t.v1.values()) {
            if x.abs() >= 2.0 {
                assert!(z.norm() < 1e-15, "x = {x}");
            }
        }
    }

    #[test]
    fn vanishing_average_is_an_error() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        // 𝒱[x] = x/2 vanishes at the origin.
        let v = sample(&g, |x| x).unwrap();
        assert!(matches!(vj_terms(&v, 1.0), Err(Error::VanishingAverage { .. })));
    }

    fn residual_slope(a: f64, f: impl Fn(f64) -> f64) -> f64 {
        let pts: Vec<(f64, f64)> = (6..=10)
            .map(|k| {
                let g = Grid::new(a, k, BoundaryCondition::Neumann).unwrap();
                let u = sample(&g, &f).unwrap();
                (g.spacing(), decomposition_residual(&u, 1.0).unwrap())
            })
            .collect();
        loglog_slope(&pts)
    }

    #[test]
    fn residual_is_second_order() {
        // On a = 16 the average e^{-x²/4} drops below the vanishing floor.
        let s = residual_slope(8.0, |x| x * (-x * x / 4.0).exp());
        assert!((s - 2.0).abs() <= 0.3, "gaussian-odd slope {s}");
        let s = residual_slope(16.0, f64::tanh);
        assert!((s - 2.0).abs() <= 0.3, "tanh slope {s}");
        let s = residual_slope(16.0, |x| x);
        assert!((s - 2.0).abs() <= 0.3, "linear slope {s}");
    }

    #[test]
    fn membership_examples() {
        let g = Grid::new(16.0, 8, BoundaryCondition::Neumann).unwrap();
        let r = membership_d(&sample(&g, f64::tanh).unwrap());
        assert!((r.center_slope.re - 1.0).abs() < 1e-2);
        assert!(r.min_abs_v > 0.0);
        assert!(r.odd_defect < 1e-15);

        let r = membership_d(&sample(&g, |x| 1.0 - (std::f64::consts::PI * x / 16.0).cos()).unwrap());
        assert!(r.odd_defect > 0.1);

        let r = membership_d(&sample(&g, |x| x * (1.0 - x * x / 256.0)).unwrap());
        assert_eq!(r.min_offcenter_abs, 0.0);
    }
}
