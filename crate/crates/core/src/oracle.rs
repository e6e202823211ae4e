//! Reference solutions.
//!
//! * the standing Gausson `e^{iωt} b e^{-αx²/2}` (`λ < 0`, `α = -λ`),
//! * Gaussian profiles `b(t) e^{-a(t)x²/2}` driven by a two-dimensional ODE,
//! * the Picard iteration for the Duhamel form of the derivative equation
//!   `i v_t = A v + Σ V_j[v]`, `v = ∂ₓu`.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::decomposition::{vj_terms_with, CutoffTable};
use crate::functionals::v_average;
use crate::grid::{sample_complex, Field, Grid};
use crate::solver::{run_with_observer, SplitConfig};
use crate::spectral::{l2_norm, Weighting};
use crate::toymodel::ToyOperator;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Tail `|u(±a)| / b` above which Neumann truncation dominates the error.
pub const GAUSSON_TAIL_LIMIT: f64 = 1e-14;

/// `u(t, x) = e^{iωt} b e^{-αx²/2}` with `α = -λ`, `b = exp(-(α+ω)/(2λ))`.
pub fn standing_gausson(grid: &Arc<Grid>, lambda: f64, omega: f64, t: f64) -> Result<Field> {
    let (alpha, b) = gausson_parameters(lambda, omega)?;
    let a = grid.half_width();
    let tail = (-alpha * a * a / 2.0).exp();
    if tail > GAUSSON_TAIL_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "Gausson tail {tail:.3e} at |x| = {a} exceeds {GAUSSON_TAIL_LIMIT:e}; widen the domain"
        )));
    }
    let phase = Complex64::from_polar(b, omega * t);
    sample_complex(grid, |x| phase * (-alpha * x * x / 2.0).exp())
}

/// `(α, b)` of the standing Gausson.
pub fn gausson_parameters(lambda: f64, omega: f64) -> Result<(f64, f64)> {
    if !(lambda < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "standing Gausson needs lambda < 0, got {lambda}"
        )));
    }
    let alpha = -lambda;
    Ok((alpha, (-(alpha + omega) / (2.0 * lambda)).exp()))
}

/// Right-hand side of the Gaussian-profile ODE for `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthEquation {
    /// `i ȧ = 2a² + 2λ Re a`, obtained by substituting the ansatz.
    #[default]
    Substituted,
    /// `i ȧ = a² + λ Re a`, the form printed alongside the Gaussian family.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOracleState {
    pub a: Complex64,
    pub b: Complex64,
    pub lambda: f64,
    pub t: f64,
}

impl GaussianOracleState {
    pub fn new(a: Complex64, b: Complex64, lambda: f64) -> Self {
        GaussianOracleState { a, b, lambda, t: 0.0 }
    }

    /// `b e^{-a x²/2}` sampled on the grid.
    pub fn profile(&self, grid: &Arc<Grid>) -> Result<Field> {
        sample_complex(grid, |x| self.b * (-self.a * x * x / 2.0).exp())
    }

    /// `|b|² √(π / Re a)`, the L² mass of the profile on the whole line.
    pub fn mass(&self) -> f64 {
        self.b.norm_sqr() * (std::f64::consts::PI / self.a.re).sqrt()
    }
}

fn ode_rhs(
    lambda: f64,
    form: WidthEquation,
    a: Complex64,
    b: Complex64,
) -> (Complex64, Complex64) {
    let (quad, lin) = match form {
        WidthEquation::Substituted => (2.0, 2.0),
        WidthEquation::Printed => (1.0, 1.0),
    };
    // i ȧ = q a² + l λ Re a   and   i ḃ = a b + λ b log|b|².
    let da = -I * (a * a * quad + lin * lambda * a.re);
    let db = -I * (a * b + b * (lambda * b.norm_sqr().ln()));
    (da, db)
}

/// Classical RK4 for `(a, b)`; returns the state after every step.
pub fn gaussian_ode_integrate(
    state0: GaussianOracleState,
    final_time: f64,
    dt: f64,
    form: WidthEquation,
) -> Result<Vec<GaussianOracleState>> {
    if !(dt > 0.0) || !(final_time >= 0.0) {
        return Err(Error::InvalidParameter("dt must be positive and T nonnegative".into()));
    }
    if state0.a.re <= 0.0 {
        return Err(Error::WidthLost {
            re_a: state0.a.re,
            t: state0.t,
        });
    }
    let steps = (final_time / dt).round().max(1.0) as usize;
    let h = final_time / steps as f64;
    let lam = state0.lambda;
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = state0;
    out.push(s);
    for j in 1..=steps {
        let (a, b) = (s.a, s.b);
        let (ka1, kb1) = ode_rhs(lam, form, a, b);
        let (ka2, kb2) = ode_rhs(lam, form, a + ka1 * (h / 2.0), b + kb1 * (h / 2.0));
        let (ka3, kb3) = ode_rhs(lam, form, a + ka2 * (h / 2.0), b + kb2 * (h / 2.0));
        let (ka4, kb4) = ode_rhs(lam, form, a + ka3 * h, b + kb3 * h);
        s.a = a + (ka1 + ka2 * 2.0 + ka3 * 2.0 + ka4) * (h / 6.0);
        s.b = b + (kb1 + kb2 * 2.0 + kb3 * 2.0 + kb4) * (h / 6.0);
        s.t = state0.t + j as f64 * h;
        if !(s.a.re > 0.0) {
            return Err(Error::WidthLost { re_a: s.a.re, t: s.t });
        }
        out.push(s);
    }
    Ok(out)
}

/// Norm in which the iterates `w_n` are confined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BallNorm {
    /// `‖w‖_{H¹_h} ≤ ε`, default radius `α / (2 C_emb)`.
    #[default]
    H1,
    /// `max_j |w_j| ≤ ε`, default radius `α / 2`. This is the bound the H¹
    /// ball is only a sufficient condition for.
    Sup,
}

/// Outcome of comparing both width equations against the splitting solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthValidation {
    /// `‖ansatz(T) - u_split(T)‖_{L²_h}` for the substituted form.
    pub substituted_error: f64,
    pub printed_error: f64,
    pub chosen: WidthEquation,
}

/// Integrates both forms from `state0` to `T`, runs the splitting solver on
/// the sampled profile with `steps` steps, and picks the form whose
/// reconstructed profile is closer to the PDE solution.
pub fn validate_width_equation(
    grid: &Arc<Grid>,
    state0: GaussianOracleState,
    final_time: f64,
    steps: usize,
) -> Result<WidthValidation> {
    let u0 = state0.profile(grid)?;
    let cfg = SplitConfig::new(state0.lambda, final_time, steps).record_every(steps);
    let split = run_with_observer(&u0, &cfg, |_, _, _| {})?;
    let dt = (final_time / steps as f64).min(1e-3 / state0.a.norm().max(1.0));
    let error = |form| -> Result<f64> {
        let path = gaussian_ode_integrate(state0, final_time, dt, form)?;
        let end = path.last().expect("nonempty path").profile(grid)?;
        Ok(l2_norm(&end.sub(&split), Weighting::Plain))
    };
    let substituted_error = error(WidthEquation::Substituted)?;
    let printed_error = error(WidthEquation::Printed)?;
    let chosen = if substituted_error <= printed_error {
        WidthEquation::Substituted
    } else {
        WidthEquation::Printed
    };
    Ok(WidthValidation {
        substituted_error,
        printed_error,
        chosen,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub final_time: f64,
    /// Quadrature nodes on `[0, T]`, endpoints included.
    pub n_time: usize,
    pub max_iter: usize,
    pub contraction_tol: f64,
    /// Radius of the ball the iterates must stay in; `None` derives it from
    /// `α = min|𝒱[v0]|`.
    pub epsilon_ball: Option<f64>,
    pub ball_norm: BallNorm,
}

impl PicardConfig {
    pub fn new(final_time: f64) -> Self {
        PicardConfig {
            final_time,
            n_time: 64,
            max_iter: 50,
            contraction_tol: 1e-10,
            epsilon_ball: None,
            ball_norm: BallNorm::H1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_time < 16 {
            return Err(Error::InvalidParameter(format!("n_time must be >= 16, got {}", self.n_time)));
        }
        if let Some(eps) = self.epsilon_ball {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter("epsilon_ball must be positive".into()));
            }
        }
        if self.max_iter == 0 || !(self.contraction_tol > 0.0) {
            return Err(Error::InvalidParameter("max_iter and contraction_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub times: Vec<f64>,
    /// `v(t_m) = v0 + w(t_m)`.
    pub states: Vec<Field>,
    /// `sup_t ‖w_{n+1} - w_n‖_{L²_h}` per iteration.
    pub differences: Vec<f64>,
    /// Successive ratios of `differences`.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub epsilon_ball: f64,
    /// Largest ball norm of the accepted iterates.
    pub ball_radius: f64,
    pub alpha: f64,
}

/// `sup_j |v_j| / ‖v‖_{H¹_h}` over discrete Dirichlet fields, computed from
/// the diagonal of the inverse Gram matrix.
pub fn embedding_constant(op: &ToyOperator) -> Result<f64> {
    let g = op.grid();
    let m = g.cells() - 1;
    let mut gram = nalgebra::DMatrix::<f64>::identity(m, m);
    // Gram of the H¹_h inner product: h (I - Δ_h).
    let probe = Field::zeros(g.clone());
    for i in 0..m {
        let mut e = probe.values().to_vec();
        e[i + 1] = Complex64::new(1.0, 0.0);
        let col = op.apply_neg_laplacian(&Field::from_parts(g.clone(), e))?;
        for r in 0..m {
            gram[(r, i)] += col.values()[r + 1].re;
        }
    }
    gram *= g.spacing();
    let chol = nalgebra::Cholesky::new(gram)
        .ok_or_else(|| Error::Numerical("H1 Gram matrix not positive definite".into()))?;
    let inv = chol.inverse();
    Ok((0..m).map(|i| inv[(i, i)]).fold(0.0, f64::max).sqrt())
}

/// Fixed-point iteration of
/// `w(t) = e^{-itA}v0 - v0 - i ∫₀ᵗ e^{-i(t-s)A} Σ V_j[v0 + w(s)] ds`
/// on `n_time` nodes with the trapezoid rule in `s`.
pub fn picard_duhamel_solve(op: &ToyOperator, v0: &Field, cfg: &PicardConfig) -> Result<PicardOutcome> {
    cfg.validate()?;
    let grid = op.grid().clone();
    let v0 = v0.on_grid(grid.clone())?;
    let last = grid.len() - 1;
    let edge = v0.values()[0].norm().max(v0.values()[last].norm());
    if edge > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "v0 must vanish at the boundary, |v0(±a)| = {edge:.3e}"
        )));
    }
    let lambda = op.lambda();
    let alpha = v_average(&v0)
        .values()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    let epsilon_ball = match (cfg.epsilon_ball, cfg.ball_norm) {
        (Some(e), _) => e,
        (None, BallNorm::H1) => 0.5 * alpha / embedding_constant(op)?,
        (None, BallNorm::Sup) => 0.5 * alpha,
    };
    let ball_radius = |f: &Field| match cfg.ball_norm {
        BallNorm::H1 => op.h1_norm(f),
        BallNorm::Sup => f.max_abs(),
    };
    let table = CutoffTable::new(grid.nodes());

    let n = cfg.n_time;
    let dt = cfg.final_time / (n - 1) as f64;
    let times: Vec<f64> = (0..n).map(|m| m as f64 * dt).collect();
    let mu: Vec<f64> = (0..op.eigenvalues().len()).map(|k| op.unshifted_eigenvalue(k)).collect();
    let v0_modes = op.to_modes(&v0);

    // Free part e^{-itA}v0 - v0 for every node.
    let free: Vec<Field> = times
        .iter()
        .map(|&t| {
            let c = DVector::from_iterator(
                mu.len(),
                v0_modes.iter().zip(&mu).map(|(z, &m)| z * Complex64::from_polar(1.0, -t * m)),
            );
            op.from_modes(&c).sub(&v0)
        })
        .collect();

    let mut w: Vec<Field> = vec![Field::zeros(grid.clone()); n];
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        // Σ V_j[v0 + w(s)] mapped to e^{isA}-rotated eigen-coefficients.
        let rotated: Vec<DVector<Complex64>> = times
            .iter()
            .zip(&w)
            .map(|(&s, ws)| {
                let terms = vj_terms_with(&table, &v0.add(ws), lambda)?;
                let c = op.to_modes(&terms.sum());
                Ok(DVector::from_iterator(
                    mu.len(),
                    c.iter().zip(&mu).map(|(z, &m)| z * Complex64::from_polar(1.0, s * m)),
                ))
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(n);
        let mut integral = DVector::from_element(mu.len(), Complex64::new(0.0, 0.0));
        for m in 0..n {
            if m > 0 {
                integral += (&rotated[m] + &rotated[m - 1]) * Complex64::new(0.5 * dt, 0.0);
            }
            let t = times[m];
            let c = DVector::from_iterator(
                mu.len(),
                integral
                    .iter()
                    .zip(&mu)
                    .map(|(z, &mm)| -I * z * Complex64::from_polar(1.0, -t * mm)),
            );
            next.push(free[m].add(&op.from_modes(&c)));
        }
        let diff = next
            .iter()
            .zip(&w)
            .map(|(a, b)| l2_norm(&a.sub(b), Weighting::Plain))
            .fold(0.0, f64::max);
        if let Some(&prev) = differences.last() {
            ratios.push(diff / prev);
        }
        differences.push(diff);
        let radius = next.iter().map(ball_radius).fold(0.0, f64::max);
        if radius > epsilon_ball {
            return Err(Error::LeftBall {
                norm: radius,
                radius: epsilon_ball,
            });
        }
        w = next;
        if diff < cfg.contraction_tol {
            converged = true;
            break;
        }
    }
    let ball_radius = w.iter().map(ball_radius).fold(0.0, f64::max);
    let states = w.iter().map(|wi| v0.add(wi)).collect();
    Ok(PicardOutcome {
        times,
        states,
        differences,
        ratios,
        iterations,
        converged,
        epsilon_ball,
        ball_radius,
        alpha,
    })
}

/// `max_m ‖v(t_m) - RHS[v](t_m)‖_{L²_h}` with the Duhamel integral taken on a
/// grid `refine` times finer, the converged states interpolated linearly in
/// time. With `refine = 1` this is the fixed-point defect; larger values add
/// the `O(Δt²)` quadrature error.
pub fn duhamel_residual(op: &ToyOperator, v0: &Field, outcome: &PicardOutcome, refine: usize) -> Result<f64> {
    let grid = op.grid().clone();
    let v0 = v0.on_grid(grid.clone())?;
    let table = CutoffTable::new(grid.nodes());
    let n = outcome.times.len();
    let t_final = *outcome.times.last().unwrap();
    let fine_n = (n - 1) * refine + 1;
    let dt = t_final / (fine_n - 1) as f64;
    let mu: Vec<f64> = (0..op.eigenvalues().len()).map(|k| op.unshifted_eigenvalue(k)).collect();
    let coarse_dt = t_final / (n - 1) as f64;
    let state_at = |t: f64| -> Field {
        let pos = (t / coarse_dt).min((n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let theta = pos - i as f64;
        outcome.states[i]
            .scale(Complex64::new(1.0 - theta, 0.0))
            .add(&outcome.states[i + 1].scale(Complex64::new(theta, 0.0)))
    };
    let v0_modes = op.to_modes(&v0);
    let mut integral = DVector::from_element(mu.len(), Complex64::new(0.0, 0.0));
    let mut prev: Option<DVector<Complex64>> = None;
    let mut worst = 0.0f64;
    for m in 0..fine_n {
        let s = m as f64 * dt;
        let v = state_at(s);
        let c = op.to_modes(&vj_terms_with(&table, &v, op.lambda())?.sum());
        let rot = DVector::from_iterator(
            mu.len(),
            c.iter().zip(&mu).map(|(z, &mm)| z * Complex64::from_polar(1.0, s * mm)),
        );
        if let Some(p) = &prev {
            integral += (&rot + p) * Complex64::new(0.5 * dt, 0.0);
        }
        prev = Some(rot);
        if m % refine == 0 {
            let total = DVector::from_iterator(
                mu.len(),
                v0_modes
                    .iter()
                    .zip(integral.iter())
                    .zip(&mu)
                    .map(|((z0, zi), &mm)| (z0 - I * zi) * Complex64::from_polar(1.0, -s * mm)),
            );
            let rhs = op.from_modes(&total);
            worst = worst.max(l2_norm(&rhs.sub(&outcome.states[m / refine]), Weighting::Plain));
        }
    }
    Ok(worst)
}
