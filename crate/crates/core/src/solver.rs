//! Strang splitting for `i u_t + Δu = λ u log|u|²`.
//!
//! One step is `Φ_L^{τ/2} ∘ Φ_N^{τ} ∘ Φ_L^{τ/2}` with the exact linear flow
//! `Φ_L^t = e^{itΔ_h}` and the exact logarithmic phase flow
//! `Φ_N^t(w) = e^{-iλtφ(w)} w`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::DiagnosticsRecord;
use crate::grid::Field;
use crate::spectral::{l2_norm, ModeBasis, Weighting};

/// `φ(w) = log|w|²`, and 0 when `|w|²` is zero or subnormal.
pub fn phi_log(w: Complex64) -> f64 {
    let m = w.norm_sqr();
    if m < f64::MIN_POSITIVE {
        0.0
    } else {
        m.ln()
    }
}

pub fn nonlinear_flow(w: &Field, t: f64, lambda: f64) -> Field {
    w.map(|_, z| z * Complex64::from_polar(1.0, -lambda * t * phi_log(z)))
}

/// Reusable stepper owning the transform plans for one grid.
#[derive(Debug, Clone)]
pub struct Strang {
    basis: ModeBasis,
    lambda: f64,
}

impl Strang {
    pub fn new(basis: ModeBasis, lambda: f64) -> Self {
        Strang { basis, lambda }
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn step(&self, u: &Field, tau: f64) -> Result<Field> {
        let half = self.basis.propagate(u, 0.5 * tau)?;
        let kicked = nonlinear_flow(&half, tau, self.lambda);
        self.basis.propagate(&kicked, 0.5 * tau)
    }
}

pub fn strang_step(u: &Field, tau: f64, lambda: f64) -> Result<Field> {
    Strang::new(ModeBasis::new(u.grid()), lambda).step(u, tau)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub lambda: f64,
    pub final_time: f64,
    pub steps: usize,
    /// Diagnostics stride; `None` means `max(1, J/200)`.
    pub record_every: Option<usize>,
    /// Keep the state of every recorded frame.
    pub keep_states: bool,
}

impl SplitConfig {
    pub fn new(lambda: f64, final_time: f64, steps: usize) -> Self {
        SplitConfig {
            lambda,
            final_time,
            steps,
            record_every: None,
            keep_states: false,
        }
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = Some(stride);
        self
    }

    pub fn keep_states(mut self, keep: bool) -> Self {
        self.keep_states = keep;
        self
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn stride(&self) -> usize {
        self.record_every.unwrap_or((self.steps / 200).max(1)).max(1)
    }

    /// `λ = 0` is accepted: it turns the scheme into the exact linear flow,
    /// which the order harness uses as a self-test.
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("J must be at least 1".into()));
        }
        if !self.final_time.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("T and lambda must be finite".into()));
        }
        if self.record_every == Some(0) {
            return Err(Error::InvalidParameter("record_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Steps `j` with `times[i] = j τ`.
    pub steps: Vec<usize>,
    /// States at the recorded frames when requested, otherwise only the last.
    pub states: Vec<Field>,
    pub records: Vec<DiagnosticsRecord>,
    /// Set when the run stopped on a non-finite value.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&Field> {
        self.states.last()
    }
}

/// Runs `J` steps and calls `observe(j, t, u)` after every step (and at
/// `j = 0`). Stops early on a non-finite state.
pub fn run_with_observer(
    u0: &Field,
    cfg: &SplitConfig,
    mut observe: impl FnMut(usize, f64, &Field),
) -> Result<Field> {
    cfg.validate()?;
    let stepper = Strang::new(ModeBasis::new(u0.grid()), cfg.lambda);
    let tau = cfg.tau();
    let mut u = u0.clone();
    observe(0, 0.0, &u);
    for j in 1..=cfg.steps {
        u = stepper.step(&u, tau)?;
        if let Some(index) = u.values().iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "state after Strang step",
                index,
            });
        }
        observe(j, j as f64 * tau, &u);
    }
    Ok(u)
}

pub fn run(u0: &Field, cfg: &SplitConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let basis = ModeBasis::new(u0.grid());
    let stride = cfg.stride();
    let mut traj = Trajectory::default();
    let mut last = (0usize, u0.clone());
    let outcome = run_with_observer(u0, cfg, |j, t, u| {
        if j % stride == 0 || j == cfg.steps {
            traj.times.push(t);
            traj.steps.push(j);
            traj.records.push(DiagnosticsRecord::compute(&basis, u, cfg.lambda, t));
            if cfg.keep_states {
                traj.states.push(u.clone());
            }
        }
        last = (j, u.clone());
    });
    match outcome {
        Ok(_) => {}
        Err(e @ Error::NonFinite { .. }) => {
            traj.aborted = Some(format!("step {}: {e}", last.0 + 1));
        }
        Err(e) => return Err(e),
    }
    if !cfg.keep_states || traj.steps.last() != Some(&last.0) {
        traj.states.push(last.1);
    }
    Ok(traj)
}

/// Result of a three-level time-step refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub taus: [f64; 3],
    /// `‖u_τ - u_ref‖` against the supplied reference, if any.
    pub errors: Option<[f64; 3]>,
    /// `log₂(e(τ₁)/e(τ₂))`, `log₂(e(τ₂)/e(τ₃))` against the reference.
    pub reference_orders: Option<[f64; 2]>,
    /// `log₂(‖u_{τ₁}-u_{τ₂}‖ / ‖u_{τ₂}-u_{τ₃}‖)`; cancels the spatial error.
    pub self_order: f64,
    /// Differences at roundoff level; the order is meaningless.
    pub degenerate: bool,
}

impl OrderEstimate {
    /// The self-convergence order. Unlike the reference orders it does not
    /// saturate at the spatial error shared by all three runs.
    pub fn order(&self) -> f64 {
        self.self_order
    }
}

/// Final states of three runs with `τ`, `τ/2`, `τ/4` (or any three halved
/// steps), compared pairwise and optionally against a reference state.
pub fn observed_order(
    u0: &Field,
    lambda: f64,
    final_time: f64,
    taus: [f64; 3],
    reference: Option<&Field>,
) -> Result<OrderEstimate> {
    let finals = taus
        .iter()
        .map(|&tau| {
            let steps = (final_time / tau).round() as usize;
            if steps == 0 || ((steps as f64) * tau - final_time).abs() > 1e-9 * final_time.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "tau {tau} does not divide T {final_time}"
                )));
            }
            let mut cfg = SplitConfig::new(lambda, final_time, steps);
            cfg.record_every = Some(steps);
            run_with_observer(u0, &cfg, |_, _, _| {})
        })
        .collect::<Result<Vec<_>>>()?;
    let norm = |f: &Field| l2_norm(f, Weighting::Plain);
    let d12 = norm(&finals[0].sub(&finals[1]));
    let d23 = norm(&finals[1].sub(&finals[2]));
    let scale = norm(&finals[2]).max(f64::MIN_POSITIVE);
    let floor = 1e-12 * scale;
    let mut degenerate = d12 <= floor || d23 <= floor;
    let (errors, reference_orders) = match reference {
        Some(r) => {
            let e: Vec<f64> = finals.iter().map(|f| norm(&f.sub(r))).collect();
            if e.iter().any(|&x| x <= floor) {
                degenerate = true;
            }
            (
                Some([e[0], e[1], e[2]]),
                Some([(e[0] / e[1]).log2(), (e[1] / e[2]).log2()]),
            )
        }
        None => (None, None),
    };
    Ok(OrderEstimate {
        taus,
        errors,
        reference_orders,
        self_order: (d12 / d23).log2(),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{mass, mass_trapezoid};
    use crate::grid::{odd_defect, sample, BoundaryCondition, Grid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_values() {
        assert_eq!(phi_log(Complex64::new(0.0, 0.0)), 0.0);
        assert_eq!(phi_log(Complex64::new(1.0, 0.0)), 0.0);
        assert_eq!(phi_log(Complex64::new(2.0, 0.0)), 4f64.ln());
        assert_eq!(phi_log(Complex64::new(1e-160, 0.0)), 0.0);
        assert!(phi_log(Complex64::new(1e-150, 0.0)).is_finite());
    }

    #[test]
    fn nonlinear_flow_examples() {
        let g = Grid::new(16.0, 5, BoundaryCondition::Neumann).unwrap();
        let zero = Field::zeros(g.clone());
        assert_eq!(nonlinear_flow(&zero, 0.3, 1.0).max_abs(), 0.0);
        let one = Field::constant(g.clone(), Complex64::new(1.0, 0.0));
        assert_eq!(nonlinear_flow(&one, 0.3, 1.0).sub(&one).max_abs(), 0.0);
        let two = Field::constant(g.clone(), Complex64::new(2.0, 0.0));
        let (tau, lambda) = (1e-3, 1.7);
        let out = nonlinear_flow(&two, tau, lambda);
        let expected = Complex64::new(2.0, 0.0) * Complex64::from_polar(1.0, -lambda * tau * 4f64.ln());
        assert!(out.values().iter().all(|z| (z - expected).norm() < 1e-15));
    }

    proptest! {
        #[test]
        fn nonlinear_flow_preserves_modulus(
            re in proptest::collection::vec(-10.0f64..10.0, 33),
            im in proptest::collection::vec(-10.0f64..10.0, 33),
            t in -5.0f64..5.0,
            lambda in -3.0f64..3.0,
        ) {
            let g = Grid::new(16.0, 5, BoundaryCondition::Neumann).unwrap();
            let w = Field::new(g, re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect()).unwrap();
            let out = nonlinear_flow(&w, t, lambda);
            let m = w.max_abs();
            for (a, b) in w.values().iter().zip(out.values()) {
                prop_assert!((a.norm() - b.norm()).abs() <= 2.0 * f64::EPSILON * m);
            }
        }
    }

    fn random_field(g: &std::sync::Arc<Grid>, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(g.clone(), v).unwrap()
    }

    #[test]
    fn constant_is_fixed() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        let one = Field::constant(g, Complex64::new(1.0, 0.0));
        let out = strang_step(&one, 0.01, -2.3).unwrap();
        assert!(out.sub(&one).max_abs() < 1e-14);
        let traj = run(&one, &SplitConfig::new(1.0, 0.1, 50).keep_states(true)).unwrap();
        for s in &traj.states {
            assert!(s.sub(&one).max_abs() < 1e-13);
        }
    }

    #[test]
    fn step_preserves_trapezoid_mass() {
        let g = Grid::new(16.0, 8, BoundaryCondition::Neumann).unwrap();
        let u = random_field(&g, 1);
        let v = strang_step(&u, 0.01, 1.0).unwrap();
        let a = l2_norm(&u, Weighting::Trapezoid);
        let b = l2_norm(&v, Weighting::Trapezoid);
        assert!((a - b).abs() <= 1e-12 * a);
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Dirichlet] {
            let g = Grid::new(16.0, 8, bc).unwrap();
            // Project onto the basis so the boundary constraint holds.
            let b = ModeBasis::new(&g);
            let u = b.reconstruct(&b.decompose(&random_field(&g, 2)).unwrap()).unwrap();
            let v = strang_step(&u, 0.01, 1.0).unwrap();
            let (a, b) = (mass_trapezoid(&u), mass_trapezoid(&v));
            assert!((a - b).abs() <= 1e-12 * a, "{bc}");
            // Dirichlet endpoints are zero, so the plain sum agrees.
            if bc == BoundaryCondition::Dirichlet {
                assert!((mass(&u) - mass(&v)).abs() <= 1e-12 * mass(&u));
            }
        }
    }

    #[test]
    fn time_reversal() {
        let g = Grid::new(16.0, 8, BoundaryCondition::Neumann).unwrap();
        let u0 = sample(&g, f64::tanh).unwrap();
        let stepper = Strang::new(ModeBasis::new(&g), 1.0);
        let mut u = u0.clone();
        for _ in 0..20 {
            u = stepper.step(&u, 1e-3).unwrap();
        }
        for _ in 0..20 {
            u = stepper.step(&u, -1e-3).unwrap();
        }
        let rel = l2_norm(&u.sub(&u0), Weighting::Plain) / l2_norm(&u0, Weighting::Plain);
        assert!(rel <= 1e-10, "{rel}");
    }

    #[test]
    fn tanh_run_records_and_stays_odd() {
        let g = Grid::new(16.0, 8, BoundaryCondition::Neumann).unwrap();
        let u0 = sample(&g, f64::tanh).unwrap();
        let cfg = SplitConfig::new(1.0, 0.01, 1000).record_every(1).keep_states(true);
        let traj = run(&u0, &cfg).unwrap();
        assert_eq!(traj.states.len(), 1001);
        assert_eq!(traj.records.len(), 1001);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*traj.steps.last().unwrap(), 1000);
        for s in &traj.states {
            assert!(odd_defect(s) <= 1e-9 * s.max_abs());
        }
        assert!(odd_defect(traj.final_state().unwrap()) <= 1e-10);
    }

    #[test]
    fn default_stride_keeps_endpoints() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        let u0 = sample(&g, f64::tanh).unwrap();
        let traj = run(&u0, &SplitConfig::new(1.0, 0.01, 1001)).unwrap();
        assert_eq!(traj.steps[0], 0);
        assert_eq!(*traj.steps.last().unwrap(), 1001);
        assert_eq!(traj.states.len(), 1);
        assert!(traj.steps.windows(2).all(|w| w[1] - w[0] <= 5));
    }

    #[test]
    fn invalid_config_rejected() {
        let g = Grid::new(16.0, 5, BoundaryCondition::Neumann).unwrap();
        let u0 = Field::zeros(g);
        assert!(run(&u0, &SplitConfig::new(1.0, 1.0, 0)).is_err());
        assert!(run(&u0, &SplitConfig::new(1.0, 1.0, 10).record_every(0)).is_err());
    }

    #[test]
    fn linear_self_test_is_degenerate() {
        let g = Grid::new(16.0, 7, BoundaryCondition::Neumann).unwrap();
        let u0 = sample(&g, |x| (-x * x / 2.0).exp()).unwrap();
        let est = observed_order(&u0, 0.0, 0.1, [4e-3, 2e-3, 1e-3], None).unwrap();
        assert!(est.degenerate, "{est:?}");
    }
}
