//! Log-slope probe near the cancellation point.
//!
//! For odd solutions `∂ₓu` is even; near the origin it is fitted against
//! `{1, log|x|}`. A growing `log|x|` coefficient is the numerical fingerprint
//! of `∫₀ᵗ ∂ₓu log|u|² dτ` diverging at the zero.

use num_complex::Complex64;

use super::averaging::derivative;
use crate::error::{Error, Result};
use crate::solver::Trajectory;

pub const MIN_WINDOW_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSlopeReport {
    pub t: f64,
    /// Coefficient of `log|x|` in `D_h u(t, x)`.
    pub slope: Complex64,
    pub intercept: Complex64,
    /// Trapezoid estimate of `∫₀ᵗ D_h u(τ, 0) dτ` over the recorded frames.
    pub zeta_integral: Complex64,
    /// `D_h u(0, 0)`.
    pub zeta0: Complex64,
    pub fit_window: (f64, f64),
    /// RMS of the fit residual.
    pub fit_residual: f64,
    pub nodes_used: usize,
}

/// Default window `(4h, a/64)`.
pub fn default_window(h: f64, half_width: f64) -> (f64, f64) {
    (4.0 * h, half_width / 64.0)
}

/// Probes the recorded frame whose time is closest to `t`.
pub fn log_slope_probe(traj: &Trajectory, t: f64, window: (f64, f64)) -> Result<LogSlopeReport> {
    let frame = traj
        .times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    if traj.states.len() != traj.times.len() {
        return Err(Error::InvalidParameter(
            "log-slope probe needs the states of every recorded frame".into(),
        ));
    }
    let u = &traj.states[frame];
    let grid = u.grid();
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi <= grid.half_width() / 8.0) {
        return Err(Error::InvalidParameter(format!(
            "window ({lo}, {hi}) must satisfy 0 < x_min < x_max <= a/8"
        )));
    }
    let d = derivative(u);
    let pts: Vec<(f64, Complex64)> = grid
        .nodes()
        .iter()
        .zip(d.values())
        .filter(|(x, _)| (lo..=hi).contains(&x.abs()))
        .map(|(&x, &z)| (x.abs().ln(), z))
        .collect();
    if pts.len() < MIN_WINDOW_NODES {
        return Err(Error::WindowTooSmall {
            found: pts.len(),
            needed: MIN_WINDOW_NODES,
        });
    }
    let n = pts.len() as f64;
    let mean_l = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_z = pts.iter().map(|p| p.1).sum::<Complex64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_l).powi(2)).sum();
    let sxz: Complex64 = pts.iter().map(|p| p.1 * (p.0 - mean_l)).sum();
    let slope = sxz / sxx;
    let intercept = mean_z - slope * mean_l;
    let fit_residual = (pts
        .iter()
        .map(|&(l, z)| (z - intercept - slope * l).norm_sqr())
        .sum::<f64>()
        / n)
        .sqrt();

    let c = grid.center();
    let zeta: Vec<Complex64> = traj.states[..=frame]
        .iter()
        .map(|s| derivative(s).values()[c])
        .collect();
    let mut zeta_integral = Complex64::new(0.0, 0.0);
    for i in 1..zeta.len() {
        zeta_integral += (zeta[i] + zeta[i - 1]) * (0.5 * (traj.times[i] - traj.times[i - 1]));
    }
    Ok(LogSlopeReport {
        t: traj.times[frame],
        slope,
        intercept,
        zeta_integral,
        zeta0: zeta[0],
        fit_window: window,
        fit_residual,
        nodes_used: pts.len(),
    })
}
