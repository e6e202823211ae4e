//! Smooth odd cutoff `χ` with `χ(x) = x` on `|x| ≤ 1/2` and `χ(x) = ±1` for
//! `|x| ≥ 3/2`, and the ratio `𝔛 = χ/x`.
//!
//! `χ` is the primitive of a smooth plateau `g = χ'`: `g = 1` on `[0, 1/2]`,
//! `g = 1 - S(x - 1/2)` on the bridge and `g = 0` beyond `3/2`, where `S` is
//! the exponential partition of unity. Since `S(s) + S(1-s) = 1`, the bridge
//! integrates to exactly `1/2`, so `χ` reaches `1` with `0 ≤ χ' ≤ 1`.

use std::sync::OnceLock;

const BRIDGE_START: f64 = 0.5;
const BRIDGE_END: f64 = 1.5;

fn psi(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth step, 0 at `s ≤ 0`, 1 at `s ≥ 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = psi(s);
        a / (a + psi(1.0 - s))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// `∫_0^s S(σ) dσ` for `s ∈ [0, 1]`, composite Gauss–Legendre.
fn smooth_step_integral(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let s = s.min(1.0);
    const PANELS: usize = 8;
    let width = s / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let mid = (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        let acc: f64 = rule()
            .iter()
            .map(|&(x, w)| w * smooth_step(mid + half * x))
            .sum();
        total += acc * half;
    }
    total
}

pub fn chi(x: f64) -> f64 {
    let r = x.abs();
    let v = if r <= BRIDGE_START {
        r
    } else if r >= BRIDGE_END {
        1.0
    } else {
        r - smooth_step_integral(r - BRIDGE_START)
    };
    v.copysign(x)
}

pub fn chi_prime(x: f64) -> f64 {
    let r = x.abs();
    if r <= BRIDGE_START {
        1.0
    } else if r >= BRIDGE_END {
        0.0
    } else {
        1.0 - smooth_step(r - BRIDGE_START)
    }
}

/// `𝔛 = χ(x)/x`, extended by 1 at the origin.
pub fn xfrak(x: f64) -> f64 {
    if x.abs() <= BRIDGE_START {
        1.0
    } else {
        chi(x) / x
    }
}

/// `𝔛'(x) = (x χ'(x) - χ(x)) / x²`.
pub fn xfrak_prime(x: f64) -> f64 {
    if x.abs() <= BRIDGE_START {
        0.0
    } else {
        (x * chi_prime(x) - chi(x)) / (x * x)
    }
}

/// Achieved bounds of the cutoff on `[-a, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub bridge: (f64, f64),
    pub sup_abs_chi: f64,
    pub sup_abs_chi_prime: f64,
    /// `inf 𝔛` over the domain.
    pub floor: f64,
}

impl CutoffSpec {
    /// Scans `samples` equispaced points of `[-a, a]`.
    pub fn measure(half_width: f64, samples: usize) -> Self {
        let mut sup_chi = 0.0f64;
        let mut sup_dchi = 0.0f64;
        let mut floor = f64::INFINITY;
        for i in 0..=samples {
            let x = -half_width + 2.0 * half_width * i as f64 / samples as f64;
            sup_chi = sup_chi.max(chi(x).abs());
            sup_dchi = sup_dchi.max(chi_prime(x).abs());
            floor = floor.min(xfrak(x));
        }
        CutoffSpec {
            bridge: (BRIDGE_START, BRIDGE_END),
            sup_abs_chi: sup_chi,
            sup_abs_chi_prime: sup_dchi,
            floor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_values() {
        assert_eq!(chi(0.25), 0.25);
        assert_eq!(chi(3.0), 1.0);
        assert_eq!(chi(-3.0), -1.0);
        assert_eq!(chi(2.0), 1.0);
        assert_eq!(chi(-0.5), -0.5);
        assert_eq!(xfrak(0.0), 1.0);
    }

    #[test]
    fn bridge_is_continuous() {
        assert!((chi(BRIDGE_END - 1e-12) - 1.0).abs() < 1e-12);
        assert!((chi(BRIDGE_START + 1e-12) - BRIDGE_START).abs() < 1e-11);
        assert!((smooth_step_integral(1.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let eps = 1e-6;
        for i in 0..400 {
            let x = -2.5 + 5.0 * i as f64 / 399.0;
            let fd = (chi(x + eps) - chi(x - eps)) / (2.0 * eps);
            assert!((fd - chi_prime(x)).abs() < 1e-7, "x = {x}");
            let fd = (xfrak(x + eps) - xfrak(x - eps)) / (2.0 * eps);
            assert!((fd - xfrak_prime(x)).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn log_derivative_of_xfrak_beyond_two() {
        let y = 3.0;
        let eps = 1e-5;
        let d = (xfrak(y + eps) - xfrak(y - eps)) / (2.0 * eps);
        assert!((y * d / xfrak(y) + 1.0).abs() < 1e-6);
        assert_eq!(y * xfrak_prime(y) / xfrak(y), -1.0);
    }

    #[test]
    fn achieved_bounds() {
        let cutoff = CutoffSpec::measure(16.0, 100_000);
        assert!(cutoff.sup_abs_chi <= 1.0);
        assert!(cutoff.sup_abs_chi_prime <= 1.0);
        assert!(cutoff.floor > 0.0);
        assert!((cutoff.floor - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn odd_and_monotone() {
        let mut prev = chi(-4.0);
        for i in 1..=800 {
            let x = -4.0 + 8.0 * i as f64 / 800.0;
            assert_eq!(chi(-x), -chi(x));
            assert!(chi(x) >= prev);
            prev = chi(x);
        }
    }
}
