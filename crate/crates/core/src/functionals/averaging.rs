//! Centered difference `D_h` and the averaging operator
//! `𝒱[f](x) = ∫_0^1 f(σx) dσ = (1/x) ∫_0^x f`.

use num_complex::Complex64;

use crate::grid::{BoundaryCondition, Field};

/// Centered first difference. Neumann endpoints use the mirror ghost node
/// (derivative exactly zero), periodic ones wrap, Dirichlet ones fall back to
/// the one-sided second-order formula.
pub fn derivative(u: &Field) -> Field {
    let grid = u.grid();
    let v = u.values();
    let n = v.len();
    let last = n - 1;
    let inv_2h = 0.5 / grid.spacing();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..last {
        out[j] = (v[j + 1] - v[j - 1]) * inv_2h;
    }
    match grid.bc() {
        BoundaryCondition::Neumann => {}
        BoundaryCondition::Periodic => {
            let d = (v[1] - v[last - 1]) * inv_2h;
            out[0] = d;
            out[last] = d;
        }
        BoundaryCondition::Dirichlet => {
            out[0] = (v[1] * 4.0 - v[0] * 3.0 - v[2]) * inv_2h;
            out[last] = (v[last] * 3.0 - v[last - 1] * 4.0 + v[last - 2]) * inv_2h;
        }
    }
    Field::from_parts(grid.clone(), out)
}

/// One-sided second-order derivative at both endpoints, `max(|u'(-a)|, |u'(a)|)`.
/// Measures how far sampled data is from satisfying Neumann conditions.
pub fn boundary_derivative_defect(u: &Field) -> f64 {
    let v = u.values();
    let last = v.len() - 1;
    let inv_2h = 0.5 / u.grid().spacing();
    let left = (v[1] * 4.0 - v[0] * 3.0 - v[2]) * inv_2h;
    let right = (v[last] * 3.0 - v[last - 1] * 4.0 + v[last - 2]) * inv_2h;
    left.norm().max(right.norm())
}

/// Discrete `𝒱[f]`: cumulative trapezoid from the center node outward,
/// divided by `x_j`; `𝒱[f](0) = f(0)`.
///
/// The sum runs over `f - f(0)` so that constants are reproduced exactly.
pub fn v_average(f: &Field) -> Field {
    let grid = f.grid();
    let v = f.values();
    let n = v.len();
    let c = grid.center();
    let f0 = v[c];
    let mut out = vec![f0; n];
    for dir in [1isize, -1] {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut prev = Complex64::new(0.0, 0.0);
        for k in 1..=c {
            let j = (c as isize + dir * k as isize) as usize;
            let cur = v[j] - f0;
            acc += (prev + cur) * 0.5;
            prev = cur;
            out[j] = f0 + acc / k as f64;
        }
    }
    Field::from_parts(grid.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, Grid};
    use crate::spectral::{l2_norm, Weighting};
    use proptest::prelude::*;

    #[test]
    fn constants_reproduced_exactly() {
        let g = Grid::new(16.0, 8, BoundaryCondition::Neumann).unwrap();
        let c = Complex64::new(0.3, -0.7);
        let out = v_average(&Field::constant(g, c));
        assert!(out.values().iter().all(|&z| z == c));
    }

    #[test]
    fn linear_gives_half() {
        let g = Grid::new(16.0, 7, BoundaryCondition::Neumann).unwrap();
        let out = v_average(&sample(&g, |x| x).unwrap());
        for (x, z) in g.nodes().iter().zip(out.values()) {
            assert!((z.re - x / 2.0).abs() <= 1e-14 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn recovers_odd_function_from_derivative() {
        // x 𝒱[D_h u] - u is O(h²) for smooth odd u.
        let mut errs = Vec::new();
        for k in 6..=10 {
            let g = Grid::new(16.0, k, BoundaryCondition::Neumann).unwrap();
            let u = sample(&g, f64::tanh).unwrap();
            let w = v_average(&derivative(&u));
            let e = g
                .nodes()
                .iter()
                .zip(w.values().iter().zip(u.values()))
                .map(|(&x, (a, b))| (a * x - b).norm())
                .fold(0.0, f64::max);
            errs.push((g.spacing(), e));
        }
        let slope = crate::functionals::loglog_slope(&errs);
        assert!((slope - 2.0).abs() < 0.3, "slope {slope}");
    }

    #[test]
    fn derivative_exact_on_quadratics_interior() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Dirichlet).unwrap();
        let d = derivative(&sample(&g, |x| x * x - 3.0 * x).unwrap());
        for (j, (&x, z)) in g.nodes().iter().zip(d.values()).enumerate() {
            assert!((z.re - (2.0 * x - 3.0)).abs() < 1e-11, "node {j}");
        }
    }

    #[test]
    fn neumann_derivative_vanishes_on_boundary() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        let d = derivative(&sample(&g, f64::sin).unwrap());
        assert_eq!(d.values()[0], Complex64::new(0.0, 0.0));
        assert_eq!(d.values()[g.len() - 1], Complex64::new(0.0, 0.0));
    }

    fn field_from(g: &std::sync::Arc<Grid>, re: &[f64], im: &[f64]) -> Field {
        Field::new(
            g.clone(),
            re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn linear_and_sup_bounded(
            re in proptest::collection::vec(-1.0f64..1.0, 65),
            im in proptest::collection::vec(-1.0f64..1.0, 65),
            re2 in proptest::collection::vec(-1.0f64..1.0, 65),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
            let f = field_from(&g, &re, &im);
            let h = field_from(&g, &re2, &im);
            let combo = f.scale(Complex64::new(a, 0.0)).add(&h.scale(Complex64::new(b, 0.0)));
            let lhs = v_average(&combo);
            let rhs = v_average(&f).scale(Complex64::new(a, 0.0)).add(&v_average(&h).scale(Complex64::new(b, 0.0)));
            prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-12);
            prop_assert!(v_average(&f).max_abs() <= f.max_abs() * (1.0 + 4.0 * f64::EPSILON));
            prop_assert!(l2_norm(&v_average(&f), Weighting::Plain).is_finite());
        }
    }
}
