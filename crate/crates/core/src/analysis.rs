//! Error norms, convergence rates and dof/nonzero counts.

use std::ops::Range;

use crate::basis::{facet_quadrature_for, make_basis, num_basis, quadrature_for};
use crate::dgforms::penalty_factor;
use crate::error::{Error, Result};
use crate::mesh::{FacetKind, Mesh, Point};
use crate::scalar::Scalar;

/// Quadrature exactness used by the error functionals.
fn error_degree(p: usize) -> usize {
    2 * p + 4
}

fn element_ranges(mesh: &Mesh, p: usize, len: usize) -> Result<Vec<Range<usize>>> {
    let nk = num_basis(mesh.dim(), p);
    if len != nk * mesh.num_elements() {
        return Err(Error::Shape(format!(
            "coefficient vector of length {len}, expected {}",
            nk * mesh.num_elements()
        )));
    }
    Ok((0..mesh.num_elements())
        .map(|e| e * nk..(e + 1) * nk)
        .collect())
}

/// `‖u_h - u‖_{L²(Ω)}`, using the modulus for complex fields.
pub fn l2_error<S: Scalar>(
    u_h: &[S],
    exact: impl Fn(Point) -> S,
    mesh: &Mesh,
    p: usize,
) -> Result<f64> {
    let ranges = element_ranges(mesh, p, u_h.len())?;
    let mut acc = 0.0;
    for (e, r) in ranges.into_iter().enumerate() {
        let basis = make_basis(mesh, e, p);
        let c = &u_h[r];
        for (x, w) in quadrature_for(mesh, e, error_degree(p)).iter() {
            acc += w * (basis.combine(c, x) - exact(x)).abs2();
        }
    }
    Ok(acc.sqrt())
}

/// DG energy norm of `u_h - u`:
/// `(Σ_K ‖∇(u_h - u)‖² + Σ_E (αp²/h) ‖⟦u_h - u⟧‖²)^½`.
///
/// Boundary jumps are taken against the exact solution.
pub fn dg_norm_error(
    u_h: &[f64],
    exact: impl Fn(Point) -> f64,
    exact_grad: impl Fn(Point) -> [f64; 2],
    mesh: &Mesh,
    p: usize,
    alpha: f64,
) -> Result<f64> {
    let ranges = element_ranges(mesh, p, u_h.len())?;
    let bases: Vec<_> = (0..mesh.num_elements())
        .map(|e| make_basis(mesh, e, p))
        .collect();
    let deg = error_degree(p);
    let mut acc = 0.0;
    for (e, r) in ranges.iter().enumerate() {
        for (x, w) in quadrature_for(mesh, e, deg).iter() {
            let g = bases[e].combine_grad(&u_h[r.clone()], x);
            let ge = exact_grad(x);
            acc += w * ((g[0] - ge[0]).powi(2) + (g[1] - ge[1]).powi(2));
        }
    }
    for (f, facet) in mesh.facets().iter().enumerate() {
        let sigma = penalty_factor(alpha, p, mesh.facet_h(f));
        let a = facet.elements.0;
        for (x, w) in facet_quadrature_for(mesh, f, deg).iter() {
            let ua = bases[a].combine(&u_h[ranges[a].clone()], x);
            let jump = match (facet.kind, facet.elements.1) {
                (FacetKind::Interior, Some(b)) => ua - bases[b].combine(&u_h[ranges[b].clone()], x),
                _ => ua - exact(x),
            };
            acc += w * sigma * jump * jump;
        }
    }
    Ok(acc.sqrt())
}

/// `rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1})`; `None` where an error
/// is not positive.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::Shape(
            "eoc needs at least two (error, h) pairs".into(),
        ));
    }
    if hs.windows(2).any(|w| w[1] <= 0.0 || !(0.0..w[0]).contains(&w[1])) {
        return Err(Error::Shape(
            "mesh sizes must be positive and strictly decreasing".into(),
        ));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| {
            (e[0] > 0.0 && e[1] > 0.0 && e[0].is_finite() && e[1].is_finite())
                .then(|| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorClass {
    FirstOrder,
    SecondOrder,
}

impl OperatorClass {
    /// Local Trefftz dimension on a triangle.
    pub fn local_dim(self, p: usize) -> usize {
        match self {
            OperatorClass::FirstOrder => p + 1,
            OperatorClass::SecondOrder => (2 * p + 1).min(num_basis(2, p)),
        }
    }
}

/// Number of nonzeros of a DG-type block pattern: diagonal blocks plus one
/// block pair per interior facet.
pub fn block_nze(mesh: &Mesh, sizes: &[usize]) -> usize {
    let diag: usize = sizes.iter().map(|n| n * n).sum();
    let off: usize = mesh
        .facets()
        .iter()
        .filter_map(|f| f.elements.1.map(|b| 2 * sizes[f.elements.0] * sizes[b]))
        .sum();
    diag + off
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofCounts {
    pub ndofs_full: usize,
    pub ndofs_reduced: usize,
    pub nze_full: usize,
    pub nze_reduced: usize,
}

pub fn dof_report(mesh: &Mesh, p: usize, class: OperatorClass) -> Result<DofCounts> {
    if mesh.dim() != 2 {
        return Err(Error::Dimension {
            op: 2,
            mesh: mesh.dim(),
        });
    }
    let ne = mesh.num_elements();
    let full = vec![num_basis(2, p); ne];
    let reduced = vec![class.local_dim(p); ne];
    Ok(DofCounts {
        ndofs_full: full.iter().sum(),
        ndofs_reduced: reduced.iter().sum(),
        nze_full: block_nze(mesh, &full),
        nze_reduced: block_nze(mesh, &reduced),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, unit_square_mesh};
    use crate::scalar::Complex64;

    #[test]
    fn eoc_examples() {
        assert_eq!(eoc(&[1.0, 0.25], &[1.0, 0.5]).unwrap(), vec![Some(2.0)]);
        assert_eq!(eoc(&[1.0, 1.0], &[1.0, 0.5]).unwrap(), vec![Some(0.0)]);
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let es: Vec<f64> = hs.iter().map(|h: &f64| h.powi(3)).collect();
        assert!(eoc(&es, &hs)
            .unwrap()
            .iter()
            .all(|r| (r.unwrap() - 3.0).abs() < 1e-12));
        assert_eq!(eoc(&[0.0, 1.0], &[1.0, 0.5]).unwrap(), vec![None]);
        assert!(eoc(&[1.0], &[1.0]).is_err());
        assert!(eoc(&[1.0, 2.0], &[0.5, 1.0]).is_err());
    }

    #[test]
    fn exact_polynomials_have_zero_error() {
        let mesh = unit_square_mesh(2).unwrap();
        let p = 2;
        // interpolate u = 1 + x - 2xy exactly in the monomial basis of each element
        let mut u = Vec::new();
        for e in 0..mesh.num_elements() {
            let b = make_basis(&mesh, e, p);
            let (c, h) = (b.center, b.scale);
            // x = c0 + h ξ, y = c1 + h η
            let coeffs = [
                1.0 + c[0] - 2.0 * c[0] * c[1],
                h * (1.0 - 2.0 * c[1]),
                -2.0 * h * c[0],
                0.0,
                -2.0 * h * h,
                0.0,
            ];
            u.extend(coeffs);
        }
        let exact = |x: Point| 1.0 + x[0] - 2.0 * x[0] * x[1];
        assert!(l2_error(&u, exact, &mesh, p).unwrap() < 1e-12);
        let grad = |x: Point| [1.0 - 2.0 * x[1], -2.0 * x[0]];
        assert!(dg_norm_error(&u, exact, grad, &mesh, p, 4.0).unwrap() < 1e-12);

        let uc: Vec<Complex64> = u.iter().map(|v| Complex64::new(0.0, *v)).collect();
        let err = l2_error(&uc, |x| Complex64::new(0.0, exact(x)), &mesh, p).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn dg_norm_of_continuous_function_is_gradient_norm() {
        let mesh = unit_square_mesh(2).unwrap();
        let zero = vec![0.0; 3 * mesh.num_elements()];
        assert_eq!(
            dg_norm_error(&zero, |_| 0.0, |_| [0.0, 0.0], &mesh, 1, 4.0).unwrap(),
            0.0
        );
        // traces agree, so only the gradient term of the unit square remains
        let e = dg_norm_error(&zero, |_| 0.0, |_| [1.0, 0.0], &mesh, 1, 4.0).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dof_counts() {
        let mesh = rectangle_mesh(3, 9).unwrap();
        assert_eq!(mesh.num_elements(), 54);
        let second = dof_report(&mesh, 3, OperatorClass::SecondOrder).unwrap();
        let first = dof_report(&mesh, 3, OperatorClass::FirstOrder).unwrap();
        assert_eq!(
            (second.ndofs_full, second.ndofs_reduced, first.ndofs_reduced),
            (540, 378, 216)
        );
        let p0 = dof_report(&mesh, 0, OperatorClass::SecondOrder).unwrap();
        assert_eq!(p0.ndofs_full, p0.ndofs_reduced);

        let two = unit_square_mesh(1).unwrap();
        assert_eq!(
            dof_report(&two, 1, OperatorClass::SecondOrder)
                .unwrap()
                .nze_full,
            36
        );
    }
}
