//! Element-local scaled monomial bases.
//!
//! On element `K` with centroid `c` and diameter `h` the basis functions are
//! `((x - c_x)/h)^a ((y - c_y)/h)^b` for `a + b <= p`, ordered by total
//! degree and, within a degree, by decreasing power of `x`.

pub mod quadrature;

pub use quadrature::{facet_quadrature_for, quadrature_for, QuadratureRule};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Multi-index of a partial derivative or monomial, `[x-order, y-order]`.
pub type MultiIndex = [u32; 2];

#[derive(Clone, Debug)]
pub struct ElementBasis {
    pub element_id: usize,
    pub degree: usize,
    pub dim: usize,
    pub center: Point,
    pub scale: f64,
    pub exponents: Vec<MultiIndex>,
}

/// Number of basis functions of `V^p` on a simplex of dimension `dim`.
pub fn num_basis(dim: usize, p: usize) -> usize {
    match dim {
        1 => p + 1,
        _ => (p + 1) * (p + 2) / 2,
    }
}

pub fn make_basis(mesh: &Mesh, e: usize, p: usize) -> ElementBasis {
    let dim = mesh.dim();
    let mut exponents = Vec::with_capacity(num_basis(dim, p));
    for k in 0..=p as u32 {
        if dim == 1 {
            exponents.push([k, 0]);
        } else {
            exponents.extend((0..=k).rev().map(|a| [a, k - a]));
        }
    }
    ElementBasis {
        element_id: e,
        degree: p,
        dim,
        center: mesh.element_centroid(e),
        scale: mesh.element_diameter(e),
        exponents,
    }
}

/// `a (a-1) ... (a-k+1)`.
#[inline]
fn falling(a: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(a - i)).product()
}

impl ElementBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    #[inline]
    fn local(&self, x: Point) -> Point {
        [
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        ]
    }

    /// Exact partial derivative `D^d φ_j(x)`.
    pub fn eval_deriv(&self, j: usize, d: MultiIndex, x: Point) -> Result<f64> {
        let e = *self.exponents.get(j).ok_or(Error::BasisIndex {
            index: j,
            len: self.len(),
        })?;
        Ok(self.monomial_deriv(e, d, self.local(x)))
    }

    #[inline]
    fn monomial_deriv(&self, e: MultiIndex, d: MultiIndex, xi: Point) -> f64 {
        if d[0] > e[0] || d[1] > e[1] {
            return 0.0;
        }
        let coef =
            falling(e[0], d[0]) * falling(e[1], d[1]) / self.scale.powi((d[0] + d[1]) as i32);
        coef * xi[0].powi((e[0] - d[0]) as i32) * xi[1].powi((e[1] - d[1]) as i32)
    }

    /// `D^d φ_j(x)` for every basis function.
    pub fn deriv_all(&self, d: MultiIndex, x: Point) -> Vec<f64> {
        let xi = self.local(x);
        let p = self.degree;
        let px = powers(xi[0], p);
        let py = powers(xi[1], p);
        let hscale = self.scale.powi(-((d[0] + d[1]) as i32));
        self.exponents
            .iter()
            .map(|e| {
                if d[0] > e[0] || d[1] > e[1] {
                    0.0
                } else {
                    falling(e[0], d[0])
                        * falling(e[1], d[1])
                        * hscale
                        * px[(e[0] - d[0]) as usize]
                        * py[(e[1] - d[1]) as usize]
                }
            })
            .collect()
    }

    pub fn eval_all(&self, x: Point) -> Vec<f64> {
        self.deriv_all([0, 0], x)
    }

    pub fn grad_all(&self, x: Point) -> Vec<Point> {
        let dx = self.deriv_all([1, 0], x);
        let dy = if self.dim == 1 {
            vec![0.0; dx.len()]
        } else {
            self.deriv_all([0, 1], x)
        };
        dx.into_iter().zip(dy).map(|(a, b)| [a, b]).collect()
    }

    /// Evaluates `Σ c_j φ_j(x)`.
    pub fn combine<S>(&self, coeffs: &[S], x: Point) -> S
    where
        S: crate::scalar::Scalar,
    {
        self.eval_all(x)
            .iter()
            .zip(coeffs)
            .map(|(v, c)| c.scale(*v))
            .sum()
    }

    pub fn combine_grad<S>(&self, coeffs: &[S], x: Point) -> [S; 2]
    where
        S: crate::scalar::Scalar,
    {
        let g = self.grad_all(x);
        let mut out = [S::zero(), S::zero()];
        for (gj, c) in g.iter().zip(coeffs) {
            out[0] += c.scale(gj[0]);
            out[1] += c.scale(gj[1]);
        }
        out
    }
}

fn powers(x: f64, p: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(p + 1);
    let mut acc = 1.0;
    for _ in 0..=p {
        v.push(acc);
        acc *= x;
    }
    v
}

/// Element mass matrix `(φ_j, φ_i)_K` with an exactness-`2p` rule.
pub fn mass_matrix(basis: &ElementBasis, mesh: &Mesh) -> crate::densela::DenseMatrix {
    let n = basis.len();
    let rule = quadrature_for(mesh, basis.element_id, 2 * basis.degree);
    let mut m = crate::densela::DenseMatrix::zeros(n, n);
    for (x, w) in rule.iter() {
        let phi = basis.eval_all(x);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += w * phi[i] * phi[j];
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::svd;
    use crate::mesh::{interval_mesh, refine, unit_square_mesh};

    #[test]
    fn dimensions() {
        let m = unit_square_mesh(1).unwrap();
        assert_eq!(make_basis(&m, 0, 3).len(), 10);
        let b0 = make_basis(&m, 0, 0);
        assert_eq!(b0.len(), 1);
        assert_eq!(b0.eval_all([0.3, 0.1]), vec![1.0]);
        let line = interval_mesh(0.0, 1.0, 2).unwrap();
        assert_eq!(make_basis(&line, 1, 5).len(), 6);
    }

    #[test]
    fn ordering_is_graded() {
        let m = unit_square_mesh(1).unwrap();
        let b = make_basis(&m, 0, 2);
        assert_eq!(
            b.exponents,
            vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
        );
        let c = b.center;
        let vals = b.eval_all(c);
        assert_eq!(vals[0], 1.0);
        assert!(vals[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn derivative_examples() {
        let m = unit_square_mesh(2).unwrap();
        let b = make_basis(&m, 3, 2);
        let h = b.scale;
        let x = [0.6, 0.3];
        assert_eq!(b.eval_deriv(0, [0, 0], x).unwrap(), 1.0);
        // ((x - c)/h)^2 is index 3
        assert!((b.eval_deriv(3, [2, 0], x).unwrap() - 2.0 / (h * h)).abs() < 1e-12);
        for j in 0..b.len() {
            assert_eq!(b.eval_deriv(j, [3, 0], x).unwrap(), 0.0);
            assert_eq!(b.eval_deriv(j, [1, 2], x).unwrap(), 0.0);
        }
        assert!(matches!(
            b.eval_deriv(6, [0, 0], x),
            Err(Error::BasisIndex { index: 6, len: 6 })
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = unit_square_mesh(2).unwrap();
        let b = make_basis(&m, 5, 4);
        let mut s: u64 = 12345;
        let mut rnd = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let step = 1e-6;
        for _ in 0..100 {
            let x = [rnd(), rnd()];
            let j = (rnd() * b.len() as f64) as usize % b.len();
            for (d, lower, axis) in [
                ([1, 0], [0, 0], 0),
                ([0, 1], [0, 0], 1),
                ([2, 0], [1, 0], 0),
                ([1, 1], [1, 0], 1),
            ] {
                let mut xp = x;
                let mut xm = x;
                xp[axis] += step;
                xm[axis] -= step;
                let fd = (b.eval_deriv(j, lower, xp).unwrap()
                    - b.eval_deriv(j, lower, xm).unwrap())
                    / (2.0 * step);
                let exact = b.eval_deriv(j, d, x).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn mass_matrix_spd_up_to_p10() {
        let mesh = refine(&refine(&unit_square_mesh(4).unwrap()));
        for p in [1, 4, 10] {
            for e in [0, 7, mesh.num_elements() - 1] {
                let b = make_basis(&mesh, e, p);
                let mm = mass_matrix(&b, &mesh);
                assert!(mm.sub(&mm.transpose()).unwrap().max_abs() < 1e-14 * mm.max_abs());
                let s = svd(&mm).unwrap();
                assert!(*s.s.last().unwrap() > 0.0);
                // Gram matrix from an exactness-4p rule agrees
                let rule = quadrature_for(&mesh, e, 4 * p);
                let n = b.len();
                for (i, j) in [(0, 0), (1, n - 1), (n - 1, n - 1)] {
                    let q = rule.integrate(|x| {
                        let v = b.eval_all(x);
                        v[i] * v[j]
                    });
                    assert!((q - mm[(i, j)]).abs() < 1e-14 * mm.max_abs());
                }
            }
        }
    }
}
