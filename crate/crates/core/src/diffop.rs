//! Linear differential operators `L = Σ a_k(x) D^k` of order at most two.

use std::fmt;
use std::sync::Arc;

use crate::basis::{ElementBasis, MultiIndex};
use crate::error::{Error, Result};
use crate::mesh::Point;

pub type CoefficientFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Coefficient {
    Const(f64),
    Func(CoefficientFn),
}

impl Coefficient {
    pub fn func(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Func(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: Point) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Func(f) => f(x),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Coefficient::Const(_))
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coefficient::Const(a), Coefficient::Const(b)) => a == b,
            (Coefficient::Func(a), Coefficient::Func(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(c) => write!(f, "{c}"),
            Coefficient::Func(_) => f.write_str("<fn>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp {
    dim: usize,
    terms: Vec<(MultiIndex, Coefficient)>,
}

fn order(m: MultiIndex) -> u32 {
    m[0] + m[1]
}

impl DiffOp {
    pub fn new(dim: usize, terms: Vec<(MultiIndex, Coefficient)>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidOperator(format!(
                "unsupported dimension {dim}"
            )));
        }
        if terms.is_empty() {
            return Err(Error::InvalidOperator("operator has no terms".into()));
        }
        for (i, (m, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(k, _)| k == m) {
                return Err(Error::InvalidOperator(format!(
                    "repeated multi-index {m:?}"
                )));
            }
            if dim == 1 && m[1] > 0 {
                return Err(Error::InvalidOperator(format!(
                    "y-derivative {m:?} in a 1D operator"
                )));
            }
            if order(*m) > 2 {
                return Err(Error::InvalidOperator(format!(
                    "derivative {m:?} exceeds order two"
                )));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(MultiIndex, Coefficient)] {
        &self.terms
    }

    /// Highest total derivative order.
    pub fn order(&self) -> u32 {
        self.terms.iter().map(|(m, _)| order(*m)).max().unwrap_or(0)
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_const())
    }

    fn check_dim(&self, basis: &ElementBasis) -> Result<()> {
        if basis.dim != self.dim {
            return Err(Error::Dimension {
                op: self.dim,
                mesh: basis.dim,
            });
        }
        Ok(())
    }

    /// `(L φ_j)(x)`.
    pub fn apply_to_basis(&self, basis: &ElementBasis, j: usize, x: Point) -> Result<f64> {
        self.check_dim(basis)?;
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            acc += c.eval(x) * basis.eval_deriv(j, *m, x)?;
        }
        Ok(acc)
    }

    /// `(L φ_j)(x)` for all basis functions.
    pub fn apply_all(&self, basis: &ElementBasis, x: Point) -> Result<Vec<f64>> {
        self.check_dim(basis)?;
        let mut out = vec![0.0; basis.len()];
        for (m, c) in &self.terms {
            let a = c.eval(x);
            if a == 0.0 {
                continue;
            }
            for (o, d) in out.iter_mut().zip(basis.deriv_all(*m, x)) {
                *o += a * d;
            }
        }
        Ok(out)
    }

    /// Constant-coefficient principal part used as test operator.
    ///
    /// Keeps the terms of maximal total order with unit coefficients. An
    /// operator that already consists only of constant top-order terms is
    /// returned unchanged.
    pub fn leading_part(&self) -> DiffOp {
        let q = self.order();
        let top: Vec<&(MultiIndex, Coefficient)> =
            self.terms.iter().filter(|(m, _)| order(*m) == q).collect();
        if top.len() == self.terms.len() && top.iter().all(|(_, c)| c.is_const()) {
            return self.clone();
        }
        DiffOp {
            dim: self.dim,
            terms: top
                .iter()
                .map(|(m, _)| (*m, Coefficient::Const(1.0)))
                .collect(),
        }
    }
}

/// `-Δ`.
pub fn laplace(dim: usize) -> DiffOp {
    let mut terms = vec![([2, 0], Coefficient::Const(-1.0))];
    if dim == 2 {
        terms.push(([0, 2], Coefficient::Const(-1.0)));
    }
    DiffOp::new(dim, terms).expect("valid builtin")
}

/// `-Δ - ω²`.
pub fn helmholtz(omega: f64, dim: usize) -> DiffOp {
    let mut op = laplace(dim);
    op.terms.push(([0, 0], Coefficient::Const(-omega * omega)));
    op
}

/// `b · ∇` with a variable field.
pub fn advection(
    bx: impl Fn(Point) -> f64 + Send + Sync + 'static,
    by: impl Fn(Point) -> f64 + Send + Sync + 'static,
) -> DiffOp {
    DiffOp::new(
        2,
        vec![
            ([1, 0], Coefficient::func(bx)),
            ([0, 1], Coefficient::func(by)),
        ],
    )
    .expect("valid builtin")
}

/// `b · ∇` with a constant field.
pub fn advection_const(b: [f64; 2]) -> DiffOp {
    DiffOp::new(
        2,
        vec![
            ([1, 0], Coefficient::Const(b[0])),
            ([0, 1], Coefficient::Const(b[1])),
        ],
    )
    .expect("valid builtin")
}

/// The zero operator; every function is in its kernel.
pub fn zero(dim: usize) -> DiffOp {
    DiffOp::new(dim, vec![([0, 0], Coefficient::Const(0.0))]).expect("valid builtin")
}

pub fn identity(dim: usize) -> DiffOp {
    DiffOp::new(dim, vec![([0, 0], Coefficient::Const(1.0))]).expect("valid builtin")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_basis;
    use crate::mesh::{interval_mesh, unit_square_mesh};

    #[test]
    fn builtin_actions() {
        let mesh = unit_square_mesh(2).unwrap();
        let b = make_basis(&mesh, 2, 3);
        let x = [0.4, 0.1];
        let lap = laplace(2);
        assert_eq!(lap.terms().len(), 2);
        for j in 0..3 {
            assert_eq!(lap.apply_to_basis(&b, j, x).unwrap(), 0.0);
        }
        let adv = advection_const([1.0, 0.0]);
        assert!((adv.apply_to_basis(&b, 1, x).unwrap() - 1.0 / b.scale).abs() < 1e-14);
        let w = 3.0;
        assert_eq!(helmholtz(w, 2).apply_to_basis(&b, 0, x).unwrap(), -9.0);

        let var = advection(|p| -p[1].sin(), |p| p[0].cos());
        let v = var.apply_all(&b, x).unwrap();
        assert!((v[1] + x[1].sin() / b.scale).abs() < 1e-14);
        assert!((v[2] - x[0].cos() / b.scale).abs() < 1e-14);

        let line = interval_mesh(0.0, 1.0, 1).unwrap();
        let lb = make_basis(&line, 0, 2);
        assert!(matches!(
            lap.apply_to_basis(&lb, 0, x),
            Err(Error::Dimension { op: 2, mesh: 1 })
        ));
    }

    #[test]
    fn leading_parts() {
        assert_eq!(laplace(2).leading_part(), laplace(2));
        let h = helmholtz(2.0, 2).leading_part();
        assert_eq!(
            h.terms(),
            &[
                ([2, 0], Coefficient::Const(1.0)),
                ([0, 2], Coefficient::Const(1.0))
            ]
        );
        let a = advection(|p| p[1], |p| p[0]).leading_part();
        assert!(a.is_constant_coefficient());
        assert_eq!(
            a.terms(),
            &[
                ([1, 0], Coefficient::Const(1.0)),
                ([0, 1], Coefficient::Const(1.0))
            ]
        );
        for op in [
            laplace(1),
            helmholtz(1.0, 1),
            zero(2),
            identity(2),
            advection(|_| 1.0, |_| 2.0),
        ] {
            let l = op.leading_part();
            assert_eq!(l.leading_part(), l);
        }
        assert_eq!(zero(2).leading_part(), zero(2));
    }

    #[test]
    fn invalid_operators() {
        assert!(DiffOp::new(2, vec![]).is_err());
        assert!(DiffOp::new(
            2,
            vec![
                ([1, 0], Coefficient::Const(1.0)),
                ([1, 0], Coefficient::Const(2.0))
            ]
        )
        .is_err());
        assert!(DiffOp::new(1, vec![([0, 1], Coefficient::Const(1.0))]).is_err());
        assert!(DiffOp::new(2, vec![([3, 0], Coefficient::Const(1.0))]).is_err());
    }
}
