//! Linear solvers for assembled sparse systems.
//!
//! Small systems go through dense LU. Larger ones use preconditioned CG when
//! the caller promises a Hermitian positive definite matrix and restarted
//! GMRES otherwise. Either way the returned solution has been checked against
//! the true residual.

use std::fmt;
use std::ops::Range;

use crate::densela::{DenseMatrix, LuFactor};
use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Scalar};
use crate::sparsela::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryHint {
    General,
    /// Hermitian positive definite (real SPD in the real case).
    PositiveDefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    DenseLu,
    Cg,
    Gmres,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::DenseLu => "dense-lu",
            SolverKind::Cg => "cg",
            SolverKind::Gmres => "gmres",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Systems up to this size are factored densely.
    pub dense_threshold: usize,
    /// Relative residual target of the iterative solvers. They stop earlier
    /// on stagnation; `accept` decides whether the result is usable.
    pub tol: f64,
    /// Iteration cap as a multiple of the system size.
    pub max_iter_factor: usize,
    pub restart: usize,
    /// Diagonal block sizes for the block Jacobi preconditioner. Without
    /// them the preconditioner is point Jacobi.
    pub block_sizes: Option<Vec<usize>>,
    /// Accepted true relative residual.
    pub accept: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 2000,
            tol: 1e-13,
            max_iter_factor: 20,
            restart: 120,
            block_sizes: None,
            accept: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport<S = f64> {
    pub x: Vec<S>,
    pub method: SolverKind,
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖`, or the absolute residual when `b = 0`.
    pub relative_residual: f64,
}

pub fn solve<S: Scalar>(m: &CsrMatrix<S>, rhs: &[S], hint: SymmetryHint) -> Result<SolveReport<S>> {
    solve_with(m, rhs, hint, &SolverOptions::default())
}

pub fn solve_with<S: Scalar>(
    m: &CsrMatrix<S>,
    rhs: &[S],
    hint: SymmetryHint,
    opts: &SolverOptions,
) -> Result<SolveReport<S>> {
    let n = m.rows();
    if m.cols() != n || rhs.len() != n {
        return Err(Error::Shape(format!(
            "system {}x{} with right-hand side of length {}",
            m.rows(),
            m.cols(),
            rhs.len()
        )));
    }
    if let Some((i, _)) = rhs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    if n == 0 {
        return Ok(SolveReport {
            x: Vec::new(),
            method: SolverKind::DenseLu,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let bnorm = norm2(rhs);
    let (x, method, iterations) = if n <= opts.dense_threshold {
        (dense_solve(m, rhs)?, SolverKind::DenseLu, 1)
    } else {
        let pre = BlockJacobi::new(m, opts.block_sizes.as_deref())?;
        let cap = opts.max_iter_factor * n;
        match hint {
            SymmetryHint::PositiveDefinite => {
                let (x, it) = cg(m, rhs, &pre, opts.tol, cap)?;
                (x, SolverKind::Cg, it)
            }
            SymmetryHint::General => {
                let (x, it) = gmres(m, rhs, &pre, opts.tol, cap, opts.restart)?;
                (x, SolverKind::Gmres, it)
            }
        }
    };
    let res = residual_norm(m, rhs, &x)?;
    let relative_residual = if bnorm > 0.0 { res / bnorm } else { res };
    if !relative_residual.is_finite() || relative_residual > opts.accept {
        return Err(Error::NoConvergence {
            iterations,
            residual: relative_residual,
        });
    }
    log::debug!(
        "{method} solve, n = {n}, {iterations} iterations, residual {relative_residual:.2e}"
    );
    Ok(SolveReport {
        x,
        method,
        iterations,
        relative_residual,
    })
}

fn residual_norm<S: Scalar>(m: &CsrMatrix<S>, rhs: &[S], x: &[S]) -> Result<f64> {
    let ax = m.matvec(x)?;
    Ok(rhs
        .iter()
        .zip(&ax)
        .map(|(b, a)| (*b - *a).abs2())
        .sum::<f64>()
        .sqrt())
}

fn dense_solve<S: Scalar>(m: &CsrMatrix<S>, rhs: &[S]) -> Result<Vec<S>> {
    let lu = LuFactor::new(&m.to_dense())?;
    let mut x = lu.solve(rhs)?;
    // one step of iterative refinement
    let ax = m.matvec(&x)?;
    let r: Vec<S> = rhs.iter().zip(&ax).map(|(b, a)| *b - *a).collect();
    let dx = lu.solve(&r)?;
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(0));
    }
    Ok(x)
}

/// Block Jacobi preconditioner; singular diagonal blocks fall back to their
/// point diagonal.
struct BlockJacobi<S> {
    blocks: Vec<(Range<usize>, Local<S>)>,
}

enum Local<S> {
    Lu(LuFactor<S>),
    Diagonal(Vec<S>),
}

impl<S: Scalar> BlockJacobi<S> {
    fn new(m: &CsrMatrix<S>, sizes: Option<&[usize]>) -> Result<Self> {
        let n = m.rows();
        let ranges: Vec<Range<usize>> = match sizes {
            Some(sizes) => {
                if sizes.iter().sum::<usize>() != n {
                    return Err(Error::Shape(
                        "preconditioner blocks do not cover the system".into(),
                    ));
                }
                let mut start = 0;
                sizes
                    .iter()
                    .filter(|s| **s > 0)
                    .map(|s| {
                        let r = start..start + s;
                        start += s;
                        r
                    })
                    .collect()
            }
            None => (0..n).map(|i| i..i + 1).collect(),
        };
        let blocks = ranges
            .into_iter()
            .map(|r| {
                let block = m.principal_block(r.clone());
                let local = match LuFactor::new(&block) {
                    Ok(lu) if r.len() > 1 => Local::Lu(lu),
                    _ => Local::Diagonal(diag_inverse(&block)),
                };
                (r, local)
            })
            .collect();
        Ok(Self { blocks })
    }

    fn apply(&self, v: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); v.len()];
        for (r, local) in &self.blocks {
            match local {
                Local::Lu(lu) => {
                    let z = lu.solve(&v[r.clone()]).expect("block size matches");
                    out[r.clone()].copy_from_slice(&z);
                }
                Local::Diagonal(d) => {
                    for ((o, vi), di) in out[r.clone()].iter_mut().zip(&v[r.clone()]).zip(d) {
                        *o = *vi * *di;
                    }
                }
            }
        }
        out
    }
}

fn diag_inverse<S: Scalar>(block: &DenseMatrix<S>) -> Vec<S> {
    (0..block.rows())
        .map(|i| {
            let d = block[(i, i)];
            if d.abs() > 0.0 {
                S::one() / d
            } else {
                S::one()
            }
        })
        .collect()
}

fn axpy<S: Scalar>(y: &mut [S], a: S, x: &[S]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Iterations without a new best residual after which a solver gives up.
const STAGNATION_WINDOW: usize = 200;

/// Preconditioned CG. Returns the iterate with the smallest recursive
/// residual and the number of iterations spent.
fn cg<S: Scalar>(
    m: &CsrMatrix<S>,
    b: &[S],
    pre: &BlockJacobi<S>,
    tol: f64,
    cap: usize,
) -> Result<(Vec<S>, usize)> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![S::zero(); n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z = pre.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut best = (f64::INFINITY, x.clone(), 0);
    for it in 1..=cap {
        let ap = m.matvec(&p)?;
        let pap = dot(&p, &ap);
        if pap.abs() == 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rn = norm2(&r);
        if rn < best.0 {
            best = (rn, x.clone(), it);
        }
        if rn <= tol * bnorm {
            return Ok((x, it));
        }
        if it - best.2 > STAGNATION_WINDOW {
            return Ok((best.1, it));
        }
        z = pre.apply(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = *zi + beta * *pi;
        }
    }
    Ok((best.1, cap))
}

/// Complex Givens rotation zeroing `b` in `(a, b)`; returns `(c, s, r)`.
fn givens<S: Scalar>(a: S, b: S) -> (f64, S, S) {
    let nu = (a.abs2() + b.abs2()).sqrt();
    if nu == 0.0 {
        return (1.0, S::zero(), S::zero());
    }
    let phase = if a.abs() == 0.0 {
        S::one()
    } else {
        a.scale(1.0 / a.abs())
    };
    let c = a.abs() / nu;
    let s = phase * b.conj().scale(1.0 / nu);
    (c, s, phase.scale(nu))
}

/// Right-preconditioned restarted GMRES.
fn gmres<S: Scalar>(
    m: &CsrMatrix<S>,
    b: &[S],
    pre: &BlockJacobi<S>,
    tol: f64,
    cap: usize,
    restart: usize,
) -> Result<(Vec<S>, usize)> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![S::zero(); n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let restart = restart.clamp(1, n);
    let mut total = 0;
    let mut best = f64::INFINITY;
    let mut idle_cycles = 0;
    while total < cap {
        let ax = m.matvec(&x)?;
        let r: Vec<S> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let beta = norm2(&r);
        if beta <= tol * bnorm {
            return Ok((x, total));
        }
        // restart cycles that stop reducing the true residual have hit the
        // rounding floor
        if beta < 0.9 * best {
            best = beta;
            idle_cycles = 0;
        } else {
            idle_cycles += 1;
            if idle_cycles > 5 {
                return Ok((x, total));
            }
        }
        let mut basis: Vec<Vec<S>> = vec![r.iter().map(|v| v.scale(1.0 / beta)).collect()];
        let mut hess: Vec<Vec<S>> = Vec::with_capacity(restart);
        let mut rots: Vec<(f64, S)> = Vec::with_capacity(restart);
        let mut g = vec![S::zero(); restart + 1];
        g[0] = S::from_f64(beta);
        let mut k = 0;
        let mut last = 1.0;
        while k < restart && total < cap {
            total += 1;
            let mut w = m.matvec(&pre.apply(&basis[k]))?;
            let mut h = vec![S::zero(); k + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dot(v, &w);
                axpy(&mut w, -h[i], v);
            }
            // second Gram-Schmidt pass for stability
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] += c;
                axpy(&mut w, -c, v);
            }
            let wn = norm2(&w);
            h[k + 1] = S::from_f64(wn);
            for (i, (c, s)) in rots.iter().enumerate() {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = a.scale(*c) + *s * bb;
                h[i + 1] = bb.scale(*c) - s.conj() * a;
            }
            let (c, s, rr) = givens(h[k], h[k + 1]);
            h[k] = rr;
            h[k + 1] = S::zero();
            rots.push((c, s));
            let gk = g[k];
            g[k] = gk.scale(c);
            g[k + 1] = -(s.conj() * gk);
            hess.push(h);
            k += 1;
            last = g[k].abs() / bnorm;
            if last <= tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v.scale(1.0 / wn)).collect());
        }
        // back substitution on the triangular factor
        let mut y = vec![S::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= hess[j][i] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        let mut update = vec![S::zero(); n];
        for (yi, v) in y.iter().zip(&basis) {
            axpy(&mut update, *yi, v);
        }
        let update = pre.apply(&update);
        for (xi, u) in x.iter_mut().zip(update) {
            *xi += u;
        }
        if last <= tol {
            return Ok((x, total));
        }
    }
    Ok((x, total))
}
