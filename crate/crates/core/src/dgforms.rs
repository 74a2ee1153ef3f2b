//! Assembly of the DG bilinear and linear forms.
//!
//! Three formulations are provided: symmetric interior penalty for
//! Laplace/Poisson, the Helmholtz scheme with Robin data, and upwind
//! advection. Rows of the assembled matrix correspond to test functions and
//! columns to trial functions, `A_ij = a(φ_j, φ_i)`.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{facet_quadrature_for, make_basis, quadrature_for, ElementBasis};
use crate::densela::DenseMatrix;
use crate::diffop::{self, DiffOp};
use crate::error::{Error, Result};
use crate::mesh::{FacetKind, Mesh, Point};
use crate::scalar::{Complex64, Scalar};
use crate::sparsela::{solve_with, BlockSparseMatrix, SolveReport, SolverOptions, SymmetryHint};

pub type RealFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
/// Boundary data as a function of position and outward unit normal.
pub type BoundaryFn = Arc<dyn Fn(Point, Point) -> Complex64 + Send + Sync>;
pub type VelocityFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

pub const DEFAULT_PENALTY: f64 = 4.0;
pub const DEFAULT_HELMHOLTZ_OMEGA: f64 = 4.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    SipLaplace,
    Helmholtz,
    Advection,
}

#[derive(Clone)]
pub enum Formulation {
    Sip {
        penalty: f64,
        dirichlet: RealFn,
    },
    Helmholtz {
        omega: f64,
        alpha: f64,
        beta: f64,
        delta: f64,
        robin: BoundaryFn,
    },
    Advection {
        velocity: VelocityFn,
        inflow: RealFn,
    },
}

/// A boundary value problem together with its DG formulation.
///
/// `operator` is the differential operator whose (weak) Trefftz space is
/// used by the embedding; it normally matches the formulation but can be
/// replaced to study degenerate choices.
#[derive(Clone)]
pub struct DGProblem {
    pub operator: DiffOp,
    pub formulation: Formulation,
    pub source: Option<RealFn>,
    /// Quadrature exactness is `2p + quad_extra`.
    pub quad_extra: usize,
}

impl DGProblem {
    /// `-Δu = f` with Dirichlet data `g`; `f = None` for Laplace.
    pub fn sip(dirichlet: RealFn, source: Option<RealFn>) -> Self {
        Self {
            operator: diffop::laplace(2),
            formulation: Formulation::Sip {
                penalty: DEFAULT_PENALTY,
                dirichlet,
            },
            source,
            quad_extra: 2,
        }
    }

    /// `-Δu - ω²u = 0` with `∂u/∂n + iωu = g` on the boundary.
    pub fn helmholtz(omega: f64, robin: BoundaryFn) -> Self {
        Self {
            operator: diffop::helmholtz(omega, 2),
            formulation: Formulation::Helmholtz {
                omega,
                alpha: 0.5,
                beta: 0.5,
                delta: 0.5,
                robin,
            },
            source: None,
            quad_extra: 2,
        }
    }

    /// `b·∇u = f` with `u = u_D` on the inflow boundary.
    pub fn advection(velocity: VelocityFn, inflow: RealFn, source: Option<RealFn>) -> Self {
        let (bx, by) = (velocity.clone(), velocity.clone());
        Self {
            operator: diffop::advection(move |x| bx(x)[0], move |x| by(x)[1]),
            formulation: Formulation::Advection { velocity, inflow },
            source,
            quad_extra: 2,
        }
    }

    pub fn with_operator(mut self, operator: DiffOp) -> Self {
        self.operator = operator;
        self
    }

    pub fn kind(&self) -> ProblemKind {
        match self.formulation {
            Formulation::Sip { .. } => ProblemKind::SipLaplace,
            Formulation::Helmholtz { .. } => ProblemKind::Helmholtz,
            Formulation::Advection { .. } => ProblemKind::Advection,
        }
    }

    pub fn is_complex(&self) -> bool {
        self.kind() == ProblemKind::Helmholtz
    }

    pub fn penalty(&self) -> Option<f64> {
        match self.formulation {
            Formulation::Sip { penalty, .. } => Some(penalty),
            _ => None,
        }
    }

    pub fn quad_degree(&self, p: usize) -> usize {
        2 * p + self.quad_extra
    }
}

#[derive(Clone, Debug)]
pub struct AssembledSystem<S = f64> {
    pub a: BlockSparseMatrix<S>,
    pub l: Vec<S>,
    pub dof_ranges: Vec<Range<usize>>,
    pub n: usize,
}

impl<S: Scalar> AssembledSystem<S> {
    /// Solves the full DG system, preconditioning with the element blocks.
    pub fn solve(&self, hint: SymmetryHint) -> Result<SolveReport<S>> {
        let opts = SolverOptions {
            block_sizes: Some(self.dof_ranges.iter().map(|r| r.len()).collect()),
            ..SolverOptions::default()
        };
        solve_with(&self.a.to_csr(), &self.l, hint, &opts)
    }
}

/// Penalty scaling `α p² / h`, with `p = 0` treated as `p = 1`.
pub fn penalty_factor(alpha: f64, p: usize, h: f64) -> f64 {
    let p = p.max(1) as f64;
    alpha * p * p / h
}

/// Trace data of one side of a facet at a point.
struct Side {
    elem: usize,
    sign: f64,
    phi: Vec<f64>,
    /// `∇φ · n` with `n` the normal of the facet's first element.
    dn: Vec<f64>,
}

fn sides_at(mesh: &Mesh, bases: &[ElementBasis], f: usize, x: Point) -> Vec<Side> {
    let facet = &mesh.facets()[f];
    let n = facet.normal;
    let mut out = Vec::with_capacity(2);
    let (a, b) = facet.elements;
    for (elem, sign) in std::iter::once((a, 1.0)).chain(b.map(|b| (b, -1.0))) {
        let basis = &bases[elem];
        let phi = basis.eval_all(x);
        let dn = basis
            .grad_all(x)
            .iter()
            .map(|g| g[0] * n[0] + g[1] * n[1])
            .collect();
        out.push(Side {
            elem,
            sign,
            phi,
            dn,
        });
    }
    out
}

/// Local contributions of one facet.
struct FacetPart<S> {
    blocks: Vec<((usize, usize), DenseMatrix<S>)>,
    rhs: Vec<(usize, Vec<S>)>,
}

impl<S: Scalar> FacetPart<S> {
    fn new(mesh: &Mesh, bases: &[ElementBasis], f: usize) -> Self {
        let (a, b) = mesh.facets()[f].elements;
        let elems: Vec<usize> = std::iter::once(a).chain(b).collect();
        let mut blocks = Vec::new();
        for &x in &elems {
            for &y in &elems {
                blocks.push(((x, y), DenseMatrix::zeros(bases[x].len(), bases[y].len())));
            }
        }
        let rhs = vec![(a, vec![S::zero(); bases[a].len()])];
        Self { blocks, rhs }
    }

    fn block_mut(&mut self, x: usize, y: usize) -> &mut DenseMatrix<S> {
        &mut self
            .blocks
            .iter_mut()
            .find(|(k, _)| *k == (x, y))
            .expect("facet block")
            .1
    }
}

fn assemble<S, V, F>(mesh: &Mesh, p: usize, volume: V, facet: F) -> Result<AssembledSystem<S>>
where
    S: Scalar,
    V: Fn(&ElementBasis) -> (DenseMatrix<S>, Vec<S>) + Sync,
    F: Fn(usize, &[ElementBasis]) -> FacetPart<S> + Sync,
{
    let bases: Vec<ElementBasis> = (0..mesh.num_elements())
        .map(|e| make_basis(mesh, e, p))
        .collect();
    let sizes: Vec<usize> = bases.iter().map(ElementBasis::len).collect();
    let mut a = BlockSparseMatrix::square(&sizes);
    let dof_ranges: Vec<Range<usize>> = (0..sizes.len()).map(|k| a.row_range(k)).collect();
    let n = a.shape().0;
    let mut l = vec![S::zero(); n];

    let vols: Vec<(DenseMatrix<S>, Vec<S>)> = bases.par_iter().map(&volume).collect();
    for (e, (m, r)) in vols.into_iter().enumerate() {
        a.add_block(e, e, m)?;
        for (li, v) in l[dof_ranges[e].clone()].iter_mut().zip(r) {
            *li += v;
        }
    }
    let facets: Vec<FacetPart<S>> = (0..mesh.num_facets())
        .into_par_iter()
        .map(|f| facet(f, &bases))
        .collect();
    for part in facets {
        for ((x, y), m) in part.blocks {
            a.add_block(x, y, m)?;
        }
        for (e, r) in part.rhs {
            for (li, v) in l[dof_ranges[e].clone()].iter_mut().zip(r) {
                *li += v;
            }
        }
    }
    Ok(AssembledSystem {
        a,
        l,
        dof_ranges,
        n,
    })
}

fn source_volume(
    mesh: &Mesh,
    basis: &ElementBasis,
    degree: usize,
    mut kernel: impl FnMut(Point, f64, &[f64], &[Point], &mut DenseMatrix),
    source: Option<&RealFn>,
) -> (DenseMatrix, Vec<f64>) {
    let n = basis.len();
    let mut m = DenseMatrix::zeros(n, n);
    let mut r = vec![0.0; n];
    for (x, w) in quadrature_for(mesh, basis.element_id, degree).iter() {
        let phi = basis.eval_all(x);
        let grad = basis.grad_all(x);
        kernel(x, w, &phi, &grad, &mut m);
        if let Some(f) = source {
            let fx = f(x) * w;
            for (ri, pi) in r.iter_mut().zip(&phi) {
                *ri += fx * pi;
            }
        }
    }
    (m, r)
}

/// Symmetric interior penalty discretization of `-Δu = f`, `u = g` on `∂Ω`.
pub fn assemble_sip(mesh: &Mesh, p: usize, problem: &DGProblem) -> Result<AssembledSystem<f64>> {
    let Formulation::Sip { penalty, dirichlet } = &problem.formulation else {
        return Err(Error::NotApplicable(
            "SIP assembly needs a SIP problem".into(),
        ));
    };
    if *penalty <= 0.0 {
        return Err(Error::Config(format!(
            "penalty must be positive, got {penalty}"
        )));
    }
    let deg = problem.quad_degree(p);
    let volume = |basis: &ElementBasis| {
        source_volume(
            mesh,
            basis,
            deg,
            |_, w, _, grad, m| {
                for (i, gi) in grad.iter().enumerate() {
                    for (j, gj) in grad.iter().enumerate() {
                        m[(i, j)] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                    }
                }
            },
            problem.source.as_ref(),
        )
    };
    let facet = |f: usize, bases: &[ElementBasis]| {
        let mut part = FacetPart::<f64>::new(mesh, bases, f);
        let sigma = penalty_factor(*penalty, p, mesh.facet_h(f));
        let boundary = mesh.facets()[f].kind == FacetKind::Boundary;
        for (x, w) in facet_quadrature_for(mesh, f, deg).iter() {
            let sides = sides_at(mesh, bases, f, x);
            if boundary {
                let s = &sides[0];
                let g = dirichlet(x);
                let m = part.block_mut(s.elem, s.elem);
                for i in 0..s.phi.len() {
                    for j in 0..s.phi.len() {
                        m[(i, j)] -= w
                            * (s.dn[j] * s.phi[i] + s.dn[i] * s.phi[j]
                                - sigma * s.phi[i] * s.phi[j]);
                    }
                }
                for (i, r) in part.rhs[0].1.iter_mut().enumerate() {
                    *r += w * g * (sigma * s.phi[i] - s.dn[i]);
                }
                continue;
            }
            for tx in &sides {
                for ty in &sides {
                    let m = part.block_mut(tx.elem, ty.elem);
                    for i in 0..tx.phi.len() {
                        for j in 0..ty.phi.len() {
                            m[(i, j)] += w
                                * (-0.5 * ty.dn[j] * tx.sign * tx.phi[i]
                                    - 0.5 * tx.dn[i] * ty.sign * ty.phi[j]
                                    + sigma * tx.sign * ty.sign * tx.phi[i] * ty.phi[j]);
                        }
                    }
                }
            }
        }
        part
    };
    assemble(mesh, p, volume, facet)
}

/// Helmholtz DG scheme with Robin boundary data `g = ∂u/∂n + iωu`.
pub fn assemble_helmholtz(
    mesh: &Mesh,
    p: usize,
    problem: &DGProblem,
) -> Result<AssembledSystem<Complex64>> {
    let Formulation::Helmholtz {
        omega,
        alpha,
        beta,
        delta,
        robin,
    } = &problem.formulation
    else {
        return Err(Error::NotApplicable(
            "Helmholtz assembly needs a Helmholtz problem".into(),
        ));
    };
    let (omega, alpha, beta, delta) = (*omega, *alpha, *beta, *delta);
    if omega <= 0.0 {
        return Err(Error::Config(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let i = Complex64::i();
    // -c/(iω) = i c/ω
    let jump_pen = i * alpha * omega;
    let grad_pen = i * (beta / omega);
    let bnd_pen = i * ((1.0 - delta) * omega);
    let bnd_grad = i * (delta / omega);
    let deg = problem.quad_degree(p);

    let volume = |basis: &ElementBasis| {
        let n = basis.len();
        let mut m = DenseMatrix::<Complex64>::zeros(n, n);
        for (x, w) in quadrature_for(mesh, basis.element_id, deg).iter() {
            let phi = basis.eval_all(x);
            let grad = basis.grad_all(x);
            for r in 0..n {
                for c in 0..n {
                    let v = grad[r][0] * grad[c][0] + grad[r][1] * grad[c][1]
                        - omega * omega * phi[r] * phi[c];
                    m[(r, c)] += Complex64::new(w * v, 0.0);
                }
            }
        }
        (m, vec![Complex64::new(0.0, 0.0); n])
    };
    let facet = |f: usize, bases: &[ElementBasis]| {
        let mut part = FacetPart::<Complex64>::new(mesh, bases, f);
        let boundary = mesh.facets()[f].kind == FacetKind::Boundary;
        for (x, w) in facet_quadrature_for(mesh, f, deg).iter() {
            let sides = sides_at(mesh, bases, f, x);
            if boundary {
                let s = &sides[0];
                let g = robin(x, mesh.facets()[f].normal);
                let m = part.block_mut(s.elem, s.elem);
                for r in 0..s.phi.len() {
                    for c in 0..s.phi.len() {
                        let real = -delta * (s.dn[c] * s.phi[r] + s.phi[c] * s.dn[r]);
                        let v = Complex64::new(real, 0.0)
                            + bnd_pen * (s.phi[c] * s.phi[r])
                            + bnd_grad * (s.dn[c] * s.dn[r]);
                        m[(r, c)] += v * w;
                    }
                }
                for (r, out) in part.rhs[0].1.iter_mut().enumerate() {
                    *out += (g * ((1.0 - delta) * s.phi[r]) + bnd_grad * g * s.dn[r]) * w;
                }
                continue;
            }
            for tx in &sides {
                for ty in &sides {
                    let m = part.block_mut(tx.elem, ty.elem);
                    let ss = tx.sign * ty.sign;
                    for r in 0..tx.phi.len() {
                        for c in 0..ty.phi.len() {
                            let real = -0.5 * ty.dn[c] * tx.sign * tx.phi[r]
                                - 0.5 * ty.sign * ty.phi[c] * tx.dn[r];
                            let v = Complex64::new(real, 0.0)
                                + jump_pen * (ss * tx.phi[r] * ty.phi[c])
                                + grad_pen * (ss * tx.dn[r] * ty.dn[c]);
                            m[(r, c)] += v * w;
                        }
                    }
                }
            }
        }
        part
    };
    assemble(mesh, p, volume, facet)
}

/// Upwind DG discretization of `b·∇u = f` with inflow data `u_D`.
///
/// The upwind side is chosen pointwise from the sign of `b·n`.
pub fn assemble_advection(
    mesh: &Mesh,
    p: usize,
    problem: &DGProblem,
) -> Result<AssembledSystem<f64>> {
    let Formulation::Advection { velocity, inflow } = &problem.formulation else {
        return Err(Error::NotApplicable(
            "advection assembly needs an advection problem".into(),
        ));
    };
    let deg = problem.quad_degree(p);
    let volume = |basis: &ElementBasis| {
        source_volume(
            mesh,
            basis,
            deg,
            |x, w, phi, grad, m| {
                let b = velocity(x);
                for (i, gi) in grad.iter().enumerate() {
                    let bg = w * (b[0] * gi[0] + b[1] * gi[1]);
                    for (j, pj) in phi.iter().enumerate() {
                        m[(i, j)] -= bg * pj;
                    }
                }
            },
            problem.source.as_ref(),
        )
    };
    let facet = |f: usize, bases: &[ElementBasis]| {
        let mut part = FacetPart::<f64>::new(mesh, bases, f);
        let n = mesh.facets()[f].normal;
        for (x, w) in facet_quadrature_for(mesh, f, deg).iter() {
            let b = velocity(x);
            let bn = b[0] * n[0] + b[1] * n[1];
            let sides = sides_at(mesh, bases, f, x);
            if sides.len() == 1 {
                let s = &sides[0];
                if bn >= 0.0 {
                    let m = part.block_mut(s.elem, s.elem);
                    for i in 0..s.phi.len() {
                        for j in 0..s.phi.len() {
                            m[(i, j)] += w * bn * s.phi[i] * s.phi[j];
                        }
                    }
                } else {
                    let ud = inflow(x);
                    for (i, r) in part.rhs[0].1.iter_mut().enumerate() {
                        *r -= w * bn * ud * s.phi[i];
                    }
                }
                continue;
            }
            let up = if bn > 0.0 { &sides[0] } else { &sides[1] };
            for tx in &sides {
                let m = part.block_mut(tx.elem, up.elem);
                for i in 0..tx.phi.len() {
                    for j in 0..up.phi.len() {
                        m[(i, j)] += w * bn * tx.sign * tx.phi[i] * up.phi[j];
                    }
                }
            }
        }
        part
    };
    assemble(mesh, p, volume, facet)
}
