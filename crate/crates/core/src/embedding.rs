//! Embedded Trefftz spaces.
//!
//! Per element the matrix `W_K = ⟨L φ_j, L̃ φ_i⟩_K` is assembled and an
//! orthonormal basis of its numerical kernel becomes the block `T_K` of the
//! embedding `T`. The DG system is then projected, `Tᵀ A T u_T = Tᵀ (l - A u_f)`,
//! and the DG solution is recovered as `u_h = T u_T + u_f`, where `u_f` is an
//! element-local particular solution of the source term.

use rayon::prelude::*;

use crate::basis::{make_basis, quadrature_for, ElementBasis};
use crate::densela::{kernel_with, pseudo_apply, qr, DenseMatrix, KernelOptions};
use crate::dgforms::{AssembledSystem, DGProblem, RealFn};
use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::{norm2, Scalar};
use crate::sparsela::{
    solve_with, triple_product, BlockSparseMatrix, SolverKind, SolverOptions, SymmetryHint,
};

/// Spectrum information from the kernel extraction on one element, taken
/// from the equilibrated block.
#[derive(Clone, Debug)]
pub struct ElementDiagnostics {
    pub singular_values: Vec<f64>,
    pub max_zero_sv: Option<f64>,
    pub min_nonzero_sv: Option<f64>,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct TrefftzEmbedding {
    /// Block diagonal, element blocks `N_K x M_K` with orthonormal columns.
    pub t: BlockSparseMatrix<f64>,
    pub dims: Vec<usize>,
    pub diagnostics: Vec<ElementDiagnostics>,
    /// Particular solution in DG numbering.
    pub particular: Option<Vec<f64>>,
}

impl TrefftzEmbedding {
    pub fn reduced_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn full_dim(&self) -> usize {
        self.t.shape().0
    }

    pub fn block(&self, e: usize) -> &DenseMatrix {
        self.t
            .block(e, e)
            .expect("embedding has every diagonal block")
    }
}

/// Block diagonal `W` with `W_K[i][j] = ⟨L φ_j, L̃ φ_i⟩_K`.
pub fn assemble_w(
    mesh: &Mesh,
    p: usize,
    op: &DiffOp,
    test_op: &DiffOp,
    quad_degree: usize,
) -> Result<BlockSparseMatrix> {
    if op.dim() != mesh.dim() || test_op.dim() != mesh.dim() {
        return Err(Error::Dimension {
            op: op.dim(),
            mesh: mesh.dim(),
        });
    }
    let blocks: Vec<DenseMatrix> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let basis = make_basis(mesh, e, p);
            let n = basis.len();
            let mut w = DenseMatrix::zeros(n, n);
            for (x, wq) in quadrature_for(mesh, e, quad_degree).iter() {
                let l = op.apply_all(&basis, x)?;
                let lt = test_op.apply_all(&basis, x)?;
                for (i, ti) in lt.iter().enumerate() {
                    if *ti == 0.0 {
                        continue;
                    }
                    for (j, lj) in l.iter().enumerate() {
                        w[(i, j)] += wq * ti * lj;
                    }
                }
            }
            Ok(w)
        })
        .collect::<Result<_>>()?;
    Ok(BlockSparseMatrix::block_diagonal(blocks))
}

/// Element block `R W C` with `R`, `C` diagonal so that rows and columns
/// have unit norm. Scaled monomials grade `W` by degree; equilibration
/// removes that grading before singular values are compared with `ε`.
struct Equilibrated {
    matrix: DenseMatrix,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

/// Reciprocal norms; entries at or below the rounding level of the largest
/// norm are scaled like the largest one.
fn inverse_norms(norms: Vec<f64>) -> Vec<f64> {
    let max = norms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return vec![1.0; norms.len()];
    }
    let floor = max * f64::EPSILON * norms.len() as f64;
    norms
        .into_iter()
        .map(|v| if v > floor { 1.0 / v } else { 1.0 / max })
        .collect()
}

impl Equilibrated {
    fn new(w: &DenseMatrix) -> Self {
        let (m, n) = w.shape();
        let cols = inverse_norms((0..n).map(|j| norm2(&w.column(j))).collect());
        let mut matrix = w.clone();
        for i in 0..m {
            for (v, c) in matrix.row_mut(i).iter_mut().zip(&cols) {
                *v *= c;
            }
        }
        let rows = inverse_norms((0..m).map(|i| norm2(matrix.row(i))).collect());
        for (i, r) in rows.iter().enumerate() {
            for v in matrix.row_mut(i) {
                *v *= r;
            }
        }
        Self { matrix, rows, cols }
    }

    /// Orthonormal basis of `C K` for a kernel basis `K` of `R W C`.
    fn recover_kernel(&self, k: &DenseMatrix) -> DenseMatrix {
        if k.cols() == 0 {
            return k.clone();
        }
        let mut ck = k.clone();
        for (i, c) in self.cols.iter().enumerate() {
            for v in ck.row_mut(i) {
                *v *= c;
            }
        }
        qr(&ck).q.select_columns(0..k.cols())
    }
}

/// Extracts the element kernels of `W` into the embedding `T`.
pub fn build_embedding(w: &BlockSparseMatrix, opts: &KernelOptions) -> Result<TrefftzEmbedding> {
    if !w.is_block_diagonal() {
        return Err(Error::Shape("W must be block diagonal".into()));
    }
    let sizes = w.row_sizes();
    let kernels = (0..sizes.len())
        .into_par_iter()
        .map(|k| {
            let block = w
                .block(k, k)
                .cloned()
                .unwrap_or_else(|| DenseMatrix::zeros(sizes[k], sizes[k]));
            let eq = Equilibrated::new(&block);
            let mut result = kernel_with(&eq.matrix, opts)?;
            result.kernel_basis = eq.recover_kernel(&result.kernel_basis);
            Ok(result)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut blocks = Vec::with_capacity(kernels.len());
    let mut dims = Vec::with_capacity(kernels.len());
    let mut diagnostics = Vec::with_capacity(kernels.len());
    for k in kernels {
        dims.push(k.dim);
        blocks.push(k.kernel_basis);
        diagnostics.push(ElementDiagnostics {
            singular_values: k.singular_values,
            max_zero_sv: k.max_zero_sv,
            min_nonzero_sv: k.min_nonzero_sv,
            scale: k.scale,
        });
    }
    Ok(TrefftzEmbedding {
        t: BlockSparseMatrix::block_diagonal(blocks),
        dims,
        diagnostics,
        particular: None,
    })
}

#[derive(Clone, Debug)]
pub struct ParticularSolution {
    pub u_f: Vec<f64>,
    /// Per element `‖W_K u_f - w_K‖ / ‖w_K‖` (0 where `w_K = 0`).
    pub residuals: Vec<f64>,
    /// Elements whose right-hand side was not in the range of `W_K`.
    pub inconsistent: Vec<usize>,
}

const SURJECTIVITY_TOL: f64 = 1e-6;

/// Element-local particular solutions `(u_f)_K = C (R W_K C)† R w_K` with
/// `(w_K)_i = ⟨f, L̃ φ_i⟩_K`.
pub fn particular_solution(
    w: &BlockSparseMatrix,
    f: &RealFn,
    test_op: &DiffOp,
    mesh: &Mesh,
    p: usize,
    quad_degree: usize,
    eps: f64,
) -> Result<ParticularSolution> {
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let basis = make_basis(mesh, e, p);
            let n = basis.len();
            let mut rhs = vec![0.0; n];
            for (x, wq) in quadrature_for(mesh, e, quad_degree).iter() {
                let fx = f(x) * wq;
                for (r, t) in rhs.iter_mut().zip(test_op.apply_all(&basis, x)?) {
                    *r += fx * t;
                }
            }
            let rn = norm2(&rhs);
            if rn == 0.0 {
                return Ok((vec![0.0; n], 0.0));
            }
            let wk = w
                .block(e, e)
                .cloned()
                .unwrap_or_else(|| DenseMatrix::zeros(n, n));
            let eq = Equilibrated::new(&wk);
            let scaled: Vec<f64> = rhs.iter().zip(&eq.rows).map(|(v, r)| v * r).collect();
            let y = pseudo_apply(&eq.matrix, &scaled, eps)?.x;
            let x: Vec<f64> = y.iter().zip(&eq.cols).map(|(v, c)| v * c).collect();
            let res: Vec<f64> = wk
                .matvec(&x)?
                .iter()
                .zip(&rhs)
                .map(|(a, b)| a - b)
                .collect();
            Ok((x, norm2(&res) / rn))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut u_f = Vec::with_capacity(w.shape().0);
    let mut residuals = Vec::with_capacity(parts.len());
    let mut inconsistent = Vec::new();
    for (e, (x, r)) in parts.into_iter().enumerate() {
        if r > SURJECTIVITY_TOL {
            log::warn!("element {e}: source not in the range of the local operator (relative residual {r:.2e})");
            inconsistent.push(e);
        }
        u_f.extend(x);
        residuals.push(r);
    }
    Ok(ParticularSolution {
        u_f,
        residuals,
        inconsistent,
    })
}

/// Builds the embedding for a problem: `W` from its operator and leading
/// part, kernels, and a particular solution when a source is present.
pub fn embed(
    mesh: &Mesh,
    p: usize,
    problem: &DGProblem,
    opts: &KernelOptions,
) -> Result<TrefftzEmbedding> {
    let test_op = problem.operator.leading_part();
    let deg = problem.quad_degree(p);
    let w = assemble_w(mesh, p, &problem.operator, &test_op, deg)?;
    let mut emb = build_embedding(&w, opts)?;
    if let Some(f) = &problem.source {
        let ps = particular_solution(&w, f, &test_op, mesh, p, deg, opts.eps)?;
        emb.particular = Some(ps.u_f);
    }
    Ok(emb)
}

#[derive(Clone, Debug)]
pub struct EmbeddedReport {
    pub n: usize,
    pub m: usize,
    pub nnz_full: usize,
    pub nnz_reduced: usize,
    pub solver: SolverKind,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EmbeddedSolution<S = f64> {
    pub u_h: Vec<S>,
    pub u_t: Vec<S>,
    pub reduced: BlockSparseMatrix<S>,
    pub report: EmbeddedReport,
}

/// Solves the projected system and reconstructs the DG coefficients.
pub fn solve_embedded<S: Scalar>(
    system: &AssembledSystem<S>,
    emb: &TrefftzEmbedding,
    hint: SymmetryHint,
) -> Result<EmbeddedSolution<S>> {
    if emb.full_dim() != system.n {
        return Err(Error::Shape(format!(
            "embedding acts on {} dofs, system has {}",
            emb.full_dim(),
            system.n
        )));
    }
    let reduced = triple_product(&emb.t, &system.a)?;
    let u_f: Option<Vec<S>> = emb
        .particular
        .as_ref()
        .map(|u| u.iter().map(|v| S::from_f64(*v)).collect());
    let mut rhs_full = system.l.clone();
    if let Some(u_f) = &u_f {
        let au = system.a.matvec(u_f)?;
        for (r, a) in rhs_full.iter_mut().zip(au) {
            *r -= a;
        }
    }
    let rhs = emb.t.apply_transpose(&rhs_full)?;
    let opts = SolverOptions {
        block_sizes: Some(emb.dims.clone()),
        ..SolverOptions::default()
    };
    let csr = reduced.to_csr();
    let sol = solve_with(&csr, &rhs, hint, &opts)?;
    let mut u_h = emb.t.apply(&sol.x)?;
    if let Some(u_f) = &u_f {
        for (u, f) in u_h.iter_mut().zip(u_f) {
            *u += *f;
        }
    }
    let report = EmbeddedReport {
        n: system.n,
        m: emb.reduced_dim(),
        nnz_full: system.a.structural_nnz(),
        nnz_reduced: reduced.structural_nnz(),
        solver: sol.method,
        iterations: sol.iterations,
        residual: sol.relative_residual,
    };
    Ok(EmbeddedSolution {
        u_h,
        u_t: sol.x,
        reduced,
        report,
    })
}

/// Normalized pointwise residual `max |L(T_K c)|` of every kernel column.
///
/// Only meaningful when the embedding is a strong Trefftz space, that is
/// `L` has constant coefficients and is its own leading part. Each column
/// `t` is normalized by `max|t_j| · max Σ_j |L φ_j|` over the same points.
pub fn trefftz_residual(
    emb: &TrefftzEmbedding,
    op: &DiffOp,
    mesh: &Mesh,
    p: usize,
    quad_degree: usize,
) -> Result<Vec<f64>> {
    if !op.is_constant_coefficient() || op.leading_part() != *op {
        return Err(Error::NotApplicable(
            "pointwise Trefftz residual needs a constant-coefficient operator equal to its leading part".into(),
        ));
    }
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let basis: ElementBasis = make_basis(mesh, e, p);
            let t = emb.block(e);
            let rule = quadrature_for(mesh, e, quad_degree);
            let lphi: Vec<Vec<f64>> = rule
                .points
                .iter()
                .map(|x| op.apply_all(&basis, *x))
                .collect::<Result<_>>()?;
            let reach = lphi
                .iter()
                .map(|l| l.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            if reach == 0.0 {
                return Ok(0.0);
            }
            let mut worst: f64 = 0.0;
            for c in 0..t.cols() {
                let col = t.column(c);
                let size = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for l in &lphi {
                    let v = col.iter().zip(l).map(|(a, b)| a * b).sum::<f64>().abs();
                    worst = worst.max(v / (size * reach));
                }
            }
            Ok(worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::svd;
    use crate::diffop;
    use crate::mesh::{refine, unit_square_mesh};

    fn opts() -> KernelOptions {
        KernelOptions::default()
    }

    #[test]
    fn laplace_w_blocks() {
        let mesh = unit_square_mesh(1).unwrap();
        let lap = diffop::laplace(2);
        let w1 = assemble_w(&mesh, 1, &lap, &lap, 4).unwrap();
        assert_eq!(w1.to_dense().max_abs(), 0.0);
        assert!(w1.is_block_diagonal());

        let w2 = assemble_w(&mesh, 2, &lap, &lap, 6).unwrap();
        let s = svd(w2.block(0, 0).unwrap()).unwrap();
        let rank = s.s.iter().filter(|v| **v > 1e-10 * s.s[0]).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn helmholtz_w_rank() {
        let mesh = unit_square_mesh(1).unwrap();
        let op = diffop::helmholtz(2.0, 2);
        let w = assemble_w(&mesh, 3, &op, &op.leading_part(), 8).unwrap();
        let b = w.block(0, 0).unwrap();
        assert_eq!(b.shape(), (10, 10));
        let s = svd(b).unwrap();
        assert_eq!(s.s.iter().filter(|v| **v > 1e-10 * s.s[0]).count(), 3);
    }

    #[test]
    fn kernel_dimensions() {
        let mesh = refine(&unit_square_mesh(2).unwrap());
        let lap = diffop::laplace(2);
        for p in [2, 4] {
            let w = assemble_w(&mesh, p, &lap, &lap, 2 * p + 2).unwrap();
            let emb = build_embedding(&w, &opts()).unwrap();
            assert!(emb.dims.iter().all(|m| *m == 2 * p + 1));
        }
        let adv = diffop::advection(|x| -x[1].sin(), |x| x[0].cos());
        let w = assemble_w(&mesh, 3, &adv, &adv.leading_part(), 8).unwrap();
        assert!(build_embedding(&w, &opts())
            .unwrap()
            .dims
            .iter()
            .all(|m| *m == 4));
    }

    #[test]
    fn embedding_is_orthonormal() {
        let mesh = unit_square_mesh(2).unwrap();
        let lap = diffop::laplace(2);
        let w = assemble_w(&mesh, 3, &lap, &lap, 8).unwrap();
        let emb = build_embedding(&w, &opts()).unwrap();
        let t = emb.t.to_dense();
        let gram = t.transpose().matmul(&t).unwrap();
        assert!(
            gram.sub(&DenseMatrix::identity(emb.reduced_dim()))
                .unwrap()
                .max_abs()
                < 1e-12
        );
        let r = trefftz_residual(&emb, &lap, &mesh, 3, 8).unwrap();
        assert!(r.iter().all(|v| *v <= 1e-8));
        let w1 = assemble_w(&mesh, 1, &lap, &lap, 4).unwrap();
        let emb1 = build_embedding(&w1, &opts()).unwrap();
        assert!(trefftz_residual(&emb1, &lap, &mesh, 1, 4)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));

        let adv = diffop::advection(|x| x[1], |x| x[0]);
        assert!(matches!(
            trefftz_residual(&emb, &adv, &mesh, 3, 8),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn particular_solutions() {
        let mesh = unit_square_mesh(2).unwrap();
        let lap = diffop::laplace(2);
        let p = 3;
        let w = assemble_w(&mesh, p, &lap, &lap, 8).unwrap();
        let zero: RealFn = std::sync::Arc::new(|_| 0.0);
        let ps = particular_solution(&w, &zero, &lap, &mesh, p, 8, 1e-7).unwrap();
        assert!(ps.u_f.iter().all(|v| *v == 0.0));

        let two: RealFn = std::sync::Arc::new(|_| 2.0);
        let ps = particular_solution(&w, &two, &lap, &mesh, p, 8, 1e-7).unwrap();
        assert!(ps.inconsistent.is_empty());
        assert!(ps.residuals.iter().all(|r| *r < 1e-8));
        // ⟨-Δu_f - 2, -Δφ_i⟩ by independent quadrature
        for e in 0..mesh.num_elements() {
            let basis = make_basis(&mesh, e, p);
            let coeffs = &ps.u_f[e * basis.len()..(e + 1) * basis.len()];
            for i in 0..basis.len() {
                let mut acc = 0.0;
                let mut scale: f64 = 0.0;
                for (x, wq) in quadrature_for(&mesh, e, 10).iter() {
                    let lu: f64 = lap
                        .apply_all(&basis, x)
                        .unwrap()
                        .iter()
                        .zip(coeffs)
                        .map(|(a, c)| a * c)
                        .sum();
                    let lt = lap.apply_to_basis(&basis, i, x).unwrap();
                    acc += wq * (lu - 2.0) * lt;
                    scale += wq * 2.0 * lt.abs();
                }
                assert!(acc.abs() <= 1e-8 * scale.max(1.0));
            }
        }
    }
}
