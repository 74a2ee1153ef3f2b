//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy of the matrix are rotated pairwise until they
//! are mutually orthogonal; the accumulated rotations form `V` and the
//! column norms are the singular values. The method is slower than
//! bidiagonalization but delivers singular vectors for tiny singular values
//! with high accuracy, which is exactly what kernel extraction relies on.

use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Scalar};

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-15;

/// `M = U diag(s) Vᴴ`.
///
/// For an `m x n` input with `m >= n`, `u` is `m x n`, `s` has length `n` and
/// `v` is the full `n x n` orthogonal factor. For `m < n` the factorization
/// is thin: `u` is `m x m`, `s` has length `m`, `v` is `n x m`.
#[derive(Clone, Debug)]
pub struct Svd<S = f64> {
    pub u: DenseMatrix<S>,
    pub s: Vec<f64>,
    pub v: DenseMatrix<S>,
}

impl<S: Scalar> Svd<S> {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Reassembles `U Σ Vᴴ`.
    pub fn reconstruct(&self) -> DenseMatrix<S> {
        let (m, k) = self.u.shape();
        let n = self.v.rows();
        let mut out = DenseMatrix::zeros(m, n);
        for l in 0..k {
            let sl = self.s[l];
            if sl == 0.0 {
                continue;
            }
            for i in 0..m {
                let ui = self.u[(i, l)].scale(sl);
                for j in 0..n {
                    out[(i, j)] += ui * self.v[(j, l)].conj();
                }
            }
        }
        out
    }

    /// `V Σ⁺ Uᴴ rhs`, dropping singular values below `cutoff`.
    pub fn apply_pseudo_inverse(&self, rhs: &[S], cutoff: f64) -> Result<Vec<S>> {
        let uh_rhs = self.u.adjoint_matvec(rhs)?;
        let n = self.v.rows();
        let mut x = vec![S::zero(); n];
        for (l, (c, s)) in uh_rhs.iter().zip(&self.s).enumerate() {
            if *s < cutoff || *s == 0.0 {
                continue;
            }
            let coef = c.scale(1.0 / s);
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += self.v[(j, l)] * coef;
            }
        }
        Ok(x)
    }
}

/// Computes the SVD of `m`.
pub fn svd<S: Scalar>(m: &DenseMatrix<S>) -> Result<Svd<S>> {
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.adjoint())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

fn jacobi_tall<S: Scalar>(m: &DenseMatrix<S>) -> Result<Svd<S>> {
    let (rows, n) = m.shape();
    let mut a = m.columns();
    let mut v: Vec<Vec<S>> = (0..n)
        .map(|j| {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            e
        })
        .collect();

    // columns at rounding level carry no information; rotating them against
    // each other never settles
    let frob2: f64 = a.iter().flatten().map(|x| x.abs2()).sum();
    let noise2 = frob2 * f64::EPSILON * f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x.abs2()).sum();
                let beta: f64 = a[q].iter().map(|x| x.abs2()).sum();
                if alpha <= noise2 || beta <= noise2 {
                    continue;
                }
                let gamma = dot(&a[p], &a[q]);
                let g = gamma.abs();
                if g <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.phase().conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = a.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], phase, c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], phase, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::SvdNoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<(usize, f64)> = a.iter().map(|c| norm2(c)).enumerate().collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let sigma_max = order.first().map_or(0.0, |o| o.1);
    let tiny = f64::MIN_POSITIVE.max(sigma_max * 1e-300);
    let mut u_cols: Vec<Vec<S>> = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &(j, sj)) in order.iter().enumerate() {
        s.push(sj);
        v_cols.push(v[j].clone());
        if sj > tiny {
            u_cols.push(a[j].iter().map(|x| x.scale(1.0 / sj)).collect());
        } else {
            u_cols.push(vec![S::zero(); rows]);
            pending.push(slot);
        }
    }
    // Left singular vectors of zero singular values: complete to an
    // orthonormal set so that U keeps orthonormal columns.
    for slot in pending {
        let filled: Vec<Vec<S>> = u_cols
            .iter()
            .enumerate()
            .filter(|(k, c)| *k != slot && norm2(c) > 0.5)
            .map(|(_, c)| c.clone())
            .collect();
        u_cols[slot] = complete_orthonormal(&filled, rows);
    }

    Ok(Svd {
        u: DenseMatrix::from_columns(rows, &u_cols),
        s,
        v: DenseMatrix::from_columns(n, &v_cols),
    })
}

#[inline]
fn rotate<S: Scalar>(x: &mut [S], y: &mut [S], phase: S, c: f64, s: f64) {
    for (xp, yq) in x.iter_mut().zip(y.iter_mut()) {
        let ap = *xp;
        let aq = *yq * phase;
        *xp = ap.scale(c) - aq.scale(s);
        *yq = ap.scale(s) + aq.scale(c);
    }
}

/// A unit vector orthogonal to all of `basis` (assumed orthonormal).
pub(crate) fn complete_orthonormal<S: Scalar>(basis: &[Vec<S>], len: usize) -> Vec<S> {
    let mut best: Option<Vec<S>> = None;
    let mut best_norm = 0.0;
    for k in 0..len {
        let mut e = vec![S::zero(); len];
        e[k] = S::one();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &e);
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= *bi * c;
                }
            }
        }
        let nrm = norm2(&e);
        if nrm > best_norm {
            best_norm = nrm;
            best = Some(e);
            if nrm > 0.5 {
                break;
            }
        }
    }
    let e = best.unwrap_or_else(|| vec![S::zero(); len]);
    if best_norm > 0.0 {
        e.iter().map(|x| x.scale(1.0 / best_norm)).collect()
    } else {
        e
    }
}

/// Spectral condition number `σ_max / σ_min`; infinite when `σ_min < 1e-300`.
pub fn cond2<S: Scalar>(m: &DenseMatrix<S>) -> Result<f64> {
    let d = svd(m)?;
    let smax = d.sigma_max();
    let smin = d.s.last().copied().unwrap_or(0.0);
    if smin < 1e-300 {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}
