//! Householder QR, with and without column pivoting.

use crate::densela::DenseMatrix;
use crate::scalar::{norm2, Scalar};

#[derive(Clone, Debug)]
pub struct Qr<S = f64> {
    /// Full `m x m` orthogonal factor.
    pub q: DenseMatrix<S>,
    /// `m x n` upper triangular factor.
    pub r: DenseMatrix<S>,
}

/// `M P = Q R` where `perm[k]` is the original index of column `k`.
#[derive(Clone, Debug)]
pub struct PivotedQr<S = f64> {
    pub q: DenseMatrix<S>,
    pub r: DenseMatrix<S>,
    pub perm: Vec<usize>,
}

impl<S: Scalar> PivotedQr<S> {
    /// Magnitudes `|R_kk|`, non-increasing up to rounding.
    pub fn diagonal_magnitudes(&self) -> Vec<f64> {
        let k = self.r.rows().min(self.r.cols());
        (0..k).map(|i| self.r[(i, i)].abs()).collect()
    }
}

pub fn qr<S: Scalar>(m: &DenseMatrix<S>) -> Qr<S> {
    let (q, r, _) = householder(m, false);
    Qr { q, r }
}

pub fn qr_pivoted<S: Scalar>(m: &DenseMatrix<S>) -> PivotedQr<S> {
    let (q, r, perm) = householder(m, true);
    PivotedQr { q, r, perm }
}

fn householder<S: Scalar>(
    m: &DenseMatrix<S>,
    pivot: bool,
) -> (DenseMatrix<S>, DenseMatrix<S>, Vec<usize>) {
    let (rows, cols) = m.shape();
    let mut r = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut reflectors: Vec<(usize, Vec<S>)> = Vec::with_capacity(steps);

    for k in 0..steps {
        if pivot {
            let (best, _) = (k..cols)
                .map(|j| {
                    let n2: f64 = (k..rows).map(|i| r[(i, j)].abs2()).sum();
                    (j, n2)
                })
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best != k {
                for i in 0..rows {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }
        }

        let x: Vec<S> = (k..rows).map(|i| r[(i, k)]).collect();
        let alpha = norm2(&x);
        if alpha == 0.0 {
            continue;
        }
        // v = x + phase(x0) |x| e1 reflects x onto -phase(x0) |x| e1
        let mut v = x;
        let shift = v[0].phase().scale(alpha);
        v[0] += shift;
        let vnorm2: f64 = v.iter().map(|t| t.abs2()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        apply_reflector_left(&mut r, k, &v, vnorm2);
        for i in k + 1..rows {
            r[(i, k)] = S::zero();
        }
        reflectors.push((k, v));
    }

    let mut q = DenseMatrix::identity(rows);
    for (k, v) in reflectors.iter().rev() {
        let vnorm2: f64 = v.iter().map(|t| t.abs2()).sum();
        apply_reflector_left(&mut q, *k, v, vnorm2);
    }
    (q, r, perm)
}

/// `A[k.., :] -= 2 v (vᴴ A[k.., :]) / (vᴴ v)`.
fn apply_reflector_left<S: Scalar>(a: &mut DenseMatrix<S>, k: usize, v: &[S], vnorm2: f64) {
    let cols = a.cols();
    let mut w = vec![S::zero(); cols];
    for (t, vi) in v.iter().enumerate() {
        let vc = vi.conj();
        for (wj, aij) in w.iter_mut().zip(a.row(k + t)) {
            *wj += vc * *aij;
        }
    }
    let f = 2.0 / vnorm2;
    for (t, vi) in v.iter().enumerate() {
        let vf = vi.scale(f);
        let row = a.row_mut(k + t);
        for (aij, wj) in row.iter_mut().zip(&w) {
            *aij -= vf * *wj;
        }
    }
}
