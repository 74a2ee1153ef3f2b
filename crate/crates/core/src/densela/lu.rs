use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Partially pivoted LU factorization `P M = L U`, packed in place.
#[derive(Clone, Debug)]
pub struct LuFactor<S = f64> {
    lu: DenseMatrix<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> LuFactor<S> {
    pub fn new(m: &DenseMatrix<S>) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::Shape(format!(
                "LU of a non-square {}x{} matrix",
                n,
                m.cols()
            )));
        }
        let mut lu = m.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return Err(Error::Singular(k));
            }
            if p != k {
                piv.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let inv_pivot = S::one() / lu[(k, k)];
            let (top, bottom) = split_rows(&mut lu, k);
            let pivot_row = &top[k + 1..];
            for row in bottom.chunks_mut(n) {
                let l = row[k] * inv_pivot;
                row[k] = l;
                if l == S::zero() {
                    continue;
                }
                for (a, b) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *a -= l * *b;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn dim(&self) -> usize {
        self.piv.len()
    }

    pub fn solve(&self, rhs: &[S]) -> Result<Vec<S>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::Shape(format!(
                "rhs of length {} for a {n}x{n} system",
                rhs.len()
            )));
        }
        let mut x: Vec<S> = self.piv.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: S = row[..i].iter().zip(&x[..i]).map(|(a, b)| *a * *b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: S = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(a, b)| *a * *b)
                .sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }
}

/// Splits the packed storage into the pivot row `k` and the rows below it.
fn split_rows<S: Scalar>(m: &mut DenseMatrix<S>, k: usize) -> (&[S], &mut [S]) {
    let n = m.cols();
    let (head, tail) = m.as_mut_slice().split_at_mut((k + 1) * n);
    (&head[k * n..], tail)
}

/// Solves `M x = rhs` by partially pivoted LU.
pub fn lu_solve<S: Scalar>(m: &DenseMatrix<S>, rhs: &[S]) -> Result<Vec<S>> {
    LuFactor::new(m)?.solve(rhs)
}
