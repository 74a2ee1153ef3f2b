use std::collections::BTreeMap;
use std::ops::Range;

use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparsela::CsrMatrix;

/// Sparse matrix of dense blocks over per-element dof ranges.
///
/// Blocks are kept in a `BTreeMap`, so iteration (and therefore every
/// derived product or conversion) follows block-row then block-column order
/// regardless of the order in which contributions were added.
#[derive(Clone, Debug)]
pub struct BlockSparseMatrix<S = f64> {
    row_offsets: Vec<usize>,
    col_offsets: Vec<usize>,
    blocks: BTreeMap<(usize, usize), DenseMatrix<S>>,
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut o = Vec::with_capacity(sizes.len() + 1);
    o.push(0);
    for s in sizes {
        o.push(o.last().unwrap() + s);
    }
    o
}

impl<S: Scalar> BlockSparseMatrix<S> {
    pub fn new(row_sizes: &[usize], col_sizes: &[usize]) -> Self {
        Self {
            row_offsets: offsets(row_sizes),
            col_offsets: offsets(col_sizes),
            blocks: BTreeMap::new(),
        }
    }

    pub fn square(sizes: &[usize]) -> Self {
        Self::new(sizes, sizes)
    }

    /// Block-diagonal matrix with the given (possibly rectangular) blocks.
    pub fn block_diagonal(blocks: Vec<DenseMatrix<S>>) -> Self {
        let rows: Vec<usize> = blocks.iter().map(DenseMatrix::rows).collect();
        let cols: Vec<usize> = blocks.iter().map(DenseMatrix::cols).collect();
        let mut m = Self::new(&rows, &cols);
        for (k, b) in blocks.into_iter().enumerate() {
            m.blocks.insert((k, k), b);
        }
        m
    }

    pub fn num_block_rows(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn num_block_cols(&self) -> usize {
        self.col_offsets.len() - 1
    }

    pub fn row_sizes(&self) -> Vec<usize> {
        self.row_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn col_sizes(&self) -> Vec<usize> {
        self.col_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn row_range(&self, bi: usize) -> Range<usize> {
        self.row_offsets[bi]..self.row_offsets[bi + 1]
    }

    pub fn col_range(&self, bj: usize) -> Range<usize> {
        self.col_offsets[bj]..self.col_offsets[bj + 1]
    }

    /// Global `(rows, cols)`.
    pub fn shape(&self) -> (usize, usize) {
        (
            *self.row_offsets.last().unwrap(),
            *self.col_offsets.last().unwrap(),
        )
    }

    /// Adds `block` into position `(bi, bj)`, accumulating with any block
    /// already stored there.
    pub fn add_block(&mut self, bi: usize, bj: usize, block: DenseMatrix<S>) -> Result<()> {
        if bi >= self.num_block_rows() || bj >= self.num_block_cols() {
            return Err(Error::Shape(format!(
                "block ({bi}, {bj}) outside the partition"
            )));
        }
        let expected = (self.row_range(bi).len(), self.col_range(bj).len());
        if block.shape() != expected {
            return Err(Error::Shape(format!(
                "block ({bi}, {bj}) has shape {:?}, partition expects {expected:?}",
                block.shape()
            )));
        }
        match self.blocks.get_mut(&(bi, bj)) {
            Some(b) => b.add_assign(&block)?,
            None => {
                self.blocks.insert((bi, bj), block);
            }
        }
        Ok(())
    }

    pub fn block(&self, bi: usize, bj: usize) -> Option<&DenseMatrix<S>> {
        self.blocks.get(&(bi, bj))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &DenseMatrix<S>)> {
        self.blocks.iter()
    }

    /// Stored blocks with at least one row and one column.
    pub fn num_nonzero_blocks(&self) -> usize {
        self.blocks
            .values()
            .filter(|b| b.rows() > 0 && b.cols() > 0)
            .count()
    }

    /// Structural nonzero count: sum of stored block sizes.
    pub fn structural_nnz(&self) -> usize {
        self.blocks.values().map(|b| b.rows() * b.cols()).sum()
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.blocks.keys().all(|(i, j)| i == j)
    }

    pub fn matvec(&self, x: &[S]) -> Result<Vec<S>> {
        let (rows, cols) = self.shape();
        if x.len() != cols {
            return Err(Error::Shape(format!(
                "vector of length {} for {cols} columns",
                x.len()
            )));
        }
        let mut y = vec![S::zero(); rows];
        for (&(bi, bj), b) in &self.blocks {
            let xr = &x[self.col_range(bj)];
            let yr = &mut y[self.row_offsets[bi]..self.row_offsets[bi + 1]];
            for (i, yi) in yr.iter_mut().enumerate() {
                *yi += b.row(i).iter().zip(xr).map(|(a, v)| *a * *v).sum();
            }
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let (rows, cols) = self.shape();
        let mut d = DenseMatrix::zeros(rows, cols);
        for (&(bi, bj), b) in &self.blocks {
            let (r0, c0) = (self.row_offsets[bi], self.col_offsets[bj]);
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    d[(r0 + i, c0 + j)] += b[(i, j)];
                }
            }
        }
        d
    }

    /// Entrywise conversion; only entries with `|a| < 1e-300` are dropped.
    pub fn to_csr(&self) -> CsrMatrix<S> {
        let (rows, cols) = self.shape();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for bi in 0..self.num_block_rows() {
            let in_row: Vec<(usize, &DenseMatrix<S>)> = self
                .blocks
                .range((bi, 0)..(bi + 1, 0))
                .map(|(&(_, bj), b)| (bj, b))
                .collect();
            for i in 0..self.row_range(bi).len() {
                for &(bj, b) in &in_row {
                    let c0 = self.col_offsets[bj];
                    for (j, v) in b.row(i).iter().enumerate() {
                        if v.abs() >= 1e-300 {
                            col_idx.push(c0 + j);
                            values.push(*v);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix::from_raw(rows, cols, row_ptr, col_idx, values)
            .expect("block iteration yields sorted columns")
    }
}

impl BlockSparseMatrix<f64> {
    pub fn lift<S: Scalar>(&self) -> BlockSparseMatrix<S> {
        BlockSparseMatrix {
            row_offsets: self.row_offsets.clone(),
            col_offsets: self.col_offsets.clone(),
            blocks: self.blocks.iter().map(|(k, b)| (*k, b.lift())).collect(),
        }
    }

    /// `T v` for a real (embedding) matrix and a vector over any field.
    pub fn apply<S: Scalar>(&self, v: &[S]) -> Result<Vec<S>> {
        let (rows, cols) = self.shape();
        if v.len() != cols {
            return Err(Error::Shape(format!(
                "vector of length {} for {cols} columns",
                v.len()
            )));
        }
        let mut out = vec![S::zero(); rows];
        for (&(bi, bj), b) in &self.blocks {
            let vr = &v[self.col_range(bj)];
            let r0 = self.row_offsets[bi];
            for i in 0..b.rows() {
                out[r0 + i] += b.row(i).iter().zip(vr).map(|(a, x)| x.scale(*a)).sum();
            }
        }
        Ok(out)
    }

    /// `Tᵀ v`.
    pub fn apply_transpose<S: Scalar>(&self, v: &[S]) -> Result<Vec<S>> {
        let (rows, cols) = self.shape();
        if v.len() != rows {
            return Err(Error::Shape(format!(
                "vector of length {} for {rows} rows",
                v.len()
            )));
        }
        let mut out = vec![S::zero(); cols];
        for (&(bi, bj), b) in &self.blocks {
            let r0 = self.row_offsets[bi];
            let c0 = self.col_offsets[bj];
            for i in 0..b.rows() {
                let vi = v[r0 + i];
                for (j, a) in b.row(i).iter().enumerate() {
                    out[c0 + j] += vi.scale(*a);
                }
            }
        }
        Ok(out)
    }
}

/// `Tᵀ A T` for block-diagonal real `T` whose row partition matches both
/// partitions of `A`. Block `(K, K')` of the result is `T_Kᵀ A_{KK'} T_{K'}`.
pub fn triple_product<S: Scalar>(
    t: &BlockSparseMatrix<f64>,
    a: &BlockSparseMatrix<S>,
) -> Result<BlockSparseMatrix<S>> {
    if !t.is_block_diagonal() {
        return Err(Error::Shape(
            "embedding matrix must be block diagonal".into(),
        ));
    }
    if t.row_offsets != a.row_offsets || t.row_offsets != a.col_offsets {
        return Err(Error::Shape(
            "embedding and system matrix partitions differ".into(),
        ));
    }
    let reduced = t.col_sizes();
    let mut out = BlockSparseMatrix::square(&reduced);
    let t_blocks: Vec<Option<DenseMatrix<S>>> = (0..t.num_block_rows())
        .map(|k| t.block(k, k).map(DenseMatrix::lift))
        .collect();
    for (&(bi, bj), ab) in a.blocks() {
        if reduced[bi] == 0 || reduced[bj] == 0 {
            continue;
        }
        let (Some(ti), Some(tj)) = (&t_blocks[bi], &t_blocks[bj]) else {
            continue;
        };
        let prod = ti.transpose().matmul(&ab.matmul(tj)?)?;
        out.add_block(bi, bj, prod)?;
    }
    Ok(out)
}
