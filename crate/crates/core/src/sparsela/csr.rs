use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<S = f64> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> CsrMatrix<S> {
    pub fn from_raw(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<S>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 || row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len()
        {
            return Err(Error::Shape("inconsistent row pointer".into()));
        }
        if col_idx.len() != values.len() {
            return Err(Error::Shape(
                "column index and value arrays differ in length".into(),
            ));
        }
        for i in 0..rows {
            let cols_i = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols_i.windows(2).any(|w| w[0] >= w[1]) || cols_i.iter().any(|&c| c >= cols) {
                return Err(Error::Shape(format!(
                    "row {i} has unsorted or out-of-range columns"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_dense(m: &DenseMatrix<S>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.rows() {
            for (j, v) in m.row(i).iter().enumerate() {
                if v.abs() >= 1e-300 {
                    col_idx.push(j);
                    values.push(*v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[S]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        let (c, v) = self.row(i);
        c.binary_search(&j).map_or(S::zero(), |k| v[k])
    }

    pub fn matvec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(j, a)| *a * x[*j]).sum()
            })
            .collect())
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                d[(i, *j)] = *a;
            }
        }
        d
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Dense copy of the square sub-block on `range × range`.
    pub fn principal_block(&self, range: std::ops::Range<usize>) -> DenseMatrix<S> {
        let n = range.len();
        let mut d = DenseMatrix::zeros(n, n);
        for (li, i) in range.clone().enumerate() {
            let (c, v) = self.row(i);
            let lo = c.partition_point(|&j| j < range.start);
            for (j, a) in c[lo..].iter().zip(&v[lo..]) {
                if *j >= range.end {
                    break;
                }
                d[(li, j - range.start)] = *a;
            }
        }
        d
    }
}
