//! Row-major matrices: [`ParamMatrix`] for shared trainable parameters and
//! [`DenseMatrix`] / [`SparseMatrix`] for feature tables.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Trainable parameter matrix that tolerates concurrent lock-free updates.
pub struct ParamMatrix<F: Scalar> {
    rows: usize,
    cols: usize,
    cells: Box<[F::Cell]>,
}

impl<F: Scalar> ParamMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| F::zero())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                cells.push(F::new_cell(f(r, c)));
            }
        }
        ParamMatrix {
            rows,
            cols,
            cells: cells.into_boxed_slice(),
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<F>) -> Self {
        assert_eq!(values.len(), rows * cols, "matrix payload length");
        ParamMatrix {
            rows,
            cols,
            cells: values.into_iter().map(F::new_cell).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> F {
        F::load(&self.cells[row * self.cols + col])
    }

    #[inline]
    pub fn set(&self, row: usize, col: usize, value: F) {
        F::store(&self.cells[row * self.cols + col], value)
    }

    pub fn row(&self, row: usize) -> Vec<F> {
        self.row_cells(row).iter().map(F::load).collect()
    }

    /// Copies a row into an `f64` buffer of length `cols`.
    #[inline]
    pub fn read_row(&self, row: usize, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.row_cells(row)) {
            *o = F::load(c).widen();
        }
    }

    /// `row -= lr * grad`, refusing to store a non-finite entry.
    #[inline]
    pub fn descend_row(&self, row: usize, grad: &[f64], lr: f64) -> Result<()> {
        for (cell, &g) in self.row_cells(row).iter().zip(grad) {
            let next = F::cast(F::load(cell).widen() - lr * g);
            if !next.is_finite() {
                return Err(Error::NonFiniteUpdate);
            }
            F::store(cell, next);
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<F> {
        self.cells.iter().map(F::load).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.cells.iter().all(|c| F::load(c).is_finite())
    }

    #[inline]
    fn row_cells(&self, row: usize) -> &[F::Cell] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }
}

impl<F: Scalar> Clone for ParamMatrix<F> {
    fn clone(&self) -> Self {
        ParamMatrix::from_vec(self.rows, self.cols, self.to_vec())
    }
}

impl<F: Scalar> fmt::Debug for ParamMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamMatrix({}x{})", self.rows, self.cols)
    }
}

/// Plain owned row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Stacks equal-length rows; an empty list gives a `0 x 0` matrix.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<F> {
        self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[F]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Keeps only the listed rows, in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(F) -> F) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Sparse rows of `(column, value)` pairs sorted by column.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }
}

/// Sparse dot product of two column-sorted rows.
pub(crate) fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// `a - b` for column-sorted sparse rows.
pub(crate) fn sparse_sub(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, -b[j].1));
            j += 1;
        } else {
            let d = a[i].1 - b[j].1;
            if d != 0.0 {
                out.push((a[i].0, d));
            }
            i += 1;
            j += 1;
        }
    }
    out
}
