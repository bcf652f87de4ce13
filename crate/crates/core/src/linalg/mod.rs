//! Dense exact matrices over any [`FieldSpec`], plus a float eigensolver.

mod eigen;
mod index_set;

use std::fmt;

use nalgebra::DMatrix;

pub use eigen::{sym_eigs, DEFAULT_EIG_TOL};
pub use index_set::IndexSet;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// Row-major dense matrix. Every entry belongs to `field`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Structure(format!(
                "{rows}×{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| x.field() != field) {
            return Err(Error::FieldMismatch {
                left: field,
                right: bad.field(),
            });
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    /// `cols` is only consulted when there are no rows.
    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<FieldElement>>, cols: usize) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(cols, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Structure("ragged matrix rows".into()));
        }
        Matrix::new(field, n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    /// Integer literals interpreted in `field`.
    pub fn from_ints<R: AsRef<[i64]>>(field: FieldSpec, rows: &[R]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Matrix::from_rows(field, rows, 0)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) -> Result<()> {
        if r >= self.rows || c >= self.cols {
            return Err(Error::Structure(format!("index ({r}, {c}) out of bounds")));
        }
        if v.field() != self.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: v.field(),
            });
        }
        self.data[r * self.cols + c] = v;
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElement>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElement::is_zero)
    }

    /// Indices of the nonzero entries of row `r`.
    pub fn row_support(&self, r: usize) -> IndexSet {
        IndexSet::from_sorted_unchecked(
            self.row(r)
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// Indices of the nonzero entries of column `c`.
    pub fn col_support(&self, c: usize) -> IndexSet {
        IndexSet::from_sorted_unchecked((0..self.rows).filter(|&r| !self.get(r, c).is_zero()).collect())
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    fn check_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::Structure(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = &out.data[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(&FieldElement, &FieldElement) -> FieldElement) -> Result<Matrix> {
        self.check_same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Structure(format!(
                "shape mismatch {}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(self.with_data(data))
    }

    fn with_data(&self, data: Vec<FieldElement>) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> Matrix {
        self.with_data(self.data.iter().map(|x| -x).collect())
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::Structure(format!(
                "cannot place {} rows beside {} rows",
                other.rows, self.rows
            )));
        }
        let rows = (0..self.rows)
            .map(|r| self.row(r).iter().chain(other.row(r)).cloned().collect())
            .collect();
        Matrix::from_rows(self.field, rows, self.cols + other.cols)
    }

    /// `[self; other]`.
    pub fn vcat(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::Structure(format!(
                "cannot stack {} columns under {} columns",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix::new(self.field, self.rows + other.rows, self.cols, data)
    }

    pub fn select_rows(&self, idx: &IndexSet) -> Result<Matrix> {
        idx.check_bound(self.rows)?;
        let data = idx.iter().flat_map(|r| self.row(r).iter().cloned()).collect();
        Matrix::new(self.field, idx.len(), self.cols, data)
    }

    pub fn select_cols(&self, idx: &IndexSet) -> Result<Matrix> {
        idx.check_bound(self.cols)?;
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for r in 0..self.rows {
            data.extend(idx.iter().map(|c| self.get(r, c).clone()));
        }
        Matrix::new(self.field, self.rows, idx.len(), data)
    }

    pub fn delete_cols(&self, idx: &IndexSet) -> Result<Matrix> {
        idx.check_bound(self.cols)?;
        self.select_cols(&idx.complement(self.cols))
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    /// Pivots are chosen leftmost-first, so the result is canonical.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for c in col..m.cols {
                let idx = row * m.cols + c;
                m.data[idx] = &m.data[idx] * &inv;
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let delta = &factor * m.get(row, c);
                    let idx = r * m.cols + c;
                    m.data[idx] = &m.data[idx] - &delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Columns form a basis of the right null space; shape `cols × (cols − rank)`.
    /// One basis vector per free column of the RREF, with a 1 in that column.
    pub fn null_space_basis(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(self.field, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            basis.data[fc * basis.cols + j] = self.field.one();
            for (i, &pc) in pivots.iter().enumerate() {
                basis.data[pc * basis.cols + j] = -r.get(i, fc);
            }
        }
        basis
    }

    /// Whether the column spans of `self` and `other` coincide.
    pub fn same_column_span(&self, other: &Matrix) -> Result<bool> {
        if self.rows != other.rows {
            return Ok(false);
        }
        let joint = self.hcat(other)?.rank();
        Ok(joint == self.rank() && joint == other.rank())
    }

    /// Float copy of a real matrix.
    pub fn to_dmatrix(&self) -> Result<DMatrix<f64>> {
        if !self.field.is_real() {
            return Err(Error::InvalidArgument(format!(
                "float conversion needs a real matrix, got {}",
                self.field
            )));
        }
        Ok(DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).to_f64()))
    }

    /// Residues of a GF(p) matrix, row-major.
    pub fn to_residues(&self) -> Result<Vec<Vec<u64>>> {
        if self.field.modulus().is_none() {
            return Err(Error::InvalidArgument("residues need a prime-field matrix".into()));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().map(|x| x.residue().unwrap()).collect())
            .collect())
    }

    /// Re-expresses every entry in another field (see [`FieldSpec::convert`]).
    pub fn convert(&self, field: FieldSpec) -> Result<Matrix> {
        let data = self.data.iter().map(|x| field.convert(x)).collect::<Result<_>>()?;
        Matrix::new(field, self.rows, self.cols, data)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
