//! Matrices of truncated series and the Schur complement `D - C A^{-1} B`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::series::{Scalar, TruncatedSeries, ZERO_RTOL};

/// Row-major matrix whose entries share one center and order.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    center: Vec<Scalar>,
    order: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        center: Vec<Scalar>,
        order: usize,
        entries: Vec<TruncatedSeries>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        let mut entries = entries;
        for e in &mut entries {
            if e.center() != center.as_slice() {
                return Err(Error::CenterMismatch);
            }
            if e.order() != order {
                *e = e.truncate(order.min(e.order()));
            }
        }
        let order = entries
            .iter()
            .map(TruncatedSeries::order)
            .min()
            .unwrap_or(order);
        let entries = entries.into_iter().map(|e| e.truncate(order)).collect();
        Ok(SeriesMatrix {
            rows,
            cols,
            center,
            order,
            entries,
        })
    }

    /// Constant series matrix with the values of `m`.
    pub fn from_constant(m: &DMatrix<Scalar>, center: Vec<Scalar>, order: usize) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| TruncatedSeries::constant(center.clone(), order, m[(i, j)]))
            .collect();
        SeriesMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            center,
            order,
            entries,
        }
    }

    fn zeros(rows: usize, cols: usize, center: Vec<Scalar>, order: usize) -> Self {
        let entries = vec![TruncatedSeries::zero(center.clone(), order); rows * cols];
        SeriesMatrix {
            rows,
            cols,
            center,
            order,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> &[Scalar] {
        &self.center
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<TruncatedSeries> {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn evaluate(&self, x: &[Scalar]) -> DMatrix<Scalar> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).evaluate(x))
    }

    /// Constant coefficients, i.e. the value at the center.
    pub fn constant_part(&self) -> DMatrix<Scalar> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).constant_term())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SeriesMatrix {
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        SeriesMatrix {
            rows: rows.len(),
            cols: cols.len(),
            center: self.center.clone(),
            order: self.order,
            entries,
        }
    }

    pub fn truncate(&self, order: usize) -> SeriesMatrix {
        SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            center: self.center.clone(),
            order,
            entries: self.entries.iter().map(|e| e.truncate(order)).collect(),
        }
    }

    /// Product truncated at `order`.
    pub fn mul(&self, other: &SeriesMatrix, order: usize) -> Result<SeriesMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let lhs = self.truncate(order);
        let rhs = other.truncate(order);
        let mut out = Self::zeros(self.rows, other.cols, self.center.clone(), order);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = TruncatedSeries::zero(self.center.clone(), order);
                for k in 0..self.cols {
                    acc = acc.checked_add(&lhs.get(i, k).checked_mul(rhs.get(k, j))?)?;
                }
                out.entries[i * other.cols + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            center: self.center.clone(),
            order: self.order.min(other.order),
            entries,
        })
    }

    /// Series inverse of a square matrix whose value at the center is invertible:
    /// `A^{-1} = sum_{k=0}^{order} (-A0^{-1} H)^k A0^{-1}` with `A = A0 + H`.
    pub fn inverse(&self, order: usize) -> Result<SeriesMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let a0 = self.constant_part();
        let a0_inv = checked_inverse(&a0)?;
        let order = order.min(self.order);
        let a0_series = Self::from_constant(&a0, self.center.clone(), order);
        let h = self.truncate(order).sub(&a0_series)?;
        let inv0 = Self::from_constant(&a0_inv, self.center.clone(), order);
        let minus_inv0 = Self::from_constant(&(-a0_inv.clone()), self.center.clone(), order);
        let step = minus_inv0.mul(&h, order)?;
        let identity = Self::from_constant(
            &DMatrix::identity(self.rows, self.rows),
            self.center.clone(),
            order,
        );
        let mut sum = identity.clone();
        let mut power = identity;
        for _ in 0..order {
            power = power.mul(&step, order)?;
            sum = sum.add(&power)?;
        }
        sum.mul(&inv0, order)
    }

    fn add(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            center: self.center.clone(),
            order: self.order.min(other.order),
            entries,
        })
    }
}

/// Inverse of a constant square matrix, refusing numerically singular input
/// (smallest singular value at most `ZERO_RTOL` times the largest).
pub(crate) fn checked_inverse(a: &DMatrix<Scalar>) -> Result<DMatrix<Scalar>> {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    // negated so that NaN is rejected
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(min > ZERO_RTOL * max) {
        return Err(Error::SingularPivot(format!(
            "pivot block has singular values in [{min:e}, {max:e}]"
        )));
    }
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularPivot("pivot block is not invertible".into()))
}

/// Schur complement `D - C A^{-1} B` of `m` with respect to the pivot block
/// `A = m[row_idx, col_idx]`, truncated at `order`. `B`, `C`, `D` keep the
/// remaining rows and columns in their original order.
pub fn schur_complement(
    m: &SeriesMatrix,
    row_idx: &[usize],
    col_idx: &[usize],
    order: usize,
) -> Result<SeriesMatrix> {
    if row_idx.len() != col_idx.len() || row_idx.is_empty() {
        return Err(Error::Domain(format!(
            "pivot block must be square and nonempty, got {}x{}",
            row_idx.len(),
            col_idx.len()
        )));
    }
    if row_idx.iter().any(|&i| i >= m.rows()) || col_idx.iter().any(|&j| j >= m.cols()) {
        return Err(Error::Domain("pivot index out of range".into()));
    }
    let other_rows: Vec<usize> = (0..m.rows()).filter(|i| !row_idx.contains(i)).collect();
    let other_cols: Vec<usize> = (0..m.cols()).filter(|j| !col_idx.contains(j)).collect();
    let order = order.min(m.order());

    let a = m.select(row_idx, col_idx);
    let a_inv = a.inverse(order)?;
    let b = m.select(row_idx, &other_cols).truncate(order);
    let c = m.select(&other_rows, col_idx).truncate(order);
    let d = m.select(&other_rows, &other_cols).truncate(order);
    if d.is_empty() {
        return Ok(d);
    }
    let cab = c.mul(&a_inv, order)?.mul(&b, order)?;
    d.sub(&cab)
}
