use crate::error::{Error, Result};

/// Dense n x s matrix, column-major. Holds iterate blocks, orthonormal
/// bases and window assemblies; columns are contiguous slices.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    n: usize,
    s: usize,
    data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(n: usize, s: usize) -> Result<Self> {
        if n == 0 || s == 0 {
            return Err(Error::InvalidParameters {
                msg: format!("block dimensions must be positive, got {n} x {s}"),
            });
        }
        Ok(DenseBlock { n, s, data: vec![0.0; n * s] })
    }

    /// Builds a block from column slices; all columns must share a length
    /// and every entry must be finite.
    pub fn from_columns(cols: &[&[f64]]) -> Result<Self> {
        if cols.is_empty() || cols[0].is_empty() {
            return Err(Error::InvalidParameters { msg: "empty column set".into() });
        }
        let n = cols[0].len();
        let mut data = Vec::with_capacity(n * cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("column length {n}"),
                    got: format!("{} in column {j}", c.len()),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBreakdown {
                    detail: format!("non-finite entry in column {j}"),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(DenseBlock { n, s: cols.len(), data })
    }

    pub fn from_vec(n: usize, s: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * s || n == 0 || s == 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} x {s} = {} entries", n * s),
                got: format!("{}", data.len()),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown { detail: "non-finite entry".into() });
        }
        Ok(DenseBlock { n, s, data })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Horizontal concatenation, left to right.
    pub fn hcat(blocks: &[&DenseBlock]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameters { msg: "nothing to concatenate".into() });
        }
        let n = blocks[0].n;
        let mut cols: Vec<&[f64]> = Vec::new();
        for b in blocks {
            if b.n != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n} rows"),
                    got: format!("{} rows", b.n),
                });
            }
            for j in 0..b.s {
                cols.push(b.column(j));
            }
        }
        DenseBlock::from_columns(&cols)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_major_layout() {
        let b = DenseBlock::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(b.get(0, 0), 1.0);
        assert_eq!(b.get(1, 0), 2.0);
        assert_eq!(b.get(0, 1), 3.0);
        assert_eq!(b.column(1), &[3.0, 4.0]);
    }

    #[test]
    fn from_columns_checks_lengths() {
        let err = DenseBlock::from_columns(&[&[1.0, 2.0], &[1.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(DenseBlock::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseBlock::from_columns(&[&[f64::INFINITY]]).is_err());
    }

    #[test]
    fn rejects_empty() {
        assert!(DenseBlock::zeros(0, 1).is_err());
        assert!(DenseBlock::zeros(1, 0).is_err());
    }

    #[test]
    fn hcat_concatenates_in_order() {
        let a = DenseBlock::from_vec(2, 1, vec![1.0, 2.0]).unwrap();
        let b = DenseBlock::from_vec(2, 2, vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = DenseBlock::hcat(&[&a, &b]).unwrap();
        assert_eq!(w.cols(), 3);
        assert_eq!(w.column(0), &[1.0, 2.0]);
        assert_eq!(w.column(2), &[5.0, 6.0]);
    }
}
