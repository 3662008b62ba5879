//! Minimal dense real vector/matrix arithmetic shared by all modules.
//!
//! Values are 64-bit floats in row-major dense storage; everything is
//! immutable after construction and safe to share across threads.

use crate::error::{CoreError, Result};

/// Dense real vector. All entries are finite on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        for (index, &value) in data.iter().enumerate() {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { index, value });
            }
        }
        Ok(Self { data })
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Construct without the finiteness check. For values produced by closed
    /// arithmetic over already-validated inputs.
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { data }
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        check_len("vector add", self.len(), other.len())?;
        Ok(Vector::from_raw(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_len("vector sub", self.len(), other.len())?;
        Ok(Vector::from_raw(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector::from_raw(self.data.iter().map(|a| a * factor).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CoreError::Dimension {
                context: "matrix entry count",
                left: data.len(),
                right: rows * cols,
            });
        }
        for (index, &value) in data.iter().enumerate() {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { index, value });
            }
        }
        Ok(Self { data, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub(crate) fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

fn check_len(context: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(CoreError::Dimension {
            context,
            left,
            right,
        });
    }
    Ok(())
}

/// Inner product.
pub fn dot(a: &Vector, b: &Vector) -> Result<f64> {
    check_len("dot", a.len(), b.len())?;
    Ok(dot_slices(a.as_slice(), b.as_slice()))
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Euclidean norm.
pub fn norm2(a: &Vector) -> f64 {
    norm2_slice(a.as_slice())
}

pub(crate) fn norm2_slice(a: &[f64]) -> f64 {
    dot_slices(a, a).sqrt()
}

/// Sum of absolute values.
pub fn norm1(a: &Vector) -> f64 {
    a.as_slice().iter().map(|v| v.abs()).sum()
}

/// Matrix-vector product.
pub fn matvec(m: &Matrix, x: &Vector) -> Result<Vector> {
    check_len("matvec", m.cols(), x.len())?;
    let mut out = vec![0.0; m.rows()];
    for (r, entry) in out.iter_mut().enumerate() {
        *entry = dot_slices(m.row(r), x.as_slice());
    }
    Ok(Vector::from_raw(out))
}

/// Solve M x = b by Gaussian elimination with partial pivoting.
///
/// A pivot below `1e-12 * max|entry of M|` reports the system as singular.
pub fn solve_linear(m: &Matrix, b: &Vector) -> Result<Vector> {
    if m.rows() != m.cols() {
        return Err(CoreError::Dimension {
            context: "solve_linear square",
            left: m.rows(),
            right: m.cols(),
        });
    }
    check_len("solve_linear rhs", m.rows(), b.len())?;
    let n = m.rows();
    let threshold = 1e-12 * m.max_abs_entry();

    let mut a = m.clone();
    let mut rhs: Vec<f64> = b.as_slice().to_vec();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = a.get(col, col).abs();
        for r in (col + 1)..n {
            let cand = a.get(r, col).abs();
            if cand > pivot_abs {
                pivot_abs = cand;
                pivot_row = r;
            }
        }
        if pivot_abs < threshold || pivot_abs == 0.0 {
            return Err(CoreError::Singular {
                column: col,
                pivot: pivot_abs,
                threshold,
            });
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = a.get(col, c);
                a.set(col, c, a.get(pivot_row, c));
                a.set(pivot_row, c, tmp);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = a.get(col, col);
        for r in (col + 1)..n {
            let factor = a.get(r, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a.set(r, c, a.get(r, c) - factor * a.get(col, c));
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for c in (col + 1)..n {
            acc -= a.get(col, c) * x[c];
        }
        x[col] = acc / a.get(col, col);
    }
    Vector::new(x)
}
