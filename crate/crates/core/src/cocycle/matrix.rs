//! Small dense integer matrices with overflow-checked arithmetic.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("integer overflow in matrix arithmetic")]
    Overflow,
    #[error("determinant {0} is not ±1")]
    NotUnimodular(i64),
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(MatrixError::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(IntMatrix { n, data })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    /// Standard alternating form on paired coordinates: `J(e_{2i}) = -e_{2i+1}`,
    /// i.e. blocks `[[0, 1], [-1, 0]]` down the diagonal.
    pub fn standard_j(k: usize) -> Self {
        let mut m = Self::zeros(2 * k);
        for i in 0..k {
            m.set(2 * i, 2 * i + 1, 1);
            m.set(2 * i + 1, 2 * i, -1);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: i64 = 0;
                for k in 0..n {
                    let p = self.get(i, k).checked_mul(other.get(k, j)).ok_or(MatrixError::Overflow)?;
                    acc = acc.checked_add(p).ok_or(MatrixError::Overflow)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `self ⊕ other` as a block-diagonal matrix.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut out = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                out.set(self.n + i, self.n + j, other.get(i, j));
            }
        }
        out
    }

    /// The leading `size×size` block.
    pub fn leading_block(&self, size: usize) -> Self {
        let mut out = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Fraction-free (Bareiss) elimination; exact for integer input.
    pub fn det(&self) -> Result<i64> {
        let n = self.n;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[i * n + j]
                        .checked_mul(a[k * n + k])
                        .and_then(|x| x.checked_sub(a[i * n + k].checked_mul(a[k * n + j])?))
                        .ok_or(MatrixError::Overflow)?;
                    a[i * n + j] = v / prev;
                }
            }
            prev = a[k * n + k];
        }
        i64::try_from(sign * a[n * n - 1]).map_err(|_| MatrixError::Overflow)
    }

    /// Inverse of a matrix with determinant ±1, via the adjugate computed by
    /// unimodular row reduction.
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let det = self.det()?;
        if det.abs() != 1 {
            return Err(MatrixError::NotUnimodular(det));
        }
        let n = self.n;
        // Integer Gauss-Jordan using Euclidean row steps keeps everything in ℤ.
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|i| {
                let mut row: Vec<i128> = (0..n).map(|j| self.get(i, j) as i128).collect();
                row.extend((0..n).map(|j| i128::from(i == j)));
                row
            })
            .collect();
        for col in 0..n {
            // Euclid on column `col` among rows col..n until one nonzero remains.
            loop {
                let nonzero: Vec<usize> = (col..n).filter(|&r| a[r][col] != 0).collect();
                if nonzero.len() <= 1 {
                    if let Some(&r) = nonzero.first() {
                        a.swap(col, r);
                    }
                    break;
                }
                let pivot = *nonzero
                    .iter()
                    .min_by_key(|&&r| a[r][col].abs())
                    .expect("nonempty");
                for &r in &nonzero {
                    if r == pivot {
                        continue;
                    }
                    let q = a[r][col].div_euclid(a[pivot][col]);
                    for c in 0..2 * n {
                        a[r][c] = a[r][c]
                            .checked_sub(q.checked_mul(a[pivot][c]).ok_or(MatrixError::Overflow)?)
                            .ok_or(MatrixError::Overflow)?;
                    }
                }
            }
            let p = a[col][col];
            debug_assert!(p.abs() == 1);
            if p == -1 {
                for c in 0..2 * n {
                    a[col][c] = -a[col][c];
                }
            }
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let q = a[r][col];
                    for c in 0..2 * n {
                        a[r][c] = a[r][c]
                            .checked_sub(q.checked_mul(a[col][c]).ok_or(MatrixError::Overflow)?)
                            .ok_or(MatrixError::Overflow)?;
                    }
                }
            }
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, i64::try_from(a[i][n + j]).map_err(|_| MatrixError::Overflow)?);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(i64::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        IntMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
