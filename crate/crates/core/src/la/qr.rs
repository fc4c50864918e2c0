//! Incrementally maintained thin QR decomposition.
//!
//! Columns are appended one at a time with modified Gram-Schmidt and a
//! full second orthogonalization sweep. Two sweeps are always performed:
//! the sketched basis matrices this is used on are ill-conditioned by
//! construction, and a single sweep loses orthogonality there.

use crate::counters::Counters;
use crate::error::{Error, Result};
use crate::la::dense::DenseMatrix;

/// Thin QR factorization `M = Q R` of a tall matrix, extended column by
/// column. `Q` has orthonormal columns, `R` is upper triangular with a
/// nonnegative diagonal.
#[derive(Debug, Clone)]
pub struct ThinQr {
    nrows: usize,
    q_cols: Vec<Vec<f64>>,
    /// Column j of R, length j+1.
    r_cols: Vec<Vec<f64>>,
}

impl ThinQr {
    pub fn new(nrows: usize) -> Self {
        Self {
            nrows,
            q_cols: Vec::new(),
            r_cols: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.q_cols.len()
    }

    pub fn q_col(&self, j: usize) -> &[f64] {
        &self.q_cols[j]
    }

    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.r_cols[j][i]
        } else {
            0.0
        }
    }

    /// Append one column of data; extends Q and R by one column.
    ///
    /// The new diagonal entry of R falls below
    /// `nrows * eps * ||column||` when the column is numerically in the
    /// span of the existing ones, which is reported as rank deficiency.
    pub fn append_col(&mut self, column: &[f64], counters: &mut Counters) -> Result<()> {
        if column.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                context: "ThinQr::append_col",
                expected: self.nrows,
                got: column.len(),
            });
        }
        let d = self.q_cols.len();
        if d >= self.nrows {
            return Err(Error::RankDeficient { column: d });
        }
        let mut z = column.to_vec();
        let input_norm = norm(&z);
        counters.sprods += 1;
        let mut r_new = vec![0.0; d + 1];
        for _sweep in 0..2 {
            for (i, q) in self.q_cols.iter().enumerate() {
                let c = dot(q, &z);
                counters.sprods += 1;
                r_new[i] += c;
                axpy(-c, q, &mut z);
            }
        }
        let nz = norm(&z);
        counters.sprods += 1;
        if nz <= self.nrows as f64 * f64::EPSILON * input_norm {
            return Err(Error::RankDeficient { column: d });
        }
        r_new[d] = nz;
        for v in z.iter_mut() {
            *v /= nz;
        }
        self.q_cols.push(z);
        self.r_cols.push(r_new);
        Ok(())
    }

    /// Append a block of columns left to right.
    pub fn append_block(&mut self, cols: &[Vec<f64>], counters: &mut Counters) -> Result<()> {
        for c in cols {
            self.append_col(c, counters)?;
        }
        Ok(())
    }

    /// Dense copy of the leading `d x d` part of R.
    pub fn r_dense(&self, d: usize) -> DenseMatrix {
        let mut r = DenseMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..=j {
                r.set(i, j, self.r_cols[j][i]);
            }
        }
        r
    }

    /// The `rows x cols` block of R starting at (`r0`, `c0`).
    pub fn r_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                b.set(i, j, self.r_entry(r0 + i, c0 + j));
            }
        }
        b
    }

    /// `Q_d^T v` using only the first `d` columns of Q.
    pub fn qt_times(&self, d: usize, v: &[f64], counters: &mut Counters) -> Vec<f64> {
        assert!(d <= self.q_cols.len());
        counters.sprods += d as u64;
        self.q_cols[..d].iter().map(|q| dot(q, v)).collect()
    }

    /// Solve `R_d x = b` with the leading `d x d` part of R.
    pub fn solve_r(&self, d: usize, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), d);
        let mut x = b.to_vec();
        for i in (0..d).rev() {
            for k in (i + 1)..d {
                x[i] -= self.r_cols[k][i] * x[k];
            }
            let diag = self.r_cols[i][i];
            if diag == 0.0 || !diag.is_finite() {
                return Err(Error::SingularBlock { context: "ThinQr::solve_r" });
            }
            x[i] /= diag;
        }
        Ok(x)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
