//! Small dense matrices in column-major layout, with the kernels the
//! solvers need: multiplication, LU solves, triangular solves and the
//! scaling-and-squaring matrix exponential.

use crate::error::{Error, Result};

/// A dense real matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from a slice of columns, all of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            m.data[j * rows..(j + 1) * rows].copy_from_slice(c);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copy of the `rows x cols` block starting at (`r0`, `c0`).
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                b.set(i, j, self.get(r0 + i, c0 + j));
            }
        }
        b
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &DenseMatrix) {
        for j in 0..b.cols {
            for i in 0..b.rows {
                self.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, a: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    /// self + a * other
    pub fn add_scaled(&self, a: f64, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x + a * y)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = out.col_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj == 0.0 {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for i in 0..self.rows {
                    ocol[i] += acol[i] * bkj;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mat_vec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0.0 {
                continue;
            }
            let acol = self.col(k);
            for i in 0..self.rows {
                out[i] += acol[i] * vk;
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Solve `self * X = rhs` by LU factorization with partial pivoting.
    pub fn lu_solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.rows;
        if self.cols != n {
            return Err(Error::DimensionMismatch {
                context: "lu_solve: matrix must be square",
                expected: n,
                got: self.cols,
            });
        }
        if rhs.rows != n {
            return Err(Error::DimensionMismatch {
                context: "lu_solve: rhs rows",
                expected: n,
                got: rhs.rows,
            });
        }
        let mut lu = self.clone();
        let mut x = rhs.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut pmax = lu.get(k, k).abs();
            for i in (k + 1)..n {
                let v = lu.get(i, k).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(Error::SingularBlock { context: "lu_solve" });
            }
            if p != k {
                piv.swap(p, k);
                for j in 0..n {
                    let a = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, a);
                }
                for j in 0..x.cols {
                    let a = x.get(k, j);
                    x.set(k, j, x.get(p, j));
                    x.set(p, j, a);
                }
            }
            let pivot = lu.get(k, k);
            for i in (k + 1)..n {
                let f = lu.get(i, k) / pivot;
                lu.set(i, k, f);
                for j in (k + 1)..n {
                    let v = lu.get(i, j) - f * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        // forward substitution with unit lower factor
        for j in 0..x.cols {
            for i in 1..n {
                let mut s = x.get(i, j);
                for k in 0..i {
                    s -= lu.get(i, k) * x.get(k, j);
                }
                x.set(i, j, s);
            }
            for i in (0..n).rev() {
                let mut s = x.get(i, j);
                for k in (i + 1)..n {
                    s -= lu.get(i, k) * x.get(k, j);
                }
                x.set(i, j, s / lu.get(i, i));
            }
        }
        if !x.is_finite() {
            return Err(Error::NonFinite { context: "lu_solve" });
        }
        Ok(x)
    }

    /// Solve `R * x = b` for upper triangular `self`.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.rows;
        assert_eq!(self.cols, n);
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.get(i, k) * x[k];
            }
            let d = self.get(i, i);
            if d == 0.0 || !d.is_finite() {
                return Err(Error::SingularBlock {
                    context: "solve_upper",
                });
            }
            x[i] /= d;
        }
        Ok(x)
    }

    /// Solve `X * R = B` for upper triangular `R = self`, i.e. right-divide.
    pub fn right_solve_upper(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.rows;
        assert_eq!(self.cols, n);
        assert_eq!(b.cols, n);
        let mut x = b.clone();
        // column j of X depends on earlier columns: X[:,j] = (B[:,j] - sum_{k<j} X[:,k] R[k,j]) / R[j,j]
        for j in 0..n {
            for k in 0..j {
                let rkj = self.get(k, j);
                if rkj != 0.0 {
                    for i in 0..x.rows {
                        let v = x.get(i, j) - rkj * x.get(i, k);
                        x.set(i, j, v);
                    }
                }
            }
            let d = self.get(j, j);
            if d == 0.0 || !d.is_finite() {
                return Err(Error::SingularBlock {
                    context: "right_solve_upper",
                });
            }
            for i in 0..x.rows {
                let v = x.get(i, j) / d;
                x.set(i, j, v);
            }
        }
        Ok(x)
    }
}

// Pade(13) numerator coefficients for the matrix exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the degree-13 approximant meets double precision.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling-and-squaring with a diagonal Pade(13)
/// approximant and 1-norm based scaling.
pub fn dense_expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "dense_expm: matrix must be square",
            expected: n,
            got: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite {
            context: "dense_expm input",
        });
    }
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }

    let norm = m.norm_1();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(1.0 / f64::powi(2.0, squarings as i32));

    let eye = DenseMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    // u = A * ((A6*(b13*A6 + b11*A4 + b9*A2)) + b7*A6 + b5*A4 + b3*A2 + b1*I)
    let w1 = a6
        .scale(PADE13[13])
        .add_scaled(PADE13[11], &a4)
        .add_scaled(PADE13[9], &a2);
    let w = a6
        .matmul(&w1)
        .add_scaled(PADE13[7], &a6)
        .add_scaled(PADE13[5], &a4)
        .add_scaled(PADE13[3], &a2)
        .add_scaled(PADE13[1], &eye);
    let u = a.matmul(&w);

    // v = A6*(b12*A6 + b10*A4 + b8*A2) + b6*A6 + b4*A4 + b2*A2 + b0*I
    let z1 = a6
        .scale(PADE13[12])
        .add_scaled(PADE13[10], &a4)
        .add_scaled(PADE13[8], &a2);
    let v = a6
        .matmul(&z1)
        .add_scaled(PADE13[6], &a6)
        .add_scaled(PADE13[4], &a4)
        .add_scaled(PADE13[2], &a2)
        .add_scaled(PADE13[0], &eye);

    // (v - u) X = (v + u)
    let num = v.add_scaled(1.0, &u);
    let den = v.add_scaled(-1.0, &u);
    let mut x = den.lu_solve(&num)?;

    for _ in 0..squarings {
        x = x.matmul(&x);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite {
            context: "dense_expm result",
        });
    }
    Ok(x)
}
