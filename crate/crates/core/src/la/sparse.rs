//! Sparse operators: compressed-sparse-row matrices and opaque
//! matrix-free closures, behind one apply interface.

use std::sync::{Arc, OnceLock};

use crate::counters::Counters;
use crate::error::{Error, Result};
use crate::la::dense::DenseMatrix;

enum OpKind {
    Csr {
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    },
    MatFree {
        apply: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    },
}

/// A linear operator on R^n, applied to vectors one at a time.
///
/// Cloning is cheap: the storage is shared and read-only, so one operator
/// can back several concurrent solves.
#[derive(Clone)]
pub struct SparseOperator {
    n: usize,
    nnz: usize,
    kind: Arc<OpKind>,
    norm1: Arc<OnceLock<f64>>,
}

impl std::fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self.kind {
            OpKind::Csr { .. } => write!(f, "SparseOperator(csr, n={}, nnz={})", self.n, self.nnz),
            OpKind::MatFree { .. } => write!(f, "SparseOperator(matrix-free, n={})", self.n),
        }
    }
}

impl SparseOperator {
    /// Build from raw CSR arrays. Column indices must be in range and
    /// strictly ascending within each row.
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                context: "from_csr: row_ptr length",
                expected: n + 1,
                got: row_ptr.len(),
            });
        }
        if col_idx.len() != vals.len() || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::DimensionMismatch {
                context: "from_csr: nnz arrays",
                expected: *row_ptr.last().unwrap(),
                got: col_idx.len(),
            });
        }
        for i in 0..n {
            let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &j) in row.iter().enumerate() {
                if j >= n {
                    return Err(Error::DimensionMismatch {
                        context: "from_csr: column index out of range",
                        expected: n,
                        got: j,
                    });
                }
                if k > 0 && row[k - 1] >= j {
                    return Err(Error::InvalidConfig(format!(
                        "from_csr: columns not strictly ascending in row {i}"
                    )));
                }
            }
        }
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "from_csr values" });
        }
        let nnz = vals.len();
        Ok(Self {
            n,
            nnz,
            kind: Arc::new(OpKind::Csr {
                row_ptr,
                col_idx,
                vals,
            }),
            norm1: Arc::new(OnceLock::new()),
        })
    }

    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    context: "from_triplets: index out of range",
                    expected: n,
                    got: i.max(j),
                });
            }
        }
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        entries.dedup_by(|a, b| {
            if a.0 == b.0 && a.1 == b.1 {
                b.2 += a.2;
                true
            } else {
                false
            }
        });
        let mut row_ptr = vec![0usize; n + 1];
        for e in &entries {
            row_ptr[e.0 + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.iter().map(|e| e.1).collect();
        let vals = entries.iter().map(|e| e.2).collect();
        Self::from_csr(n, row_ptr, col_idx, vals)
    }

    /// Wrap a matrix-free apply closure.
    pub fn from_apply<F>(n: usize, apply: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            n,
            nnz: 0,
            kind: Arc::new(OpKind::MatFree {
                apply: Box::new(apply),
            }),
            norm1: Arc::new(OnceLock::new()),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_csr(n, (0..=n).collect(), (0..n).collect(), vec![1.0; n]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored nonzero count; zero for matrix-free operators.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(*self.kind, OpKind::MatFree { .. })
    }

    /// Apply to a vector, writing into `out`. Counts one mvec.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64], counters: &mut Counters) -> Result<()> {
        if v.len() != self.n || out.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "SparseOperator::apply",
                expected: self.n,
                got: v.len().min(out.len()),
            });
        }
        counters.mvecs += 1;
        match &*self.kind {
            OpKind::Csr {
                row_ptr,
                col_idx,
                vals,
            } => {
                for i in 0..self.n {
                    let mut s = 0.0;
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        s += vals[k] * v[col_idx[k]];
                    }
                    out[i] = s;
                }
            }
            OpKind::MatFree { apply } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                apply(v, out);
            }
        }
        Ok(())
    }

    pub fn apply(&self, v: &[f64], counters: &mut Counters) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.apply_into(v, &mut out, counters)?;
        Ok(out)
    }

    /// Exact 1-norm for CSR storage; for matrix-free operators, a probe
    /// estimate from a few fixed sign vectors. Used only to scale
    /// breakdown tolerances.
    pub fn norm1_est(&self) -> f64 {
        *self.norm1.get_or_init(|| match &*self.kind {
            OpKind::Csr {
                row_ptr,
                col_idx,
                vals,
            } => {
                let mut colsum = vec![0.0f64; self.n];
                for i in 0..self.n {
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        colsum[col_idx[k]] += vals[k].abs();
                    }
                }
                colsum.into_iter().fold(0.0, f64::max)
            }
            OpKind::MatFree { apply } => {
                // ||A x||_inf <= ||A||_1 ... ||A||_inf for sign vectors x; a
                // handful of probes gives a usable scale for tolerances.
                let mut best = 0.0f64;
                let mut out = vec![0.0; self.n];
                for probe in 0u64..4 {
                    let v: Vec<f64> = (0..self.n)
                        .map(|i| {
                            let h = (i as u64)
                                .wrapping_mul(0x9E3779B97F4A7C15)
                                .wrapping_add(probe.wrapping_mul(0xBF58476D1CE4E5B9));
                            if (h >> 63) == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        })
                        .collect();
                    out.iter_mut().for_each(|o| *o = 0.0);
                    apply(&v, &mut out);
                    best = best.max(out.iter().map(|x| x.abs()).fold(0.0, f64::max));
                }
                best.max(f64::MIN_POSITIVE)
            }
        })
    }

    /// Materialize as a dense matrix by applying to unit vectors.
    /// Intended for small test problems.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut c = Counters::new();
        let mut out = DenseMatrix::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e[j] = 1.0;
            let col = self.apply(&e, &mut c).unwrap();
            out.col_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        out
    }

    /// CSR parts, if this operator is stored explicitly.
    pub fn csr_parts(&self) -> Option<(&[usize], &[usize], &[f64])> {
        match &*self.kind {
            OpKind::Csr {
                row_ptr,
                col_idx,
                vals,
            } => Some((row_ptr, col_idx, vals)),
            OpKind::MatFree { .. } => None,
        }
    }
}

/// Apply `a` to `v`; thin wrapper that keeps counter discipline at call
/// sites that own a plain vector.
pub fn spmv(a: &SparseOperator, v: &[f64], counters: &mut Counters) -> Result<Vec<f64>> {
    a.apply(v, counters)
}
