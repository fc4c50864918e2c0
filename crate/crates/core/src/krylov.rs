//! Nested (block) Krylov bases: fully orthogonalized Arnoldi for the
//! classical baseline, and k-truncated block Arnoldi for the sketched
//! method. Both produce the same data: a basis `V` extended block by
//! block and a block upper Hessenberg matrix `H` with
//! `A V_m = V_{m+1} H_m` (exactly, up to rounding, in either mode).

use crate::counters::Counters;
use crate::error::{Error, Result};
use crate::la::dense::DenseMatrix;
use crate::la::qr::{axpy, dot, norm};
use crate::la::sparse::SparseOperator;

/// Outcome of one Arnoldi step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// A new basis block was appended.
    Extended,
    /// The Krylov space became invariant (or the new block was rank
    /// deficient): no new block was appended and iteration must stop.
    Breakdown,
}

/// State of a (block) Arnoldi process.
///
/// `columns` holds the scalar columns of `V_{m+1}`; the newest block is
/// non-orthogonal against all but the `k` most recent blocks in
/// truncated mode, but every block is internally orthonormal and nested:
/// completed columns are never modified by later steps.
#[derive(Debug)]
pub struct KrylovState {
    columns: Vec<Vec<f64>>,
    h: DenseMatrix,
    n: usize,
    ell: usize,
    /// Number of previous blocks each new block is orthogonalized
    /// against; `None` means all of them.
    trunc: Option<usize>,
    steps: usize,
    m_cap: usize,
    breakdown: bool,
    start_coeffs: DenseMatrix,
}

impl KrylovState {
    /// Start a process from a block of (independent, nonzero) vectors.
    /// The block is orthonormalized; the triangular coefficients are
    /// retained so callers can project the original start data exactly.
    pub fn new(
        start: &[Vec<f64>],
        trunc: Option<usize>,
        m_cap: usize,
    ) -> Result<(Self, DenseMatrix)> {
        assert!(!start.is_empty(), "start block must be nonempty");
        let n = start[0].len();
        let ell = start.len();
        if let Some(k) = trunc {
            assert!(k >= 1, "truncation depth must be at least 1");
        }
        let mut counters = Counters::new();
        let (block, coeffs) = block_qr(start, n, 0.0, &mut counters)?
            .ok_or(Error::RankDeficient { column: 0 })?;
        let h = DenseMatrix::zeros((m_cap + 1) * ell, m_cap * ell);
        let state = Self {
            columns: block,
            h,
            n,
            ell,
            trunc,
            steps: 0,
            m_cap,
            breakdown: false,
            start_coeffs: coeffs.clone(),
        };
        Ok((state, coeffs))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.ell
    }

    /// Completed steps; the basis holds `(steps+1)` blocks unless a
    /// breakdown occurred at the last step.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn start_coeffs(&self) -> &DenseMatrix {
        &self.start_coeffs
    }

    /// Scalar basis columns currently stored.
    pub fn basis_cols(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// One Arnoldi step: applies the operator to the newest block,
    /// orthogonalizes (fully or against the `k` most recent blocks) with
    /// modified Gram-Schmidt, and appends the normalized result.
    pub fn step(&mut self, op: &SparseOperator, counters: &mut Counters) -> Result<StepOutcome> {
        assert!(!self.breakdown, "stepping after breakdown");
        assert!(self.steps < self.m_cap, "step capacity exhausted");
        if op.dim() != self.n {
            return Err(Error::DimensionMismatch {
                context: "KrylovState::step operator",
                expected: self.n,
                got: op.dim(),
            });
        }
        let j = self.steps; // 0-based index of the newest block
        let nblocks = j + 1;
        let first = match self.trunc {
            Some(k) => nblocks.saturating_sub(k),
            None => 0,
        };

        // Z = A * V_j (block)
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(self.ell);
        for c in 0..self.ell {
            z.push(op.apply(&self.columns[j * self.ell + c], counters)?);
        }

        for bi in first..nblocks {
            for zc in z.iter_mut() {
                for r in 0..self.ell {
                    let q = &self.columns[bi * self.ell + r];
                    let coeff = dot(q, zc);
                    counters.nprods += 1;
                    counters.nops += 1;
                    // h_{bi+1, j+1}[r, c]
                    axpy(-coeff, q, zc);
                    self.h_add(bi * self.ell + r, j * self.ell + z_index(zc, &z), coeff);
                }
            }
        }

        let tol = self.n as f64 * f64::EPSILON * op.norm1_est();
        let qr = block_qr(&z, self.n, tol, counters)?;
        match qr {
            None => {
                self.breakdown = true;
                self.steps += 1;
                Ok(StepOutcome::Breakdown)
            }
            Some((block, r)) => {
                for (c, col) in block.into_iter().enumerate() {
                    self.columns.push(col);
                    for rr in 0..=c {
                        self.h
                            .set(nblocks * self.ell + rr, j * self.ell + c, r.get(rr, c));
                    }
                }
                self.steps += 1;
                Ok(StepOutcome::Extended)
            }
        }
    }

    fn h_add(&mut self, i: usize, jc: usize, v: f64) {
        let cur = self.h.get(i, jc);
        self.h.set(i, jc, cur + v);
    }

    /// Scalar Hessenberg entry.
    pub fn h_entry(&self, i: usize, j: usize) -> f64 {
        self.h.get(i, j)
    }

    /// The `l x l` Hessenberg block at block position (bi, bj).
    pub fn h_block(&self, bi: usize, bj: usize) -> DenseMatrix {
        self.h.block(bi * self.ell, bj * self.ell, self.ell, self.ell)
    }

    /// Subdiagonal block of block column `bj` (0-based).
    pub fn h_subdiag(&self, bj: usize) -> DenseMatrix {
        self.h_block(bj + 1, bj)
    }

    /// Leading square `m*l x m*l` part of H.
    pub fn h_square(&self, m: usize) -> DenseMatrix {
        self.h.block(0, 0, m * self.ell, m * self.ell)
    }

    /// Upper `m*l x l` part of H's block column `m` (0-based block col).
    pub fn h_col_upper(&self, m: usize) -> DenseMatrix {
        self.h.block(0, m * self.ell, m * self.ell, self.ell)
    }

    /// y += V_d * x over the first `d` scalar columns.
    pub fn basis_times(&self, d: usize, x: &[f64], counters: &mut Counters) -> Vec<f64> {
        assert_eq!(x.len(), d);
        let mut y = vec![0.0; self.n];
        for (c, xi) in x.iter().enumerate() {
            counters.nops += 1;
            axpy(*xi, &self.columns[c], &mut y);
        }
        y
    }

    /// V_d^T v over the first `d` scalar columns.
    pub fn basis_transpose_times(&self, d: usize, v: &[f64], counters: &mut Counters) -> Vec<f64> {
        counters.nprods += d as u64;
        self.columns[..d].iter().map(|c| dot(c, v)).collect()
    }
}

// index of a column within a block slice; the borrow in the MGS loop
// prevents enumerate() on the outer iterator.
fn z_index(zc: &Vec<f64>, z: &[Vec<f64>]) -> usize {
    z.iter()
        .position(|c| std::ptr::eq(c.as_ptr(), zc.as_ptr()))
        .expect("column not in block")
}

/// Thin QR of a block of length-n columns by modified Gram-Schmidt.
/// Returns `None` when a column's remainder falls below `tol` (rank
/// deficiency / invariant subspace).
fn block_qr(
    cols: &[Vec<f64>],
    n: usize,
    tol: f64,
    counters: &mut Counters,
) -> Result<Option<(Vec<Vec<f64>>, DenseMatrix)>> {
    let ell = cols.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(ell);
    let mut r = DenseMatrix::zeros(ell, ell);
    for (c, col) in cols.iter().enumerate() {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                context: "block_qr column length",
                expected: n,
                got: col.len(),
            });
        }
        let mut z = col.clone();
        for (i, qi) in q.iter().enumerate() {
            let coeff = dot(qi, &z);
            counters.nprods += 1;
            counters.nops += 1;
            axpy(-coeff, qi, &mut z);
            r.set(i, c, coeff);
        }
        let nz = norm(&z);
        counters.nprods += 1;
        if nz <= tol || nz == 0.0 {
            return Ok(None);
        }
        for v in z.iter_mut() {
            *v /= nz;
        }
        counters.nops += 1;
        r.set(c, c, nz);
        q.push(z);
    }
    Ok(Some((q, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::sparse::SparseOperator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense_op(n: usize, seed: u64) -> (SparseOperator, DenseMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..n {
                trips.push((i, j, d.get(i, j)));
            }
        }
        (SparseOperator::from_triplets(n, &trips).unwrap(), d)
    }

    fn ones_normalized(n: usize) -> Vec<f64> {
        vec![1.0 / (n as f64).sqrt(); n]
    }

    #[test]
    fn first_coefficient_on_diagonal_matrix() {
        let a = SparseOperator::from_triplets(3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        let (mut st, _) = KrylovState::new(&[ones_normalized(3)], None, 4).unwrap();
        let mut c = Counters::new();
        st.step(&a, &mut c).unwrap();
        assert!((st.h_entry(0, 0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_operator_breaks_down_immediately() {
        let a = SparseOperator::identity(5);
        let (mut st, _) = KrylovState::new(&[ones_normalized(5)], None, 4).unwrap();
        let mut c = Counters::new();
        assert_eq!(st.step(&a, &mut c).unwrap(), StepOutcome::Breakdown);
        assert!(st.breakdown());
        assert_eq!(st.h_entry(1, 0), 0.0);
    }

    #[test]
    fn full_mode_basis_is_orthonormal() {
        let (a, _) = random_dense_op(3, 9);
        let (mut st, _) = KrylovState::new(&[ones_normalized(3)], None, 3).unwrap();
        let mut c = Counters::new();
        st.step(&a, &mut c).unwrap();
        st.step(&a, &mut c).unwrap();
        let cols = st.basis_cols();
        assert_eq!(cols.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&cols[i], &cols[j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_inactive_when_k_at_least_m() {
        let (a, _) = random_dense_op(20, 17);
        let b = ones_normalized(20);
        let (mut full, _) = KrylovState::new(&[b.clone()], None, 8).unwrap();
        let (mut tr, _) = KrylovState::new(&[b], Some(10), 8).unwrap();
        let mut c = Counters::new();
        for _ in 0..8 {
            full.step(&a, &mut c).unwrap();
            tr.step(&a, &mut c).unwrap();
        }
        for (cf, ct) in full.basis_cols().iter().zip(tr.basis_cols()) {
            for (x, y) in cf.iter().zip(ct) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        for i in 0..9 {
            for j in 0..8 {
                assert!((full.h_entry(i, j) - tr.h_entry(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncated_matches_full_on_symmetric_matrices() {
        // three-term recurrence: k = 2 loses nothing for symmetric A
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0) / n as f64;
                trips.push((i, j, v));
                if i != j {
                    trips.push((j, i, v));
                }
            }
        }
        let a = SparseOperator::from_triplets(n, &trips).unwrap();
        let b = ones_normalized(n);
        let (mut full, _) = KrylovState::new(&[b.clone()], None, 12).unwrap();
        let (mut tr, _) = KrylovState::new(&[b], Some(2), 12).unwrap();
        let mut c = Counters::new();
        for _ in 0..12 {
            full.step(&a, &mut c).unwrap();
            tr.step(&a, &mut c).unwrap();
        }
        for (cf, ct) in full.basis_cols().iter().zip(tr.basis_cols()) {
            for (x, y) in cf.iter().zip(ct) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn truncated_basis_spans_the_krylov_space() {
        let n = 100;
        let m = 10;
        let (a, ad) = random_dense_op(n, 31);
        let b = ones_normalized(n);
        let (mut st, _) = KrylovState::new(&[b.clone()], Some(2), m).unwrap();
        let mut c = Counters::new();
        for _ in 0..m {
            st.step(&a, &mut c).unwrap();
        }
        // orthonormalize the monomial basis b, Ab, ..., A^m b
        let mut mono: Vec<Vec<f64>> = Vec::new();
        let mut cur = b;
        for _ in 0..=m {
            let mut z = cur.clone();
            for q in &mono {
                let co = dot(q, &z);
                axpy(-co, q, &mut z);
            }
            for q in &mono {
                let co = dot(q, &z);
                axpy(-co, q, &mut z);
            }
            let nz = norm(&z);
            assert!(nz > 1e-10, "monomial basis degenerate");
            mono.push(z.iter().map(|v| v / nz).collect());
            cur = ad.mat_vec(&cur);
        }
        // every basis column lies in the span of the monomial basis
        for col in st.basis_cols() {
            let mut resid = col.clone();
            for q in &mono {
                let co = dot(q, &resid);
                axpy(-co, q, &mut resid);
            }
            assert!(norm(&resid) < 1e-8 * norm(col));
        }
        assert_eq!(st.basis_cols().len(), m + 1);
    }

    #[test]
    fn nestedness_is_bitwise() {
        let (a, _) = random_dense_op(30, 77);
        let (mut st, _) = KrylovState::new(&[ones_normalized(30)], Some(2), 6).unwrap();
        let mut c = Counters::new();
        for _ in 0..3 {
            st.step(&a, &mut c).unwrap();
        }
        let snapshot: Vec<Vec<f64>> = st.basis_cols().to_vec();
        for _ in 0..3 {
            st.step(&a, &mut c).unwrap();
        }
        for (old, new) in snapshot.iter().zip(st.basis_cols()) {
            assert_eq!(old, new, "earlier basis columns were modified");
        }
    }

    #[test]
    fn arnoldi_relation_holds_in_both_modes() {
        let n = 40;
        let (a, ad) = random_dense_op(n, 5);
        for trunc in [None, Some(2)] {
            let (mut st, _) = KrylovState::new(&[ones_normalized(n)], trunc, 8).unwrap();
            let mut c = Counters::new();
            for _ in 0..8 {
                st.step(&a, &mut c).unwrap();
            }
            let m = st.steps();
            let v = DenseMatrix::from_cols(n, st.basis_cols());
            let vm = v.block(0, 0, n, m);
            let hbar = DenseMatrix::from_fn(m + 1, m, |i, j| st.h_entry(i, j));
            let lhs = ad.matmul(&vm);
            let rhs = v.matmul(&hbar);
            let scale = a.norm1_est() * vm.norm_fro();
            assert!(
                lhs.add_scaled(-1.0, &rhs).norm_fro() <= 1e-10 * scale,
                "mode {:?}",
                trunc
            );
        }
    }

    #[test]
    fn block_mode_keeps_blocks_internally_orthonormal() {
        let n = 60;
        let (a, _) = random_dense_op(n, 13);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut st, _) = KrylovState::new(&[b0, b1], Some(2), 6).unwrap();
        let mut c = Counters::new();
        for _ in 0..6 {
            st.step(&a, &mut c).unwrap();
        }
        let ell = st.block_size();
        for blk in 0..=st.steps() {
            for i in 0..ell {
                for j in 0..ell {
                    let g = dot(
                        &st.basis_cols()[blk * ell + i],
                        &st.basis_cols()[blk * ell + j],
                    );
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12);
                }
            }
        }
    }
}
