/// Operation counters tracked across a solve.
///
/// Counting rules:
/// - `mvecs`: one per application of the operator to a length-n vector
///   (a block application of width l counts l).
/// - `nprods`: one per inner product between two length-n vectors,
///   including norm computations.
/// - `sprods`: one per inner product between two length-s (sketched)
///   vectors, including norms and the projections of sketched data onto
///   the sketched basis.
/// - `mfuns`: one per dense matrix-function evaluation; `mfunsize` is the
///   largest matrix dimension passed to such an evaluation.
/// - `nops`: one per other length-n vector operation (axpy, scaling,
///   sketch application).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub mvecs: u64,
    pub sprods: u64,
    pub nprods: u64,
    pub mfuns: u64,
    pub mfunsize: usize,
    pub nops: u64,
}

impl Counters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a matrix-function evaluation of the given dimension.
    pub fn record_mfun(&mut self, dim: usize) {
        self.mfuns += 1;
        self.mfunsize = self.mfunsize.max(dim);
    }

    /// Merge counts accumulated elsewhere (e.g. a restart cycle) into self.
    pub fn absorb(&mut self, other: &Counters) {
        self.mvecs += other.mvecs;
        self.sprods += other.sprods;
        self.nprods += other.nprods;
        self.mfuns += other.mfuns;
        self.mfunsize = self.mfunsize.max(other.mfunsize);
        self.nops += other.nops;
    }
}
