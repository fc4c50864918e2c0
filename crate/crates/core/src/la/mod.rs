//! Dense and sparse linear-algebra kernels shared by the solver stack.

pub mod dense;
pub mod mtx;
pub mod phi;
pub mod qr;
pub mod sparse;

pub use dense::{dense_expm, DenseMatrix};
pub use phi::{phi1, phi2};
pub use qr::ThinQr;
pub use sparse::{spmv, SparseOperator};
