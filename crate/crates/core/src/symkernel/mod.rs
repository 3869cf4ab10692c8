//! Symmetric matrix algebra over exact rationals and binary64.

mod eig;
mod inertia;
mod mat;
mod sym;

pub use eig::{eig_sym, min_eig, Eigen};
pub use inertia::{inertia_by_elimination, inertia_float, psd_status, rank_psd, Inertia, PsdStatus};
pub use mat::{solve_affine, AffineSolution, Mat};
pub use sym::SymMat;

use crate::error::Result;
use crate::scalar::Scalar;

/// `A • B`
pub fn inner<T: Scalar>(a: &SymMat<T>, b: &SymMat<T>) -> Result<T> {
    a.inner(b)
}

/// `TᵀMT`
pub fn congruence<T: Scalar>(m: &SymMat<T>, t: &Mat<T>) -> Result<SymMat<T>> {
    m.congruence(t)
}

pub fn schur_complement<T: Scalar>(g: &SymMat<T>, k: usize) -> Result<SymMat<T>> {
    g.schur_complement(k)
}
