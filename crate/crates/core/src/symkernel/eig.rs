use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::symkernel::mat::Mat;
use crate::symkernel::sym::SymMat;
use crate::tolerances::Tolerances;

/// `M = Q diag(values) Qᵀ`, values sorted descending, columns of `vectors`
/// orthonormal.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

const MAX_SWEEPS: usize = 10_000;

pub fn eig_sym(m: &SymMat<f64>, tol: &Tolerances) -> Result<Eigen> {
    let n = m.order();
    let a = m.to_nalgebra();
    let se = SymmetricEigen::try_new(a.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);

    let q = vectors.to_nalgebra();
    let lam = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
    let resid = (&a * &q - &q * lam).norm();
    if !resid.is_finite() || resid > tol.eig * m.frob_norm().max(1.0) {
        return Err(Error::EigenNoConvergence);
    }
    Ok(Eigen { values, vectors })
}

/// Smallest eigenvalue and a unit eigenvector for it.
pub fn min_eig(m: &SymMat<f64>, tol: &Tolerances) -> Result<(f64, Vec<f64>)> {
    let e = eig_sym(m, tol)?;
    let k = m.order() - 1;
    Ok((e.values[k], e.vector(k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_swap() {
        let t = Tolerances::default();
        let e = eig_sym(&SymMat::identity(2), &t).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let e12 = SymMat::<f64>::unit(2, 0, 1);
        let e = eig_sym(&e12, &t).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn recovers_rotated_diagonal() {
        let t = Tolerances::default();
        let th: f64 = 0.7;
        let r = Mat::from_rows(vec![vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]]).unwrap();
        let d = SymMat::diag(&[3.0, 1.0]);
        let m = d.congruence_unchecked(&r.transpose());
        let e = eig_sym(&m, &t).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-10);
        assert!((e.values[1] - 1.0).abs() < 1e-10);
    }
}
